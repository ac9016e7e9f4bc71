//! Fixed-step closed-loop simulation of plant plus controller.
//!
//! The plant is integrated with the true parameters; the controller only
//! ever sees `q`. `η` is reconstructed from the plant velocity for logging
//! and analysis.

use nalgebra::DVector;

use crate::controller::{self, ControllerState, GainConfig, BARRIER_GUARD};
use crate::dynamics::{JointVector, ManipulatorModel, ParamVector, TwoLinkArm};
use crate::error::{Error, Result};
use crate::lyapunov;
use crate::trajectory::TrajectoryDef;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub theta_true: ParamVector,
    pub gains: GainConfig,
    pub trajectory: TrajectoryDef,
    pub q0: JointVector,
    pub qdot0: JointVector,
    pub theta_hat0: DVector<f64>,
}

impl SimConfig {
    /// Two-link reference scenario: 7° constraint, +2.9° initial error on
    /// both joints, ±10 N·m saturation, 1 ms step over 60 s.
    pub fn reference() -> Self {
        let delta = 7f64.to_radians();
        let e0 = 2.9f64.to_radians();
        Self {
            dt: 1e-3,
            horizon: 60.0,
            theta_true: TwoLinkArm::default_params(),
            gains: GainConfig::new(
                &[80.0, 20.0],
                &[2.0, 2.0],
                &[delta, delta],
                &[50.0, 0.5, 1.0, 80.0, 2.5],
                controller::BarrierVariant::Logarithmic,
                Some(10.0),
            )
            .expect("reference gains satisfy the gain condition"),
            trajectory: TrajectoryDef::reference(),
            q0: JointVector::from_element(2, -e0),
            qdot0: JointVector::zeros(2),
            theta_hat0: DVector::zeros(5),
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Checks every precondition of [`run`] so that no configuration error
    /// can surface mid-run.
    pub fn validate<M: ManipulatorModel + ?Sized>(&self, model: &M) -> Result<()> {
        let n = model.dof();
        let p = model.param_count();
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::ConfigParse(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::ConfigParse(format!(
                "horizon = {} must be positive",
                self.horizon
            )));
        }
        if self.horizon < self.dt {
            return Err(Error::ConfigParse("horizon is shorter than dt".into()));
        }
        model.check_params(&self.theta_true)?;
        let dims = [
            ("gains.k", self.gains.dof(), n),
            ("gains.gamma", self.gains.param_count(), p),
            ("trajectory.amplitude", self.trajectory.dof(), n),
            ("q0", self.q0.len(), n),
            ("qdot0", self.qdot0.len(), n),
            ("theta_hat0", self.theta_hat0.len(), p),
        ];
        for (name, got, want) in dims {
            if got != want {
                return Err(Error::Dimension(format!("{name} has {got} entries, expected {want}")));
            }
        }
        let finite = self.q0.iter().chain(self.qdot0.iter()).chain(self.theta_hat0.iter());
        if finite.clone().any(|x| !x.is_finite())
            || self.trajectory.amplitude.iter().any(|x| !x.is_finite())
            || !self.trajectory.omega.is_finite()
            || !(self.trajectory.alpha.is_finite() && self.trajectory.alpha >= 0.0)
        {
            return Err(Error::ConfigParse("initial state and trajectory must be finite".into()));
        }
        let e0 = self.trajectory.sample(0.0).q - &self.q0;
        for i in 0..n {
            let limit = self.gains.delta()[i];
            if e0[i].abs() >= limit * (1.0 - BARRIER_GUARD) {
                return Err(Error::ConfigParse(format!(
                    "initial error on joint {} ({:.6} rad) is not inside the constraint ({:.6} rad)",
                    i + 1,
                    e0[i].abs(),
                    limit
                )));
            }
        }
        Ok(())
    }
}

/// Plant and controller state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub q: JointVector,
    pub qdot: JointVector,
    pub ctrl: ControllerState,
}

/// Time derivative of the integrated part of [`SimState`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimRate {
    pub qdot: JointVector,
    pub qddot: JointVector,
    pub w: JointVector,
    pub i1: DVector<f64>,
    pub i2: DVector<f64>,
}

impl SimState {
    fn pack(&self) -> DVector<f64> {
        let parts = [&self.q, &self.qdot, &self.ctrl.w, &self.ctrl.i1, &self.ctrl.i2];
        DVector::from_iterator(
            parts.iter().map(|v| v.len()).sum(),
            parts.iter().flat_map(|v| v.iter().copied()),
        )
    }

    fn unpack(&self, t: f64, y: &DVector<f64>) -> Self {
        let n = self.q.len();
        let p = self.ctrl.i1.len();
        let seg = |start: usize, len: usize| y.rows(start, len).into_owned();
        Self {
            t,
            q: seg(0, n),
            qdot: seg(n, n),
            ctrl: ControllerState {
                w: seg(2 * n, n),
                i1: seg(3 * n, p),
                i2: seg(3 * n + p, p),
                theta_offset: self.ctrl.theta_offset.clone(),
            },
        }
    }

    fn is_finite(&self) -> bool {
        [&self.q, &self.qdot, &self.ctrl.w, &self.ctrl.i1, &self.ctrl.i2]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

impl SimRate {
    fn pack(&self) -> DVector<f64> {
        let parts = [&self.qdot, &self.qddot, &self.w, &self.i1, &self.i2];
        DVector::from_iterator(
            parts.iter().map(|v| v.len()).sum(),
            parts.iter().flat_map(|v| v.iter().copied()),
        )
    }
}

/// One classical fourth-order Runge-Kutta step of `ẏ = f(t, y)`.
pub fn rk4<F>(t: f64, y: &DVector<f64>, h: f64, mut f: F) -> Result<DVector<f64>>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &(y + &k1 * (0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(y + &k2 * (0.5 * h)))?;
    let k4 = f(t + h, &(y + &k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// One logged instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub q: JointVector,
    pub q_d: JointVector,
    pub e: JointVector,
    pub e_f: JointVector,
    pub eta: JointVector,
    pub tau: JointVector,
    pub tau_raw: JointVector,
    pub theta_hat: DVector<f64>,
    /// Barrier Lyapunov function value (variant per the gain config).
    pub v: f64,
    /// Diagonal of `K_e`; empty when the record was read back from CSV.
    pub k_e: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// True when any logged torque was clipped by saturation.
    pub fn saturated(&self) -> bool {
        self.records.iter().any(|r| r.tau != r.tau_raw)
    }
}

/// Closed-loop simulator for a given model and scenario.
#[derive(Debug, Clone)]
pub struct Simulator<M = TwoLinkArm> {
    model: M,
    cfg: SimConfig,
}

impl<M: ManipulatorModel> Simulator<M> {
    pub fn new(model: M, cfg: SimConfig) -> Result<Self> {
        cfg.validate(&model)?;
        Ok(Self { model, cfg })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn initial_state(&self) -> SimState {
        let cfg = &self.cfg;
        let desired = cfg.trajectory.sample(0.0);
        let e0 = controller::tracking_error(&desired.q, &cfg.q0);
        let y_d0 = self.model.desired_regressor(&desired);
        SimState {
            t: 0.0,
            q: cfg.q0.clone(),
            qdot: cfg.qdot0.clone(),
            ctrl: ControllerState::init(&e0, &y_d0, &cfg.theta_hat0, &cfg.gains),
        }
    }

    /// Closed-loop vector field at `s`.
    pub fn closed_loop_rhs(&self, s: &SimState) -> Result<SimRate> {
        let desired = self.cfg.trajectory.sample(s.t);
        let sig = controller::evaluate(&self.model, &self.cfg.gains, &s.ctrl, &desired, &s.q)
            .map_err(|e| with_time(e, s.t))?;
        let qddot = self.model.forward_dynamics(
            &self.cfg.theta_true,
            &s.q,
            &s.qdot,
            &sig.torque.applied,
        )?;
        let rate = SimRate {
            qdot: s.qdot.clone(),
            qddot,
            w: sig.w_rate,
            i1: sig.i1_rate,
            i2: sig.i2_rate,
        };
        let finite = [&rate.qdot, &rate.qddot, &rate.w, &rate.i1, &rate.i2]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::NonFinite { time: s.t });
        }
        Ok(rate)
    }

    /// Advances `s` by one fixed step `dt`.
    pub fn rk4_step(&self, s: &SimState) -> Result<SimState> {
        self.step_by(s, self.cfg.dt)
    }

    fn step_by(&self, s: &SimState, h: f64) -> Result<SimState> {
        let y = s.pack();
        let y1 = rk4(s.t, &y, h, |t, y| {
            self.closed_loop_rhs(&s.unpack(t, y)).map(|r| r.pack())
        })?;
        let next = s.unpack(s.t + h, &y1);
        if !next.is_finite() {
            return Err(Error::NonFinite { time: next.t });
        }
        Ok(next)
    }

    /// `η = ė + e + e_f`; uses the plant velocity, so diagnostic only.
    pub fn compute_eta(&self, s: &SimState) -> Result<JointVector> {
        let desired = self.cfg.trajectory.sample(s.t);
        let e = controller::tracking_error(&desired.q, &s.q);
        let e_f = controller::filter_output(&e, &s.ctrl.w, &self.cfg.gains);
        Ok((&desired.qd - &s.qdot) + e + e_f)
    }

    /// Full diagnostic record for `s`.
    pub fn record(&self, s: &SimState) -> Result<TraceRecord> {
        let cfg = &self.cfg;
        let desired = cfg.trajectory.sample(s.t);
        let sig = controller::evaluate(&self.model, &cfg.gains, &s.ctrl, &desired, &s.q)
            .map_err(|e| with_time(e, s.t))?;
        let eta = (&desired.qd - &s.qdot) + &sig.e + &sig.e_f;
        let theta_tilde = cfg.theta_true.as_vector() - &sig.theta_hat;
        let mass = self.model.mass_matrix(&cfg.theta_true, &s.q);
        let v = lyapunov::blf_value(&sig.e, &sig.e_f, &eta, &theta_tilde, &mass, &cfg.gains)
            .map_err(|e| with_time(e, s.t))?;
        Ok(TraceRecord {
            t: s.t,
            q: s.q.clone(),
            q_d: desired.q,
            e: sig.e,
            e_f: sig.e_f,
            eta,
            tau: sig.torque.applied,
            tau_raw: sig.torque.raw,
            theta_hat: sig.theta_hat,
            v,
            k_e: sig.k_e,
        })
    }

    /// Integrates from `t = 0` to the horizon, returning the final state
    /// without logging.
    pub fn final_state(&self) -> Result<SimState> {
        let mut s = self.initial_state();
        for k in 0..self.cfg.steps() {
            s = self.step_by(&s, self.cfg.dt)?;
            s.t = (k + 1) as f64 * self.cfg.dt;
        }
        Ok(s)
    }

    /// Integrates from `t = 0` to the horizon, logging every step.
    pub fn run(&self) -> Result<Trace> {
        let steps = self.cfg.steps();
        let mut records = Vec::with_capacity(steps + 1);
        let mut s = self.initial_state();
        records.push(self.record(&s)?);
        for k in 0..steps {
            s = self.step_by(&s, self.cfg.dt)?;
            // Re-derive t from the step index so it carries no rounding drift.
            s.t = (k + 1) as f64 * self.cfg.dt;
            records.push(self.record(&s)?);
        }
        Ok(Trace { records })
    }
}

/// Runs the scenario on the two-link reference model.
pub fn run(cfg: &SimConfig) -> Result<Trace> {
    Simulator::new(TwoLinkArm, cfg.clone())?.run()
}

fn with_time(err: Error, t: f64) -> Error {
    match err {
        Error::ConstraintBreach {
            joint,
            error,
            limit,
            ..
        } => Error::ConstraintBreach {
            time: t,
            joint,
            error,
            limit,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn short(mut cfg: SimConfig, horizon: f64) -> SimConfig {
        cfg.horizon = horizon;
        cfg
    }

    #[test]
    fn rk4_local_error_on_decay() {
        for &h in &[0.1, 0.05, 0.01] {
            let y1 = rk4(0.0, &dvector![1.0], h, |_, y| Ok(-y)).unwrap();
            let err = (y1[0] - (-h).exp()).abs() / (-h).exp();
            // Local truncation error of RK4 is h^5/120 for this problem.
            assert!(err < h.powi(4), "h = {h}: {err}");
            assert!(err < h.powi(5) / 100.0);
        }
    }

    #[test]
    fn rk4_step_doubling() {
        let f = |_: f64, y: &DVector<f64>| Ok(dvector![y[1], -y[0] - 0.1 * y[1]]);
        let y0 = dvector![1.0, 0.0];
        let mut diffs = Vec::new();
        for &h in &[0.2, 0.1, 0.05] {
            let full = rk4(0.0, &y0, h, f).unwrap();
            let half = rk4(0.0, &y0, h / 2.0, f).unwrap();
            let half = rk4(h / 2.0, &half, h / 2.0, f).unwrap();
            diffs.push((full - half).norm());
        }
        for w in diffs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((25.0..40.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn rejects_bad_step_and_initial_error() {
        let mut cfg = SimConfig::reference();
        cfg.dt = 0.0;
        assert!(Simulator::new(TwoLinkArm, cfg).is_err());

        let mut cfg = SimConfig::reference();
        cfg.q0 = dvector![-8f64.to_radians(), 0.0];
        assert!(matches!(Simulator::new(TwoLinkArm, cfg), Err(Error::ConfigParse(_))));

        let mut cfg = SimConfig::reference();
        cfg.theta_hat0 = DVector::zeros(4);
        assert!(matches!(Simulator::new(TwoLinkArm, cfg), Err(Error::Dimension(_))));
    }

    #[test]
    fn initial_acceleration_from_barrier_torque() {
        let cfg = SimConfig::reference();
        let sim = Simulator::new(TwoLinkArm, cfg.clone()).unwrap();
        let s0 = sim.initial_state();
        let rate = sim.closed_loop_rhs(&s0).unwrap();

        let e = 2.9f64.to_radians();
        let d = 7f64.to_radians();
        let tau0 = 2.0 * e / (d * d - e * e);
        let m = TwoLinkArm.mass_matrix(&cfg.theta_true, &cfg.q0);
        let want = m.lu().solve(&dvector![tau0, tau0]).unwrap();
        assert!((rate.qddot - want).amax() < 1e-10);
        assert_eq!(rate.i1.amax(), 0.0);
        assert_eq!(rate.i2.amax(), 0.0);

        let eta0 = sim.compute_eta(&s0).unwrap();
        assert!((eta0 - dvector![e, e]).amax() < 1e-15);
    }

    #[test]
    fn rhs_reports_breach_at_barrier() {
        let sim = Simulator::new(TwoLinkArm, SimConfig::reference()).unwrap();
        let mut s = sim.initial_state();
        s.t = 0.0;
        s.q = dvector![-7f64.to_radians(), 0.0];
        match sim.closed_loop_rhs(&s) {
            Err(Error::ConstraintBreach { joint: 0, time, .. }) => assert_eq!(time, 0.0),
            other => panic!("expected breach, got {other:?}"),
        }
    }

    #[test]
    fn exact_feedforward_holds_the_desired_path() {
        let mut cfg = short(SimConfig::reference(), 10.0);
        cfg.gains = cfg.gains.clone().with_tau_max(None);
        cfg.q0 = dvector![0.0, 0.0];
        cfg.theta_hat0 = cfg.theta_true.as_vector().clone();
        let trace = run(&cfg).unwrap();
        let worst = trace.records.iter().map(|r| r.e.amax()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "max |e| = {worst}");
    }

    #[test]
    fn zero_amplitude_run_stays_at_rest() {
        let mut cfg = short(SimConfig::reference(), 2.0);
        cfg.trajectory.amplitude = vec![0.0, 0.0];
        cfg.q0 = dvector![0.0, 0.0];
        cfg.theta_hat0 = dvector![0.1, 0.2, 0.3, 0.4, 0.5];
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.len(), 2001);
        for r in &trace.records {
            assert_eq!(r.e.amax(), 0.0);
            assert_eq!(r.tau.amax(), 0.0);
            assert_eq!(r.theta_hat, cfg.theta_hat0);
        }
    }

    #[test]
    fn trace_times_are_uniform() {
        let trace = run(&short(SimConfig::reference(), 0.5)).unwrap();
        assert_eq!(trace.len(), 501);
        for (k, r) in trace.records.iter().enumerate() {
            assert_eq!(r.t, k as f64 * 1e-3);
        }
        let r0 = &trace.records[0];
        assert_eq!(r0.e_f.amax(), 0.0);
        assert!(r0.k_e.iter().all(|&g| g > 0.0));
    }
}
