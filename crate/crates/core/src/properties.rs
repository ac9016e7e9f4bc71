//! Randomized structural checks of a manipulator model and of the control
//! law, runnable as a report (`blf-arm properties`) and from tests.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::{self, BarrierVariant, GainConfig};
use crate::dynamics::{inertia_bounds, JointVector, ManipulatorModel, ParamVector};
use crate::simulator::{rk4, SimConfig, Simulator, Trace};

pub const SKEW_TOL: f64 = 1e-9;
pub const SWITCH_TOL: f64 = 1e-10;
pub const REGRESSOR_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const ENERGY_TOL: f64 = 1e-6;
pub const REGRESSOR_RATE_TOL: f64 = 1e-6;
pub const UPDATE_LAW_TOL: f64 = 1e-3;

/// Step used for finite differences of `M(q)` and `Y_d(t)`.
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub draws: usize,
    /// Worst residual observed (property specific, see tolerance).
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyResult {
    fn at_most(name: &'static str, draws: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            name,
            draws,
            worst,
            tolerance,
            passed: worst <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyReport {
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn passed(&self) -> usize {
        self.results.iter().filter(|r| r.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.results.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(
                f,
                "{:<4} {:<26} draws={:<6} worst={:.3e} tol={:.1e}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.draws,
                r.worst,
                r.tolerance
            )?;
        }
        write!(f, "{} passed, {} failed", self.passed(), self.failed())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub draws: usize,
    pub energy_draws: usize,
    pub seed: u64,
    /// Horizon of the closed-loop run used for the update-law check.
    pub update_law_horizon: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            draws: 1000,
            energy_draws: 1000,
            seed: 0x5eed,
            update_law_horizon: 10.0,
        }
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> JointVector {
    JointVector::from_fn(n, |_, _| rng.random_range(-scale..=scale))
}

pub fn mass_symmetry<M: ManipulatorModel>(model: &M, theta: &ParamVector, rng: &mut ChaCha8Rng, draws: usize) -> PropertyResult {
    let worst = (0..draws)
        .map(|_| {
            let m = model.mass_matrix(theta, &random_vec(rng, model.dof(), std::f64::consts::PI));
            (&m - m.transpose()).amax()
        })
        .fold(0.0, f64::max);
    PropertyResult::at_most("mass-symmetry", draws, worst, 0.0)
}

/// Passes when the smallest eigenvalue over the grid is positive; `worst`
/// reports `−λ_min`.
pub fn mass_positive_definite<M: ManipulatorModel>(model: &M, theta: &ParamVector) -> PropertyResult {
    let (m1, _) = inertia_bounds(model, theta, 360);
    PropertyResult {
        name: "mass-positive-definite",
        draws: 360,
        worst: -m1,
        tolerance: 0.0,
        passed: m1 > 0.0,
    }
}

/// `|ξᵀ(Ṁ − 2V_m)ξ| / ‖ξ‖²` with `Ṁ` from a central difference along
/// `q + h q̇`.
pub fn skew_symmetry_residual<M: ManipulatorModel>(
    model: &M,
    theta: &ParamVector,
    q: &JointVector,
    qdot: &JointVector,
    xi: &JointVector,
) -> f64 {
    let mp = model.mass_matrix(theta, &(q + qdot * FD_STEP));
    let mm = model.mass_matrix(theta, &(q - qdot * FD_STEP));
    let mdot = (mp - mm) / (2.0 * FD_STEP);
    let n = mdot - model.coriolis_matrix(theta, q, qdot) * 2.0;
    (xi.dot(&(n * xi))).abs() / xi.norm_squared()
}

pub fn skew_symmetry<M: ManipulatorModel>(model: &M, theta: &ParamVector, rng: &mut ChaCha8Rng, draws: usize) -> PropertyResult {
    let n = model.dof();
    let worst = (0..draws)
        .map(|_| {
            let q = random_vec(rng, n, std::f64::consts::PI);
            let qdot = random_vec(rng, n, 2.0);
            let xi = random_vec(rng, n, 1.0);
            skew_symmetry_residual(model, theta, &q, &qdot, &xi)
        })
        .fold(0.0, f64::max);
    PropertyResult::at_most("skew-symmetry", draws, worst, SKEW_TOL)
}

pub fn coriolis_switch<M: ManipulatorModel>(model: &M, theta: &ParamVector, rng: &mut ChaCha8Rng, draws: usize) -> PropertyResult {
    let n = model.dof();
    let worst = (0..draws)
        .map(|_| {
            let xi = random_vec(rng, n, std::f64::consts::PI);
            let nu = random_vec(rng, n, 2.0);
            let eta = random_vec(rng, n, 2.0);
            (model.coriolis_matrix(theta, &xi, &nu) * &eta - model.coriolis_matrix(theta, &xi, &eta) * &nu).norm()
        })
        .fold(0.0, f64::max);
    PropertyResult::at_most("coriolis-switch", draws, worst, SWITCH_TOL)
}

/// `‖Yθ − τ‖ / (1 + ‖τ‖)` over random arguments including `θ`.
pub fn regressor_identity<M: ManipulatorModel>(model: &M, rng: &mut ChaCha8Rng, draws: usize) -> PropertyResult {
    let (n, p) = (model.dof(), model.param_count());
    let worst = (0..draws)
        .map(|_| {
            let theta = ParamVector::from_raw(random_vec(rng, p, 5.0).as_slice());
            let q = random_vec(rng, n, std::f64::consts::PI);
            let qd = random_vec(rng, n, 3.0);
            let qdd = random_vec(rng, n, 5.0);
            let tau = model.inverse_dynamics(&theta, &q, &qd, &qdd);
            (model.regressor(&q, &qd, &qdd) * theta.as_vector() - &tau).norm() / (1.0 + tau.norm())
        })
        .fold(0.0, f64::max);
    PropertyResult::at_most("regressor-identity", draws, worst, REGRESSOR_TOL)
}

pub fn dynamics_round_trip<M: ManipulatorModel>(model: &M, theta: &ParamVector, rng: &mut ChaCha8Rng, draws: usize) -> PropertyResult {
    let n = model.dof();
    let worst = (0..draws)
        .map(|_| {
            let q = random_vec(rng, n, std::f64::consts::PI);
            let qd = random_vec(rng, n, 3.0);
            let a = random_vec(rng, n, 5.0);
            let tau = model.inverse_dynamics(theta, &q, &qd, &a);
            match model.forward_dynamics(theta, &q, &qd, &tau) {
                Ok(back) => (back - &a).norm(),
                Err(_) => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max);
    PropertyResult::at_most("inverse-forward-roundtrip", draws, worst, ROUND_TRIP_TOL)
}

/// Relative kinetic-energy drift of an unforced, frictionless RK4 rollout.
pub fn energy_drift<M: ManipulatorModel>(
    model: &M,
    theta: &ParamVector,
    q0: &JointVector,
    qdot0: &JointVector,
    dt: f64,
    horizon: f64,
) -> f64 {
    let n = model.dof();
    let zero_tau = JointVector::zeros(n);
    let f = |_t: f64, y: &DVector<f64>| {
        let q = y.rows(0, n).into_owned();
        let v = y.rows(n, n).into_owned();
        let a = model.forward_dynamics(theta, &q, &v, &zero_tau)?;
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&v);
        out.rows_mut(n, n).copy_from(&a);
        Ok(out)
    };
    let mut y = DVector::zeros(2 * n);
    y.rows_mut(0, n).copy_from(q0);
    y.rows_mut(n, n).copy_from(qdot0);
    let steps = (horizon / dt).round() as usize;
    for k in 0..steps {
        y = match rk4(k as f64 * dt, &y, dt, f) {
            Ok(y) => y,
            Err(_) => return f64::INFINITY,
        };
    }
    let e0 = model.kinetic_energy(theta, q0, qdot0);
    let e1 = model.kinetic_energy(theta, &y.rows(0, n).into_owned(), &y.rows(n, n).into_owned());
    (e1 - e0).abs() / e0
}

/// Frictionless copy of `theta`, assuming the model's friction parameters
/// are the trailing `dof` entries.
fn frictionless<M: ManipulatorModel>(model: &M, theta: &ParamVector) -> ParamVector {
    let mut v = theta.as_vector().clone();
    let p = v.len();
    for i in p - model.dof()..p {
        v[i] = 0.0;
    }
    ParamVector::from_raw(v.as_slice())
}

pub fn energy_conservation<M: ManipulatorModel>(model: &M, theta: &ParamVector, rng: &mut ChaCha8Rng, draws: usize) -> PropertyResult {
    let n = model.dof();
    let theta = frictionless(model, theta);
    let worst = (0..draws)
        .map(|_| {
            let q = random_vec(rng, n, std::f64::consts::PI);
            let mut v = random_vec(rng, n, 2.0);
            if v.norm() < 0.1 {
                v[0] += 0.5;
            }
            energy_drift(model, &theta, &q, &v, 1e-4, 1.0)
        })
        .fold(0.0, f64::max);
    PropertyResult::at_most("energy-conservation", draws, worst, ENERGY_TOL)
}

/// Closed-form `Ẏ_d` against a central difference of `Y_d` at `times`.
pub fn regressor_rate_residual<M: ManipulatorModel>(model: &M, cfg: &SimConfig, times: &[f64]) -> f64 {
    times
        .iter()
        .map(|&t| {
            let plus = model.desired_regressor(&cfg.trajectory.sample(t + FD_STEP));
            let minus = model.desired_regressor(&cfg.trajectory.sample(t - FD_STEP));
            let fd: DMatrix<f64> = (plus - minus) / (2.0 * FD_STEP);
            (fd - model.desired_regressor_rate(&cfg.trajectory.sample(t))).amax()
        })
        .fold(0.0, f64::max)
}

pub fn regressor_rate<M: ManipulatorModel>(model: &M, cfg: &SimConfig, rng: &mut ChaCha8Rng, draws: usize) -> PropertyResult {
    let mut times = vec![1.0, 5.0, 10.0];
    times.extend((0..draws.saturating_sub(3)).map(|_| rng.random_range(0.01..60.0)));
    let worst = regressor_rate_residual(model, cfg, &times);
    PropertyResult::at_most("regressor-rate", times.len(), worst, REGRESSOR_RATE_TOL)
}

/// Checks that each `K_e` entry increases strictly over evenly spaced
/// `|e_i|` in `[0, Δ_i(1 − 1e−6)]` and ends at least `1e5` times its value
/// at the origin. `worst` is the number of non-increasing steps.
pub fn barrier_monotonicity(gains: &GainConfig, variant: BarrierVariant, samples: usize) -> PropertyResult {
    let gains = gains.clone().with_variant(variant);
    let n = gains.dof();
    let mut bad = 0usize;
    for i in 0..n {
        let top = gains.delta()[i] * (1.0 - 1e-6);
        let mut prev = f64::NEG_INFINITY;
        let mut first = None;
        for s in 0..samples {
            let mut e = JointVector::zeros(n);
            e[i] = top * s as f64 / (samples - 1) as f64;
            let g = match controller::barrier_gain(&e, &gains) {
                Ok(g) => g[i],
                Err(_) => f64::NAN,
            };
            if !(g > prev) {
                bad += 1;
            }
            first.get_or_insert(g);
            prev = g;
        }
        if !(prev >= 1e5 * first.unwrap_or(f64::NAN)) {
            bad += 1;
        }
    }
    PropertyResult::at_most(
        match variant {
            BarrierVariant::Logarithmic => "barrier-monotone-log",
            BarrierVariant::Tangent => "barrier-monotone-tan",
        },
        samples * n,
        bad as f64,
        0.0,
    )
}

/// `max_t ‖Δθ̂/Δt − Γ Y_dᵀ η‖ / (1 + ‖Γ Y_dᵀ η‖)` with a central difference
/// of the logged estimates.
pub fn update_law_residual<M: ManipulatorModel>(sim: &Simulator<M>, trace: &Trace) -> f64 {
    let cfg = sim.config();
    let recs = &trace.records;
    let mut worst: f64 = 0.0;
    for k in 1..recs.len().saturating_sub(1) {
        let dt = recs[k + 1].t - recs[k - 1].t;
        let fd = (&recs[k + 1].theta_hat - &recs[k - 1].theta_hat) / dt;
        let y_d = sim.model().desired_regressor(&cfg.trajectory.sample(recs[k].t));
        let oracle = controller::oracle_theta_rate(&y_d, &recs[k].eta, &cfg.gains);
        worst = worst.max((fd - &oracle).norm() / (1.0 + oracle.norm()));
    }
    worst
}

pub fn update_law<M: ManipulatorModel + Clone>(model: &M, cfg: &SimConfig, horizon: f64) -> PropertyResult {
    let mut cfg = cfg.clone();
    cfg.horizon = horizon.min(cfg.horizon);
    let worst = Simulator::new(model.clone(), cfg)
        .and_then(|sim| sim.run().map(|tr| update_law_residual(&sim, &tr)))
        .unwrap_or(f64::INFINITY);
    PropertyResult::at_most("update-law-equivalence", 1, worst, UPDATE_LAW_TOL)
}

/// Every model and controller property, in a fixed order and with a fixed
/// seed.
pub fn run_suite<M: ManipulatorModel + Clone>(model: &M, cfg: &SimConfig, opts: &SuiteOptions) -> PropertyReport {
    let theta = &cfg.theta_true;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d = opts.draws;
    let results = vec![
        mass_symmetry(model, theta, &mut rng, d),
        mass_positive_definite(model, theta),
        skew_symmetry(model, theta, &mut rng, d),
        coriolis_switch(model, theta, &mut rng, d),
        regressor_identity(model, &mut rng, d),
        dynamics_round_trip(model, theta, &mut rng, d),
        energy_conservation(model, theta, &mut rng, opts.energy_draws),
        regressor_rate(model, cfg, &mut rng, d),
        barrier_monotonicity(&cfg.gains, BarrierVariant::Logarithmic, d),
        barrier_monotonicity(&cfg.gains, BarrierVariant::Tangent, d),
        update_law(model, cfg, opts.update_law_horizon),
    ];
    PropertyReport { results }
}

/// Minimum eigenvalue helper for tests and reports.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}
