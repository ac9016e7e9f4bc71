//! Position-constrained adaptive output-feedback control law.
//!
//! Only joint positions enter the control path. The velocity tracking error
//! is replaced by the filter output
//!
//! ```text
//! e_f = −k e + w,        ẇ = −(k + 1) e_f − k e + K_e(e) e,       w(0) = k e(0)
//! ```
//!
//! and the torque is `τ = Y_d θ̂ + K_e e − k e_f` with the desired-compensation
//! regressor `Y_d`. The parameter estimate is realized without `ė` as
//!
//! ```text
//! θ̂ = I1 + Γ Y_dᵀ e − I2 + θ̂_offset,   İ1 = Γ Y_dᵀ (e_f + e),   İ2 = Γ Ẏ_dᵀ e
//! ```
//!
//! whose time derivative is `Γ Y_dᵀ η` with `η = ė + e + e_f`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{JointVector, ManipulatorModel, TrajectorySample};
use crate::error::{Error, Result};

/// Relative guard band below `Δ_i` at which the barrier counts as hit.
pub const BARRIER_GUARD: f64 = 1e-9;

/// Shape of the error-dependent gain `K_e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BarrierVariant {
    /// `K_i / (Δ_i² − e_i²)`
    #[default]
    #[serde(rename = "log")]
    Logarithmic,
    /// `1 + tan²(π/2 · e_i²/Δ_i²)`
    #[serde(rename = "tan")]
    Tangent,
}

impl std::fmt::Display for BarrierVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BarrierVariant::Logarithmic => "log",
            BarrierVariant::Tangent => "tan",
        })
    }
}

/// Controller gains and constraint radii.
#[derive(Debug, Clone, PartialEq)]
pub struct GainConfig {
    k: DVector<f64>,
    barrier: DVector<f64>,
    delta: DVector<f64>,
    gamma: DVector<f64>,
    variant: BarrierVariant,
    tau_max: Option<f64>,
}

impl GainConfig {
    /// Validates positivity, dimensions and `min K_i >= max Δ_i²`.
    ///
    /// * `k` filter/torque gain diagonal, one entry per joint
    /// * `barrier` barrier numerators `K_i`
    /// * `delta` constraint radii `Δ_i` in radians
    /// * `gamma` adaptation gain diagonal, one entry per parameter
    pub fn new(
        k: &[f64],
        barrier: &[f64],
        delta: &[f64],
        gamma: &[f64],
        variant: BarrierVariant,
        tau_max: Option<f64>,
    ) -> Result<Self> {
        let cfg = Self::without_gain_condition(k, barrier, delta, gamma, variant, tau_max)?;
        let (lhs, rhs) = cfg.gain_condition();
        if lhs < rhs {
            return Err(Error::InvalidGains(format!(
                "min K_i = {lhs} is below max Δ_i² = {rhs}"
            )));
        }
        Ok(cfg)
    }

    /// Same as [`GainConfig::new`] but accepts `min K_i < max Δ_i²`.
    ///
    /// Only meant for studying runs outside the stability guarantee.
    pub fn without_gain_condition(
        k: &[f64],
        barrier: &[f64],
        delta: &[f64],
        gamma: &[f64],
        variant: BarrierVariant,
        tau_max: Option<f64>,
    ) -> Result<Self> {
        let n = k.len();
        if n == 0 || barrier.len() != n || delta.len() != n {
            return Err(Error::InvalidGains(format!(
                "k, K and delta must have the same nonzero length (got {}, {}, {})",
                k.len(),
                barrier.len(),
                delta.len()
            )));
        }
        if gamma.is_empty() {
            return Err(Error::InvalidGains("gamma is empty".into()));
        }
        for (name, vals) in [("k", k), ("K", barrier), ("delta", delta), ("gamma", gamma)] {
            if let Some(i) = vals.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::InvalidGains(format!(
                    "{name}[{i}] = {} must be finite and positive",
                    vals[i]
                )));
            }
        }
        if let Some(t) = tau_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidGains(format!(
                    "tau_max = {t} must be finite and positive"
                )));
            }
        }
        Ok(Self {
            k: DVector::from_column_slice(k),
            barrier: DVector::from_column_slice(barrier),
            delta: DVector::from_column_slice(delta),
            gamma: DVector::from_column_slice(gamma),
            variant,
            tau_max,
        })
    }

    pub fn dof(&self) -> usize {
        self.k.len()
    }

    pub fn param_count(&self) -> usize {
        self.gamma.len()
    }

    pub fn k(&self) -> &DVector<f64> {
        &self.k
    }

    /// Barrier numerators `K_i`.
    pub fn barrier(&self) -> &DVector<f64> {
        &self.barrier
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn gamma(&self) -> &DVector<f64> {
        &self.gamma
    }

    pub fn variant(&self) -> BarrierVariant {
        self.variant
    }

    pub fn tau_max(&self) -> Option<f64> {
        self.tau_max
    }

    pub fn with_variant(mut self, variant: BarrierVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_tau_max(mut self, tau_max: Option<f64>) -> Self {
        self.tau_max = tau_max.filter(|t| t.is_finite() && *t > 0.0);
        self
    }

    /// `(min K_i, max Δ_i²)`; the gain condition holds when `lhs >= rhs`.
    pub fn gain_condition(&self) -> (f64, f64) {
        (self.barrier.min(), self.delta.map(|d| d * d).max())
    }
}

/// Filter state and the two adaptation integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub w: JointVector,
    pub i1: DVector<f64>,
    pub i2: DVector<f64>,
    /// Constant making `θ̂(0)` equal the requested initial estimate.
    pub theta_offset: DVector<f64>,
}

impl ControllerState {
    /// `w(0) = k e(0)`, zero integrals, offset from `θ̂(0) − Γ Y_d(0)ᵀ e(0)`.
    pub fn init(
        e0: &JointVector,
        y_d0: &DMatrix<f64>,
        theta_hat0: &DVector<f64>,
        cfg: &GainConfig,
    ) -> Self {
        let p = cfg.param_count();
        Self {
            w: cfg.k.component_mul(e0),
            i1: DVector::zeros(p),
            i2: DVector::zeros(p),
            theta_offset: theta_hat0 - cfg.gamma.component_mul(&(y_d0.transpose() * e0)),
        }
    }
}

pub fn tracking_error(q_d: &JointVector, q: &JointVector) -> JointVector {
    q_d - q
}

/// Diagonal of the error-dependent gain `K_e(e)`.
///
/// Fails with [`Error::ConstraintBreach`] (time left as NaN for the caller to
/// fill) once `|e_i| >= Δ_i (1 − 1e−9)`.
pub fn barrier_gain(e: &JointVector, cfg: &GainConfig) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(e.len());
    for i in 0..e.len() {
        let d = cfg.delta[i];
        let ei = e[i];
        if !(ei.abs() < d * (1.0 - BARRIER_GUARD)) {
            return Err(Error::ConstraintBreach {
                time: f64::NAN,
                joint: i,
                error: ei.abs(),
                limit: d,
            });
        }
        out[i] = match cfg.variant {
            BarrierVariant::Logarithmic => cfg.barrier[i] / (d * d - ei * ei),
            BarrierVariant::Tangent => {
                let t = (FRAC_PI_2 * ei * ei / (d * d)).tan();
                1.0 + t * t
            }
        };
    }
    Ok(out)
}

/// `e_f = −k e + w`.
pub fn filter_output(e: &JointVector, w: &JointVector, cfg: &GainConfig) -> JointVector {
    w - cfg.k.component_mul(e)
}

/// `ẇ = −(k + 1) e_f − k e + K_e e`.
pub fn filter_state_rate(
    e: &JointVector,
    e_f: &JointVector,
    k_e: &DVector<f64>,
    cfg: &GainConfig,
) -> JointVector {
    let k1 = cfg.k.add_scalar(1.0);
    k_e.component_mul(e) - k1.component_mul(e_f) - cfg.k.component_mul(e)
}

pub fn theta_hat(
    state: &ControllerState,
    y_d: &DMatrix<f64>,
    e: &JointVector,
    cfg: &GainConfig,
) -> DVector<f64> {
    &state.i1 + cfg.gamma.component_mul(&(y_d.transpose() * e)) - &state.i2 + &state.theta_offset
}

/// `(İ1, İ2) = (Γ Y_dᵀ (e_f + e), Γ Ẏ_dᵀ e)`.
pub fn integrator_rates(
    y_d: &DMatrix<f64>,
    dy_d: &DMatrix<f64>,
    e: &JointVector,
    e_f: &JointVector,
    cfg: &GainConfig,
) -> (DVector<f64>, DVector<f64>) {
    (
        cfg.gamma.component_mul(&(y_d.transpose() * (e_f + e))),
        cfg.gamma.component_mul(&(dy_d.transpose() * e)),
    )
}

/// Commanded torque before and after saturation.
#[derive(Debug, Clone, PartialEq)]
pub struct Torque {
    pub applied: JointVector,
    pub raw: JointVector,
}

/// `τ = Y_d θ̂ + K_e e − k e_f`, clamped to `±τ_max` when saturation is on.
pub fn control_torque(
    y_d: &DMatrix<f64>,
    theta_hat: &DVector<f64>,
    k_e: &DVector<f64>,
    e: &JointVector,
    e_f: &JointVector,
    cfg: &GainConfig,
) -> Torque {
    let raw = y_d * theta_hat + k_e.component_mul(e) - cfg.k.component_mul(e_f);
    let applied = match cfg.tau_max {
        Some(lim) => raw.map(|t| t.clamp(-lim, lim)),
        None => raw.clone(),
    };
    Torque { applied, raw }
}

/// Derivative-form update `Γ Y_dᵀ η`. Needs `η`, hence `q̇`; test oracle only.
pub fn oracle_theta_rate(y_d: &DMatrix<f64>, eta: &JointVector, cfg: &GainConfig) -> DVector<f64> {
    cfg.gamma.component_mul(&(y_d.transpose() * eta))
}

/// Every signal the control law produces at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignals {
    pub e: JointVector,
    pub e_f: JointVector,
    pub k_e: DVector<f64>,
    pub y_d: DMatrix<f64>,
    pub dy_d: DMatrix<f64>,
    pub theta_hat: DVector<f64>,
    pub torque: Torque,
    pub w_rate: JointVector,
    pub i1_rate: DVector<f64>,
    pub i2_rate: DVector<f64>,
}

/// Evaluates the full control law from the measured position `q`.
pub fn evaluate<M: ManipulatorModel + ?Sized>(
    model: &M,
    cfg: &GainConfig,
    state: &ControllerState,
    desired: &TrajectorySample,
    q: &JointVector,
) -> Result<ControlSignals> {
    let e = tracking_error(&desired.q, q);
    let k_e = barrier_gain(&e, cfg)?;
    let e_f = filter_output(&e, &state.w, cfg);
    let y_d = model.desired_regressor(desired);
    let dy_d = model.desired_regressor_rate(desired);
    let theta_hat = theta_hat(state, &y_d, &e, cfg);
    let torque = control_torque(&y_d, &theta_hat, &k_e, &e, &e_f, cfg);
    let w_rate = filter_state_rate(&e, &e_f, &k_e, cfg);
    let (i1_rate, i2_rate) = integrator_rates(&y_d, &dy_d, &e, &e_f, cfg);
    Ok(ControlSignals {
        e,
        e_f,
        k_e,
        y_d,
        dy_d,
        theta_hat,
        torque,
        w_rate,
        i1_rate,
        i2_rate,
    })
}
