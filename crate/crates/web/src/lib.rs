//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Build with `cargo build --release --target wasm32-unknown-unknown -p blf-arm-web`
//! followed by `wasm-bindgen --target web --out-dir www/pkg`.

use blf_arm::controller::barrier_gain;
use blf_arm::dynamics::{inertia_bounds, INERTIA_GRID_POINTS};
use blf_arm::lyapunov::{self, AnalysisBounds, DEFAULT_ENVELOPE};
use blf_arm::scenario::{NoLimit, TorqueLimit};
use blf_arm::{BarrierVariant, Error, GainConfig, JointVector, ScenarioFile, Simulator, TwoLinkArm};
use wasm_bindgen::prelude::*;

/// Largest number of samples handed back for plotting.
const MAX_PLOT_POINTS: usize = 2000;

fn parse_variant(name: &str) -> Result<BarrierVariant, String> {
    match name {
        "log" => Ok(BarrierVariant::Logarithmic),
        "tan" => Ok(BarrierVariant::Tangent),
        other => Err(format!("unknown barrier variant `{other}`")),
    }
}

/// Knobs exposed on the page. Everything else follows the reference scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoParams {
    pub k: [f64; 2],
    pub barrier: f64,
    pub delta_deg: f64,
    pub e0_deg: f64,
    pub variant: BarrierVariant,
    /// Non-positive disables saturation.
    pub tau_max: f64,
    pub horizon: f64,
}

impl DemoParams {
    fn scenario_file(&self) -> ScenarioFile {
        let mut f = ScenarioFile::reference();
        f.gains.k = self.k.to_vec();
        f.gains.barrier = vec![self.barrier; 2];
        f.gains.delta_deg = vec![self.delta_deg; 2];
        f.gains.variant = self.variant;
        f.gains.tau_max = if self.tau_max > 0.0 {
            TorqueLimit::Limit(self.tau_max)
        } else {
            TorqueLimit::Keyword(NoLimit::None)
        };
        f.sim.e0_deg = vec![self.e0_deg; 2];
        f.sim.horizon = self.horizon;
        f
    }
}

/// Downsampled closed-loop signals. Angles are in degrees.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct SimulationResult {
    t: Vec<f64>,
    e1: Vec<f64>,
    e2: Vec<f64>,
    tau1: Vec<f64>,
    tau2: Vec<f64>,
    v: Vec<f64>,
    status: String,
}

#[wasm_bindgen]
impl SimulationResult {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn e1(&self) -> Vec<f64> {
        self.e1.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn e2(&self) -> Vec<f64> {
        self.e2.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn tau1(&self) -> Vec<f64> {
        self.tau1.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn tau2(&self) -> Vec<f64> {
        self.tau2.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn v(&self) -> Vec<f64> {
        self.v.clone()
    }
    /// `ok`, or a description of why the run stopped.
    #[wasm_bindgen(getter)]
    pub fn status(&self) -> String {
        self.status.clone()
    }
}

impl SimulationResult {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Runs the closed loop. A breach or numerical failure is reported through
/// `status`; invalid settings are an error.
pub fn run_demo(params: &DemoParams) -> Result<SimulationResult, String> {
    let scenario = params.scenario_file().validate().map_err(|e| e.to_string())?;
    let sim = Simulator::new(TwoLinkArm, scenario.sim).map_err(|e| e.to_string())?;
    let (trace, status) = match sim.run() {
        Ok(trace) => (trace, "ok".to_string()),
        Err(e @ (Error::ConstraintBreach { .. } | Error::NonFinite { .. })) => {
            return Ok(SimulationResult {
                status: e.to_string(),
                ..Default::default()
            })
        }
        Err(e) => return Err(e.to_string()),
    };
    let stride = trace.len().div_ceil(MAX_PLOT_POINTS).max(1);
    let mut out = SimulationResult {
        status,
        ..Default::default()
    };
    for r in trace.records.iter().step_by(stride) {
        out.t.push(r.t);
        out.e1.push(r.e[0].to_degrees());
        out.e2.push(r.e[1].to_degrees());
        out.tau1.push(r.tau[0]);
        out.tau2.push(r.tau[1]);
        out.v.push(r.v);
    }
    Ok(out)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    k1: f64,
    k2: f64,
    barrier: f64,
    delta_deg: f64,
    e0_deg: f64,
    variant: &str,
    tau_max: f64,
    horizon: f64,
) -> Result<SimulationResult, JsError> {
    let params = DemoParams {
        k: [k1, k2],
        barrier,
        delta_deg,
        e0_deg,
        variant: parse_variant(variant).map_err(|m| JsError::new(&m))?,
        tau_max,
        horizon,
    };
    run_demo(&params).map_err(|m| JsError::new(&m))
}

/// Barrier gain `K_e` of one joint at `points` errors spread evenly over
/// `[0, 0.99 Δ]`. Returns `[e/Δ..., K_e...]` concatenated.
pub fn gain_curve(barrier: f64, delta_deg: f64, variant: BarrierVariant, points: usize) -> Result<Vec<f64>, String> {
    let delta = delta_deg.to_radians();
    let gains = GainConfig::without_gain_condition(&[1.0], &[barrier], &[delta], &[1.0], variant, None)
        .map_err(|e| e.to_string())?;
    let points = points.max(2);
    let mut ratios = Vec::with_capacity(points);
    let mut values = Vec::with_capacity(points);
    for i in 0..points {
        let ratio = DEFAULT_ENVELOPE * i as f64 / (points - 1) as f64;
        let k_e = barrier_gain(&JointVector::from_element(1, ratio * delta), &gains).map_err(|e| e.to_string())?;
        ratios.push(ratio);
        values.push(k_e[0]);
    }
    ratios.extend(values);
    Ok(ratios)
}

#[wasm_bindgen]
pub fn barrier_gain_curve(barrier: f64, delta_deg: f64, variant: &str, points: usize) -> Result<Vec<f64>, JsError> {
    let variant = parse_variant(variant).map_err(|m| JsError::new(&m))?;
    gain_curve(barrier, delta_deg, variant, points).map_err(|m| JsError::new(&m))
}

/// Plain-text gain certification. Negative `zeta`/`kn` leave the dependent
/// checks unevaluated.
pub fn certify_text(params: &DemoParams, zeta1: f64, zeta2: f64, kn: f64) -> Result<String, String> {
    let f = params.scenario_file();
    let delta: Vec<f64> = f.gains.delta_deg.iter().map(|d| d.to_radians()).collect();
    let gains = GainConfig::without_gain_condition(
        &f.gains.k,
        &f.gains.barrier,
        &delta,
        &f.gains.gamma,
        params.variant,
        None,
    )
    .map_err(|e| e.to_string())?;
    // The scenario is rebuilt with a passing barrier gain so that `z(0)` can
    // be evaluated even when the K-condition under test fails.
    let mut probe = f.clone();
    probe.gains.barrier = vec![params.barrier.max(params.delta_deg.to_radians().powi(2)); 2];
    let scenario = probe.validate().map_err(|e| e.to_string())?;
    let (m1, m2) = inertia_bounds(&TwoLinkArm, &scenario.sim.theta_true, INERTIA_GRID_POINTS);
    let opt = |x: f64| (x >= 0.0).then_some(x);
    let bounds = AnalysisBounds {
        m1,
        m2,
        zeta1: opt(zeta1),
        zeta2: opt(zeta2),
        k_n: (kn > 0.0).then_some(kn),
        z0_norm: lyapunov::initial_z_norm(&scenario.sim),
        rho: DEFAULT_ENVELOPE,
    };
    bounds.validate().map_err(|e| e.to_string())?;
    Ok(lyapunov::certify_gains(&gains, &bounds).to_string())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn certify(
    k1: f64,
    k2: f64,
    barrier: f64,
    delta_deg: f64,
    e0_deg: f64,
    variant: &str,
    zeta1: f64,
    zeta2: f64,
    kn: f64,
) -> Result<String, JsError> {
    let params = DemoParams {
        k: [k1, k2],
        barrier,
        delta_deg,
        e0_deg,
        variant: parse_variant(variant).map_err(|m| JsError::new(&m))?,
        tau_max: 0.0,
        horizon: 1.0,
    };
    certify_text(&params, zeta1, zeta2, kn).map_err(|m| JsError::new(&m))
}
