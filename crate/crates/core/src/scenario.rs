//! Scenario files (TOML). Angles are in degrees at this boundary and
//! radians everywhere else.
//!
//! ```toml
//! [model]
//! theta = [3.473, 0.196, 0.242, 5.3, 1.1]
//!
//! [gains]
//! k = [80.0, 20.0]
//! K = [2.0, 2.0]
//! delta_deg = [7.0, 7.0]
//! gamma = [50.0, 0.5, 1.0, 80.0, 2.5]
//! variant = "log"        # or "tan"
//! tau_max = 10.0         # or "none"
//!
//! [trajectory]
//! amplitude = [0.7, 1.2]
//! omega = 1.0
//! alpha = 0.3
//!
//! [sim]
//! dt = 0.001
//! horizon = 60.0
//! e0_deg = [2.9, 2.9]
//! qdot0 = [0.0, 0.0]
//! theta_hat0 = [0.0, 0.0, 0.0, 0.0, 0.0]
//!
//! [output]
//! trace_path = "trace.csv"
//! metrics_path = "metrics.txt"
//! ```

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::controller::{BarrierVariant, GainConfig};
use crate::dynamics::{JointVector, ManipulatorModel, TwoLinkArm};
use crate::error::{Error, Result};
use crate::simulator::SimConfig;
use crate::trajectory::TrajectoryDef;

/// Torque limit entry: a number or the string `"none"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TorqueLimit {
    Limit(f64),
    Keyword(NoLimit),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoLimit {
    None,
}

impl TorqueLimit {
    fn value(self) -> Option<f64> {
        match self {
            TorqueLimit::Limit(v) => Some(v),
            TorqueLimit::Keyword(NoLimit::None) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub k: Vec<f64>,
    #[serde(rename = "K")]
    pub barrier: Vec<f64>,
    pub delta_deg: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub variant: BarrierVariant,
    pub tau_max: TorqueLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub horizon: f64,
    pub e0_deg: Vec<f64>,
    pub qdot0: Vec<f64>,
    pub theta_hat0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub trace_path: Option<PathBuf>,
    pub metrics_path: Option<PathBuf>,
}

/// The on-disk scenario schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: ModelSection,
    pub gains: GainsSection,
    pub trajectory: TrajectoryDef,
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sim: SimConfig,
    pub output: OutputSection,
}

fn config_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::ConfigParse(format!("{key}: {msg}"))
}

impl ScenarioFile {
    /// The two-link reference scenario.
    pub fn reference() -> Self {
        Self {
            model: ModelSection {
                theta: TwoLinkArm::DEFAULT_THETA.to_vec(),
            },
            gains: GainsSection {
                k: vec![80.0, 20.0],
                barrier: vec![2.0, 2.0],
                delta_deg: vec![7.0, 7.0],
                gamma: vec![50.0, 0.5, 1.0, 80.0, 2.5],
                variant: BarrierVariant::Logarithmic,
                tau_max: TorqueLimit::Limit(10.0),
            },
            trajectory: TrajectoryDef::reference(),
            sim: SimSection {
                dt: 1e-3,
                horizon: 60.0,
                e0_deg: vec![2.9, 2.9],
                qdot0: vec![0.0, 0.0],
                theta_hat0: vec![0.0; 5],
            },
            output: OutputSection::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Converts to internal units and runs every check a simulation would.
    pub fn validate(&self) -> Result<Scenario> {
        let model = TwoLinkArm;
        let n = model.dof();
        let p = model.param_count();

        let lengths = [
            ("model.theta", self.model.theta.len(), p),
            ("gains.k", self.gains.k.len(), n),
            ("gains.K", self.gains.barrier.len(), n),
            ("gains.delta_deg", self.gains.delta_deg.len(), n),
            ("gains.gamma", self.gains.gamma.len(), p),
            ("trajectory.amplitude", self.trajectory.amplitude.len(), n),
            ("sim.e0_deg", self.sim.e0_deg.len(), n),
            ("sim.qdot0", self.sim.qdot0.len(), n),
            ("sim.theta_hat0", self.sim.theta_hat0.len(), p),
        ];
        for (key, got, want) in lengths {
            if got != want {
                return Err(config_err(key, format!("expected {want} entries, found {got}")));
            }
        }

        let theta_true = model
            .params(&self.model.theta)
            .map_err(|e| config_err("model.theta", e))?;

        let delta: Vec<f64> = self.gains.delta_deg.iter().map(|d| d.to_radians()).collect();
        let gains = GainConfig::new(
            &self.gains.k,
            &self.gains.barrier,
            &delta,
            &self.gains.gamma,
            self.gains.variant,
            self.gains.tau_max.value(),
        )
        .map_err(|e| config_err("gains", e))?;

        for (i, (e0, d)) in self.sim.e0_deg.iter().zip(&self.gains.delta_deg).enumerate() {
            if !(e0.abs() < *d) {
                return Err(config_err(
                    "sim.e0_deg",
                    format!(
                        "joint {} starts at {e0} deg, outside the {d} deg constraint",
                        i + 1
                    ),
                ));
            }
        }

        let q_d0 = self.trajectory.sample(0.0).q;
        let e0 = JointVector::from_iterator(n, self.sim.e0_deg.iter().map(|d| d.to_radians()));
        let sim = SimConfig {
            dt: self.sim.dt,
            horizon: self.sim.horizon,
            theta_true,
            gains,
            trajectory: self.trajectory.clone(),
            q0: q_d0 - e0,
            qdot0: JointVector::from_column_slice(&self.sim.qdot0),
            theta_hat0: DVector::from_column_slice(&self.sim.theta_hat0),
        };
        sim.validate(&model).map_err(|e| match e {
            Error::ConfigParse(m) => config_err("sim", m),
            other => config_err("sim", other),
        })?;
        Ok(Scenario {
            sim,
            output: self.output.clone(),
        })
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string().trim_end().to_string()))?;
        file.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn reference() -> Self {
        ScenarioFile::reference()
            .validate()
            .expect("reference scenario is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round_trips_through_toml() {
        let text = ScenarioFile::reference().to_toml();
        let sc = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(sc.sim, SimConfig::reference());
    }

    #[test]
    fn parses_none_torque_limit_and_variant() {
        let mut f = ScenarioFile::reference();
        f.gains.tau_max = TorqueLimit::Keyword(NoLimit::None);
        f.gains.variant = BarrierVariant::Tangent;
        let text = f.to_toml();
        assert!(text.contains("tau_max = \"none\""), "{text}");
        assert!(text.contains("variant = \"tan\""), "{text}");
        let sc = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(sc.sim.gains.tau_max(), None);
        assert_eq!(sc.sim.gains.variant(), BarrierVariant::Tangent);
    }

    #[test]
    fn rejects_initial_error_outside_constraint() {
        let mut f = ScenarioFile::reference();
        f.sim.e0_deg = vec![8.0, 0.0];
        let err = Scenario::from_toml_str(&f.to_toml()).unwrap_err();
        match err {
            Error::ConfigParse(m) => assert!(m.contains("sim.e0_deg"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_gain_condition_violation() {
        let mut f = ScenarioFile::reference();
        f.gains.barrier = vec![0.01, 0.01];
        let err = Scenario::from_toml_str(&f.to_toml()).unwrap_err();
        assert!(matches!(err, Error::ConfigParse(ref m) if m.starts_with("gains")), "{err}");
    }

    #[test]
    fn reports_offending_key() {
        let text = ScenarioFile::reference().to_toml().replace("horizon = 60.0", "horizon = \"long\"");
        let err = Scenario::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");

        let text = ScenarioFile::reference().to_toml().replace("[sim]", "[sim]\nbogus = 1");
        let err = Scenario::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");

        let mut f = ScenarioFile::reference();
        f.gains.gamma.pop();
        let err = Scenario::from_toml_str(&f.to_toml()).unwrap_err();
        assert!(err.to_string().contains("gains.gamma"), "{err}");

        let mut f = ScenarioFile::reference();
        f.sim.dt = -1.0;
        assert!(Scenario::from_toml_str(&f.to_toml()).is_err());

        let mut f = ScenarioFile::reference();
        f.model.theta = vec![1.0, 1.0, 0.0, 0.0, 0.0];
        let err = Scenario::from_toml_str(&f.to_toml()).unwrap_err();
        assert!(err.to_string().contains("model.theta"), "{err}");
    }
}
