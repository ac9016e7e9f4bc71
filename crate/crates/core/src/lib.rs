//! Position-constrained adaptive output-feedback tracking control for
//! serial-link robot manipulators, with a deterministic simulation harness
//! and numerical checks of the barrier Lyapunov analysis.

// Negated comparisons treat NaN as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod dynamics;
pub mod error;
pub mod lyapunov;
pub mod properties;
pub mod scenario;
pub mod simulator;
pub mod sweep;
pub mod trace_csv;
pub mod trajectory;

pub use controller::{BarrierVariant, ControllerState, GainConfig};
pub use dynamics::{JointVector, ManipulatorModel, ParamVector, TrajectorySample, TwoLinkArm};
pub use error::{Error, Result};
pub use simulator::{SimConfig, SimState, Simulator, Trace, TraceRecord};
pub use trajectory::TrajectoryDef;
pub use scenario::{Scenario, ScenarioFile};
