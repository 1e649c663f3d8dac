//! Forward kinematics, Jacobians and singularity analysis.

pub mod chart;
pub mod maps;
pub mod singular;

pub use chart::{angle_diff, wrap_pi, wrap_tau, Config, ConfigChart, GridAxis, WorkChart, WorkPoint};
pub use maps::{canonical_map, forward_kinematics, jacobian, ChainOutput, FrameChain, KinematicMap, MapSpec};
pub use singular::{coplanarity_test, singular_scan, singular_test, SingularScanReport, SingularTest};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("loop closure unsupported")]
    LoopClosureUnsupported,
    #[error("unsupported mechanism: {0}")]
    Unsupported(String),
    #[error("configuration has {got} coordinates, chart expects {expected}")]
    ConfigMismatch { expected: usize, got: usize },
    #[error("test vacuous: {0} revolute joints")]
    TestVacuous(usize),
    #[error("grid scan infeasible for dimension {0}")]
    ScanInfeasible(usize),
}
