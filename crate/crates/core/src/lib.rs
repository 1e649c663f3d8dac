//! Kinematic maps of jointed mechanisms and manipulation plans built on them.
//!
//! The crate covers rigid-body poses, mechanism descriptions with mobility
//! counts, forward kinematics with Jacobians and singular-set scans, path
//! lifting by Jacobian tracking, and explicit manipulation plans (partitions
//! of `C × W` with sections of the path-endpoint map) together with grid
//! validation and instability measurement.

pub mod grid;
pub mod kinematics;
pub mod linalg;
pub mod mechanism;
pub mod planning;
pub mod pose;
pub mod report;
pub mod tracking;

pub use kinematics::{
    canonical_map, coplanarity_test, forward_kinematics, jacobian, singular_scan, singular_test, ChainOutput,
    Config, ConfigChart, FrameChain, KinematicMap, KinematicsError, MapSpec, SingularScanReport, WorkChart,
    WorkPoint,
};
pub use mechanism::{
    dh_transform, ChartFactor, DhParams, JointKind, JointSpec, Mechanism, MechanismError, MobilityReport, Topology,
};
pub use planning::{
    builtin_plan, disjointify, measure_instability, validate_plan, InstabilityReport, ManipulationPlan, PlanError,
    ValidationReport,
};
pub use pose::{EulerZyx, PoseError, RigidPose, Rotation, ScrewParams};
pub use tracking::{lift_path, TrackingMethod, TrackingResult, TrackingSpec, WorkPath};
