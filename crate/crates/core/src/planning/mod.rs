//! Manipulation plans: construction, grid validation and instability.

pub mod constructors;
pub mod domain;
pub mod grid;
pub mod hfixture;
pub mod instability;
pub mod known;
pub mod plan;
pub mod sections;
pub mod validate;

pub use constructors::{
    builtin_plan, builtin_plan_for, combine_csec_cat, disjointify, geodesic_plan, h_fixture_plan, identity_plan,
    planar_rr_sec_cover, pointing_sec_cover, product_plan, pullback_plan, torus_cat_cover, BUILTIN_NAMES,
};
pub use domain::{Clause, Domain, Relation, Space};
pub use grid::PlanGrid;
pub use hfixture::{h_fixture_filtration, h_fixture_gap, h_fixture_negative_candidates};
pub use instability::{measure_instability, InstabilityReport};
pub use known::{reference_for, KnownValue, KNOWN_VALUES};
pub use plan::{CatDeformation, CatPiece, ManipulationPlan, PathInC, PlanPiece, Recipe, ReferenceBound, SecPiece};
pub use sections::{canonical_section, Elbow, PointingBranch, Section};
pub use validate::{validate_plan, ValidationReport, CONTINUITY_LIPSCHITZ};

use crate::kinematics::{KinematicsError, WorkPoint};
use crate::Config;
use thiserror::Error;

/// Samples per plan path, endpoints included.
pub const PATH_SAMPLES: usize = 121;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("unknown branch: {0}")]
    UnknownBranch(String),
    #[error("no built-in plan for `{0}`")]
    UnknownBuiltin(String),
    #[error("pieces leave {} grid samples uncovered", witnesses.len())]
    CoverageGap { witnesses: Vec<(Config, WorkPoint)> },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("epsilon {eps} is below twice the grid spacing {spacing}")]
    EpsilonTooSmall { eps: f64, spacing: f64 },
    #[error("{0} is outside [0, 2]")]
    OutOfRange(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("plan document line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}
