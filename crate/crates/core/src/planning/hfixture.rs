//! The step map `h: [0,3] → [0,2]` (`t`, then `1`, then `t − 1`), whose
//! preimage jumps from `{1}` to `[1,2]` to `{2}` at `y = 1`.

use super::constructors::h_fixture_plan;
use super::plan::{ManipulationPlan, PlanPiece, Recipe};
use super::domain::Domain;
use super::sections::Section;
use super::PlanError;
use crate::kinematics::{ConfigChart, MapSpec};

/// Jump between the right- and left-forced section values at `y`: the
/// forced branch is `y` below 1 and `y + 1` above.
pub fn h_fixture_gap(y: f64) -> Result<f64, PlanError> {
    if !(0.0..=2.0).contains(&y) {
        return Err(PlanError::OutOfRange(y));
    }
    let left = if y <= 1.0 { y } else { y + 1.0 };
    let right = if y < 1.0 { y } else { y + 1.0 };
    Ok(right - left)
}

/// The validated two-piece closed filtration `{[0,1], (1,2]}`.
pub fn h_fixture_filtration() -> ManipulationPlan {
    h_fixture_plan()
}

/// Single-piece plans for `h`: the low branch, the high branch, and the
/// branch switching at `y = 1`. Each must fail validation on fine grids.
pub fn h_fixture_negative_candidates() -> Vec<(&'static str, ManipulationPlan)> {
    let base = Recipe::Geodesic { chart: ConfigChart::interval(0.0, 3.0), far: 0 };
    [("low", Section::HLow), ("high", Section::HHigh), ("switch", Section::HSwitch)]
        .into_iter()
        .map(|(name, section)| {
            let piece = PlanPiece { domain: Domain::All, section: Recipe::Pullback { section, base: Box::new(base.clone()) } };
            (name, ManipulationPlan::new(MapSpec::HFixture, vec![piece], format!("single piece, {name} branch")))
        })
        .collect()
}
