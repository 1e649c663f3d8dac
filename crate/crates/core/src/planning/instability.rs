//! Grid measurement of plan instability: for every sample, how many piece
//! domains come within `ε` of it.

use super::grid::PlanGrid;
use super::plan::ManipulationPlan;
use super::PlanError;
use crate::kinematics::{Config, KinematicMap, WorkPoint};
use crate::report::{csv_row, fmt17};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityReport {
    pub map: String,
    /// Samples per axis, configuration axes first.
    pub shape: Vec<usize>,
    pub eps: f64,
    /// Largest distance between grid neighbours.
    pub spacing: f64,
    pub pieces: usize,
    /// Per sample, the pieces met by its `ε`-ball as a bit mask.
    pub masks: Vec<u64>,
    pub max_order: usize,
    pub witness: (Config, WorkPoint),
    /// `|R_k|` for `k = 1..=pieces`: samples of order at least `k`.
    pub level_sizes: Vec<usize>,
    /// Whether the `R_k` are nested and the order classes partition the grid.
    pub levels_consistent: bool,
    /// Neighbouring samples of equal order whose piece sets differ; these
    /// pairs would merge distinct `S_I` at grid scale.
    pub separation_violations: usize,
}

impl InstabilityReport {
    pub fn order(&self, lin: usize) -> usize {
        self.masks[lin].count_ones() as usize
    }

    pub fn orders(&self) -> Vec<usize> {
        (0..self.masks.len()).map(|i| self.order(i)).collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let join = |v: &[f64]| v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(" ");
        let shape = self.shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
        let levels = self.level_sizes.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
        for (k, v) in [
            ("map", self.map.clone()),
            ("shape", shape),
            ("eps", fmt17(self.eps)),
            ("spacing", fmt17(self.spacing)),
            ("pieces", self.pieces.to_string()),
            ("max_order", self.max_order.to_string()),
            ("witness_c", join(&self.witness.0)),
            ("witness_w", join(&self.witness.1)),
            ("level_sizes", levels),
            ("levels_consistent", self.levels_consistent.to_string()),
            ("separation_violations", self.separation_violations.to_string()),
        ] {
            out.push_str(&csv_row(&[k.to_string(), v]));
        }
        out
    }
}

/// Per-sample orders of `plan` on the `n`-per-axis grid. `eps` defaults to
/// twice the grid spacing and may not be smaller.
pub fn measure_instability(plan: &ManipulationPlan, n: usize, eps: Option<f64>) -> Result<InstabilityReport, PlanError> {
    if plan.pieces.is_empty() || plan.pieces.len() > 64 {
        return Err(PlanError::Precondition(format!("plan has {} pieces, need 1 to 64", plan.pieces.len())));
    }
    let k = KinematicMap::from_spec(plan.map.clone())?;
    let g = PlanGrid::new(&k, n)?;
    let spacing = g.spacing();
    let eps = eps.unwrap_or(2.0 * spacing);
    if eps < 2.0 * spacing {
        return Err(PlanError::EpsilonTooSmall { eps, spacing });
    }
    let membership = g.membership(&plan.pieces)?;
    let uncovered: Vec<_> = membership.iter().enumerate().filter(|(_, m)| m.is_empty()).map(|(i, _)| g.sample(i)).take(10).collect();
    if !uncovered.is_empty() {
        return Err(PlanError::CoverageGap { witnesses: uncovered });
    }
    let owner: Vec<usize> = membership.iter().map(|m| m[0]).collect();
    let full: u64 = if plan.pieces.len() == 64 { u64::MAX } else { (1u64 << plan.pieces.len()) - 1 };
    let radius: Vec<usize> = g
        .axis_steps()
        .iter()
        .zip(&g.shape.dims)
        .map(|(&step, &d)| if step > 0.0 { ((eps / step).ceil() as usize + 1).min(d) } else { d })
        .collect();

    let masks: Vec<u64> = (0..g.len())
        .into_par_iter()
        .map(|lin| {
            let mut mask = 1u64 << owner[lin];
            for m in g.shape.box_around(&g.shape.unravel(lin), &radius) {
                let bit = 1u64 << owner[m];
                if mask & bit == 0 && g.distance(lin, m) <= eps {
                    mask |= bit;
                    if mask == full {
                        break;
                    }
                }
            }
            mask
        })
        .collect();

    let orders: Vec<usize> = masks.iter().map(|m| m.count_ones() as usize).collect();
    let max_order = orders.iter().copied().max().unwrap_or(0);
    let at = orders.iter().position(|&o| o == max_order).unwrap_or(0);
    let level_sizes: Vec<usize> = (1..=plan.pieces.len()).map(|lvl| orders.iter().filter(|&&o| o >= lvl).count()).collect();
    let exact: usize = (1..=plan.pieces.len()).map(|lvl| orders.iter().filter(|&&o| o == lvl).count()).sum();
    let levels_consistent =
        level_sizes.windows(2).all(|w| w[0] >= w[1]) && level_sizes.first() == Some(&g.len()) && exact == g.len();
    let separation_violations = (0..g.len())
        .into_par_iter()
        .map(|lin| {
            g.shape
                .forward_neighbors(lin)
                .into_iter()
                .filter(|&m| orders[m] == orders[lin] && masks[m] != masks[lin])
                .count()
        })
        .sum();

    Ok(InstabilityReport {
        map: plan.map.name(),
        shape: g.shape.dims.clone(),
        eps,
        spacing,
        pieces: plan.pieces.len(),
        masks,
        max_order,
        witness: g.sample(at),
        level_sizes,
        levels_consistent,
        separation_violations,
    })
}
