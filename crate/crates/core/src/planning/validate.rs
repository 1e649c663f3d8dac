//! Grid validation of manipulation plans: coverage, endpoint and target
//! checks, path resolution, and a Lipschitz continuity test between
//! neighbouring samples of the same piece.

use super::grid::PlanGrid;
use super::plan::{ManipulationPlan, PathInC};
use super::{PlanError, PATH_SAMPLES};
use crate::kinematics::{Config, KinematicMap, WorkPoint};
use crate::report::{csv_row, fmt17};
use rayon::prelude::*;
use std::borrow::Cow;
use serde::Serialize;

/// Default continuity modulus, chart units of path per chart unit of input.
pub const CONTINUITY_LIPSCHITZ: f64 = 50.0;
pub const ENDPOINT_TOL: f64 = 1e-9;
pub const TARGET_TOL: f64 = 1e-6;
/// Largest chart step allowed between consecutive path samples.
pub const MAX_PATH_STEP: f64 = 0.2;
const MAX_WITNESSES: usize = 10;
const PATH_CACHE_LIMIT: usize = 30_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Coverage,
    Overlap,
    Path,
    Endpoint,
    Target,
    Step,
    Continuity,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Coverage => "coverage",
            Check::Overlap => "overlap",
            Check::Path => "path",
            Check::Endpoint => "endpoint",
            Check::Target => "target",
            Check::Step => "step",
            Check::Continuity => "continuity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub check: Check,
    pub c: Config,
    pub w: WorkPoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub map: String,
    pub grid: usize,
    pub samples: usize,
    pub claimed_pieces: usize,
    pub pieces: usize,
    pub piece_sizes: Vec<usize>,
    pub uncovered: usize,
    pub overlapping: usize,
    pub path_failures: usize,
    pub endpoint_failures: usize,
    pub target_failures: usize,
    pub step_failures: usize,
    pub continuity_failures: usize,
    pub max_target_error: f64,
    pub max_step: f64,
    pub max_continuity_ratio: f64,
    pub lipschitz: f64,
    pub witnesses: Vec<Witness>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn failures(&self, check: Check) -> usize {
        match check {
            Check::Coverage => self.uncovered,
            Check::Overlap => self.overlapping,
            Check::Path => self.path_failures,
            Check::Endpoint => self.endpoint_failures,
            Check::Target => self.target_failures,
            Check::Step => self.step_failures,
            Check::Continuity => self.continuity_failures,
        }
    }

    /// Summary block followed by one row per witness.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let kv = [
            ("map", self.map.clone()),
            ("grid", self.grid.to_string()),
            ("samples", self.samples.to_string()),
            ("claimed_pieces", self.claimed_pieces.to_string()),
            ("pieces", self.pieces.to_string()),
            ("uncovered", self.uncovered.to_string()),
            ("overlapping", self.overlapping.to_string()),
            ("path_failures", self.path_failures.to_string()),
            ("endpoint_failures", self.endpoint_failures.to_string()),
            ("target_failures", self.target_failures.to_string()),
            ("step_failures", self.step_failures.to_string()),
            ("continuity_failures", self.continuity_failures.to_string()),
            ("max_target_error", fmt17(self.max_target_error)),
            ("max_step", fmt17(self.max_step)),
            ("max_continuity_ratio", fmt17(self.max_continuity_ratio)),
            ("lipschitz", fmt17(self.lipschitz)),
            ("pass", self.pass.to_string()),
        ];
        for (k, v) in kv {
            out.push_str(&csv_row(&[k.to_string(), v]));
        }
        out.push_str("\ncheck,c,w,value\n");
        for wt in &self.witnesses {
            let join = |v: &[f64]| v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(" ");
            out.push_str(&csv_row(&[wt.check.name().to_string(), join(&wt.c), join(&wt.w), fmt17(wt.value)]));
        }
        out
    }
}

#[derive(Default)]
struct SampleOutcome {
    failures: Vec<(Check, f64)>,
    target_error: f64,
    max_step: f64,
    continuity_ratio: f64,
}

fn sup_distance(k: &KinematicMap, a: &PathInC, b: &PathInC) -> f64 {
    a.iter().zip(b).map(|(x, y)| k.config_chart().distance(x, y)).fold(0.0, f64::max)
}

/// Validates `plan` on the product grid with `n` samples per axis, using
/// continuity modulus `lipschitz`.
pub fn validate_plan(plan: &ManipulationPlan, n: usize, lipschitz: f64) -> Result<ValidationReport, PlanError> {
    let k = KinematicMap::from_spec(plan.map.clone())?;
    let g = PlanGrid::new(&k, n)?;
    if g.len() > 10_000_000 {
        return Err(PlanError::InvalidGrid(format!("{} samples exceed the 1e7 limit", g.len())));
    }
    let membership = g.membership(&plan.pieces)?;
    let compute = |lin: usize| -> Result<PathInC, PlanError> {
        let (c, w) = g.sample(lin);
        let i = *membership[lin].first().ok_or_else(|| PlanError::Domain("uncovered".into()))?;
        plan.pieces[i].section.path(&c, &w)
    };
    // cache every path when they fit, otherwise recompute neighbours
    let cache: Option<Vec<Result<PathInC, PlanError>>> =
        (g.len() * PATH_SAMPLES * k.config_chart().dim() <= PATH_CACHE_LIMIT)
            .then(|| (0..g.len()).into_par_iter().map(compute).collect());
    let path_of = |lin: usize| -> Result<Cow<'_, PathInC>, PlanError> {
        match &cache {
            Some(c) => c[lin].as_ref().map(Cow::Borrowed).map_err(Clone::clone),
            None => compute(lin).map(Cow::Owned),
        }
    };

    let outcomes: Vec<SampleOutcome> = (0..g.len())
        .into_par_iter()
        .map(|lin| {
            let mut o = SampleOutcome::default();
            match membership[lin].len() {
                0 => {
                    o.failures.push((Check::Coverage, 0.0));
                    return o;
                }
                1 => {}
                m => o.failures.push((Check::Overlap, m as f64)),
            }
            let (c, w) = g.sample(lin);
            let path = match path_of(lin) {
                Ok(p) => p,
                Err(_) => {
                    o.failures.push((Check::Path, 0.0));
                    return o;
                }
            };
            let start = k.config_chart().distance(&path[0], &c);
            if start > ENDPOINT_TOL {
                o.failures.push((Check::Endpoint, start));
            }
            o.target_error = k.work_chart().distance(&k.forward(path.last().expect("paths are nonempty")), &w);
            if o.target_error.is_nan() || o.target_error > TARGET_TOL {
                o.failures.push((Check::Target, o.target_error));
            }
            o.max_step = path.windows(2).map(|p| k.config_chart().distance(&p[0], &p[1])).fold(0.0, f64::max);
            if o.max_step > MAX_PATH_STEP {
                o.failures.push((Check::Step, o.max_step));
            }
            let mut worst: Option<f64> = None;
            for m in g.shape.forward_neighbors(lin) {
                if membership[m].first() != membership[lin].first() {
                    continue;
                }
                let Ok(other) = path_of(m) else { continue };
                let d_in = g.distance(lin, m);
                let d_out = sup_distance(&k, &path, &other);
                if d_in > ENDPOINT_TOL {
                    o.continuity_ratio = o.continuity_ratio.max(d_out / d_in);
                }
                if d_out > lipschitz * d_in + ENDPOINT_TOL {
                    let r = if d_in > 0.0 { d_out / d_in } else { f64::INFINITY };
                    worst = Some(worst.map_or(r, |w: f64| w.max(r)));
                }
            }
            if let Some(r) = worst {
                o.failures.push((Check::Continuity, r));
            }
            o
        })
        .collect();

    let mut piece_sizes = vec![0; plan.pieces.len()];
    for m in &membership {
        if let Some(&i) = m.first() {
            piece_sizes[i] += 1;
        }
    }
    let mut report = ValidationReport {
        map: plan.map.name(),
        grid: n,
        samples: g.len(),
        claimed_pieces: plan.piece_count,
        pieces: piece_sizes.iter().filter(|&&s| s > 0).count(),
        piece_sizes,
        uncovered: 0,
        overlapping: 0,
        path_failures: 0,
        endpoint_failures: 0,
        target_failures: 0,
        step_failures: 0,
        continuity_failures: 0,
        max_target_error: 0.0,
        max_step: 0.0,
        max_continuity_ratio: 0.0,
        lipschitz,
        witnesses: Vec::new(),
        pass: false,
    };
    let mut per_check = std::collections::HashMap::new();
    for (lin, o) in outcomes.iter().enumerate() {
        report.max_target_error = report.max_target_error.max(o.target_error);
        report.max_step = report.max_step.max(o.max_step);
        report.max_continuity_ratio = report.max_continuity_ratio.max(o.continuity_ratio);
        for &(check, value) in &o.failures {
            let counter = match check {
                Check::Coverage => &mut report.uncovered,
                Check::Overlap => &mut report.overlapping,
                Check::Path => &mut report.path_failures,
                Check::Endpoint => &mut report.endpoint_failures,
                Check::Target => &mut report.target_failures,
                Check::Step => &mut report.step_failures,
                Check::Continuity => &mut report.continuity_failures,
            };
            *counter += 1;
            let seen = per_check.entry(check).or_insert(0usize);
            if *seen < MAX_WITNESSES {
                *seen += 1;
                let (c, w) = g.sample(lin);
                report.witnesses.push(Witness { check, c, w, value });
            }
        }
    }
    report.pass = report.claimed_pieces == plan.pieces.len()
        && [Check::Coverage, Check::Overlap, Check::Path, Check::Endpoint, Check::Target, Check::Step, Check::Continuity]
            .iter()
            .all(|&c| report.failures(c) == 0);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::constructors::*;
    use crate::planning::domain::Domain;

    #[test]
    fn builtins_pass_on_small_grids() {
        for (name, n) in [
            ("identity_interval", 20),
            ("identity_circle", 24),
            ("identity_torus", 8),
            ("planar_rr", 8),
            ("h_fixture", 30),
            ("pointing", 8),
        ] {
            let r = validate_plan(&builtin_plan(name).unwrap(), n, CONTINUITY_LIPSCHITZ).unwrap();
            assert!(r.pass, "{name}: {r:?}");
        }
    }

    #[test]
    fn deleted_domain_is_a_coverage_failure() {
        let mut p = builtin_plan("identity_circle").unwrap();
        p.pieces[1].domain = Domain::empty();
        let r = validate_plan(&p, 24, CONTINUITY_LIPSCHITZ).unwrap();
        assert!(!r.pass && r.uncovered > 0);
        assert!(r.witnesses.iter().any(|w| w.check == Check::Coverage));
    }

    #[test]
    fn swapped_sections_fail_target() {
        let mut p = h_fixture_plan();
        let s0 = p.pieces[0].section.clone();
        p.pieces[0].section = p.pieces[1].section.clone();
        p.pieces[1].section = s0;
        let r = validate_plan(&p, 30, CONTINUITY_LIPSCHITZ).unwrap();
        assert!(!r.pass && r.target_failures > 0);
        assert!(r.witnesses.iter().any(|w| w.check == Check::Target));
    }

    #[test]
    fn wrong_claim_fails() {
        let mut p = builtin_plan("identity_interval").unwrap();
        p.piece_count = 2;
        assert!(!validate_plan(&p, 10, CONTINUITY_LIPSCHITZ).unwrap().pass);
    }

    #[test]
    fn overlap_is_reported() {
        let mut p = builtin_plan("identity_interval").unwrap();
        p.pieces.push(p.pieces[0].clone());
        p.piece_count = 2;
        let r = validate_plan(&p, 10, CONTINUITY_LIPSCHITZ).unwrap();
        assert_eq!(r.overlapping, r.samples);
    }

    #[test]
    fn disjointify_drops_duplicates_and_keeps_validity() {
        let k = KinematicMap::from_spec(crate::MapSpec::IdentityInterval { lo: 0.0, hi: 1.0 }).unwrap();
        let p = builtin_plan("identity_interval").unwrap();
        let two = vec![p.pieces[0].clone(), p.pieces[0].clone()];
        let d = disjointify(p.map.clone(), two, &k, 10).unwrap();
        assert_eq!(d.len(), 1);

        let torus = builtin_plan("identity_torus").unwrap();
        let k = KinematicMap::from_spec(torus.map.clone()).unwrap();
        let d = disjointify(torus.map.clone(), torus.pieces.clone(), &k, 8).unwrap();
        assert_eq!(d.len(), 3);
        assert!(validate_plan(&d, 8, CONTINUITY_LIPSCHITZ).unwrap().pass);
    }

    #[test]
    fn disjointify_reports_gaps() {
        let k = KinematicMap::from_spec(crate::MapSpec::IdentityCircle).unwrap();
        let p = builtin_plan("identity_circle").unwrap();
        let err = disjointify(p.map.clone(), vec![p.pieces[0].clone()], &k, 8).unwrap_err();
        assert!(matches!(err, PlanError::CoverageGap { ref witnesses } if !witnesses.is_empty()));
    }
}
