//! Plan constructors: identity motion plans, pullbacks along global
//! sections, products, the thirds combination of a categorical cover of `C`
//! with a sectional cover of `W`, and disjointification.

use super::domain::{Clause, Domain, Relation, Space};
use super::grid::PlanGrid;
use super::known::reference_for;
use super::plan::{CatDeformation, CatPiece, ManipulationPlan, PlanPiece, Recipe, SecPiece};
use super::sections::{canonical_section, Elbow, PointingBranch, Section};
use super::PlanError;
use crate::kinematics::{ConfigChart, KinematicMap, MapSpec};
use crate::mechanism::ChartFactor;
use std::f64::consts::{FRAC_PI_2, PI};

fn circle_indices(chart: &ConfigChart) -> Vec<usize> {
    (0..chart.dim()).filter(|&i| chart.factors[i] == ChartFactor::Circle).collect()
}

/// All subsets of `items` of size `k`, in lexicographic order.
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out: Vec<Vec<usize>> =
        subsets(&items[1..], k - 1).into_iter().map(|mut s| {
            s.insert(0, items[0]);
            s
        }).collect();
    out.extend(subsets(&items[1..], k));
    out
}

/// Domain of samples with exactly `far` far circle coordinates, reading
/// clauses of kind `on` (`CW` for pairs, `CA` for single configurations).
fn far_count_domain(circles: &[usize], far: usize, on: Space) -> Domain {
    if circles.is_empty() {
        return Domain::All;
    }
    let dnf = subsets(circles, far)
        .into_iter()
        .map(|s| {
            circles
                .iter()
                .map(|&i| {
                    let rel = if s.contains(&i) { Relation::Gt } else { Relation::Le };
                    Clause::new(on, i, rel, FRAC_PI_2)
                })
                .collect()
        })
        .collect();
    Domain::Clauses(dnf)
}

/// Motion plan for the identity map of `chart`: piece `k` holds the pairs
/// with exactly `k` circle factors more than a quarter turn apart.
pub fn geodesic_plan(map: MapSpec, chart: &ConfigChart) -> ManipulationPlan {
    let circles = circle_indices(chart);
    let pieces = (0..=circles.len())
        .map(|k| PlanPiece {
            domain: far_count_domain(&circles, k, Space::CW),
            section: Recipe::Geodesic { chart: chart.clone(), far: k },
        })
        .collect();
    ManipulationPlan::new(map, pieces, format!("factorwise geodesic plan on {}", chart.describe()))
}

pub fn identity_plan(map: MapSpec) -> ManipulationPlan {
    let chart = map.config_chart();
    geodesic_plan(map, &chart)
}

/// Pieces `{(c, w) : (c, s(w)) ∈ D_i}` with paths from `c` to `s(w)` by the
/// base plan on `C`. The section must be defined on all of `W`; this is
/// checked on a work grid of `check_grid` samples per axis.
pub fn pullback_plan(
    map: MapSpec,
    section: Section,
    base: &ManipulationPlan,
    check_grid: usize,
) -> Result<ManipulationPlan, PlanError> {
    if let Some(axes) = map.work_chart().grid_axes(check_grid) {
        for v in crate::grid::product_values(&axes) {
            let w = map.work_chart().grid_point(&v);
            section.eval(&w).map_err(|e| PlanError::Precondition(format!("section is partial: {e}")))?;
        }
    }
    let pieces = base
        .pieces
        .iter()
        .map(|p| PlanPiece {
            domain: Domain::Pullback { section: section.clone(), inner: Box::new(p.domain.clone()) },
            section: Recipe::Pullback { section: section.clone(), base: Box::new(p.section.clone()) },
        })
        .collect();
    Ok(ManipulationPlan::new(map, pieces, format!("pullback of {} pieces along a global section", base.len())))
}

/// Plan for `f × g` with pieces `P_k = ∪_{i+j=k} F_i × G_j`.
pub fn product_plan(f: &ManipulationPlan, g: &ManipulationPlan) -> ManipulationPlan {
    let split_c = f.map.config_chart().dim();
    let split_w = f.map.work_chart().ambient_dim();
    let n = f.len() + g.len() - 1;
    let pieces = (0..n)
        .map(|k| {
            let pairs: Vec<(usize, usize)> =
                (0..f.len()).filter(|&i| k >= i && k - i < g.len()).map(|i| (i, k - i)).collect();
            let domain = Domain::Union(
                pairs
                    .iter()
                    .map(|&(i, j)| Domain::Product {
                        split_c,
                        split_w,
                        left: Box::new(f.pieces[i].domain.clone()),
                        right: Box::new(g.pieces[j].domain.clone()),
                    })
                    .collect(),
            );
            let section = Recipe::Product {
                split_c,
                split_w,
                pairs,
                left: Box::new(f.clone()),
                right: Box::new(g.clone()),
            };
            PlanPiece { domain, section }
        })
        .collect();
    let map = MapSpec::Product { left: Box::new(f.map.clone()), right: Box::new(g.map.clone()) };
    ManipulationPlan::new(map, pieces, format!("product of {}- and {}-piece plans", f.len(), g.len()))
}

/// Categorical cover of a product of circles and intervals: piece `k`
/// holds the configurations with exactly `k` circle coordinates farther
/// than a quarter turn from 0.
pub fn torus_cat_cover(chart: &ConfigChart) -> Vec<CatPiece> {
    let circles = circle_indices(chart);
    (0..=circles.len())
        .map(|k| CatPiece {
            domain: far_count_domain(&circles, k, Space::CA),
            deformation: CatDeformation::Corners { chart: chart.clone() },
        })
        .collect()
}

/// Plan with pieces `Q_k = ∪_{i+j=k} C_i × A_j` and thirds-formula paths.
/// Both covers must be listed in filtration order, closed stage first.
pub fn combine_csec_cat(map: MapSpec, cat: Vec<CatPiece>, sec: Vec<SecPiece>) -> Result<ManipulationPlan, PlanError> {
    if cat.is_empty() || sec.is_empty() {
        return Err(PlanError::Precondition("both covers need at least one piece".into()));
    }
    let dim = map.config_chart().dim();
    if cat.iter().any(|p| p.deformation.end().len() != dim) || sec.iter().any(|p| p.target.len() != dim) {
        return Err(PlanError::Precondition(format!("deformation endpoints must have {dim} coordinates")));
    }
    let n = cat.len() + sec.len() - 1;
    let pieces = (0..n)
        .map(|k| {
            let pairs: Vec<(usize, usize)> =
                (0..cat.len()).filter(|&i| k >= i && k - i < sec.len()).map(|i| (i, k - i)).collect();
            let domain = Domain::Union(
                pairs
                    .iter()
                    .map(|&(i, j)| Domain::Intersection(vec![cat[i].domain.clone(), sec[j].domain.clone()]))
                    .collect(),
            );
            PlanPiece { domain, section: Recipe::Thirds { pairs, cat: cat.clone(), sec: sec.clone() } }
        })
        .collect();
    let note = format!("thirds combination of a {}-piece categorical cover and a {}-piece sectional cover", cat.len(), sec.len());
    Ok(ManipulationPlan::new(map, pieces, note))
}

/// Half-annulus sectional cover of the planar arm: `y ≥ 0` then `y < 0`.
pub fn planar_rr_sec_cover(r1: f64, r2: f64) -> Vec<SecPiece> {
    let upper = Domain::conj(vec![Clause::new(Space::W, 1, Relation::Ge, 0.0)]);
    let lower = Domain::conj(vec![Clause::new(Space::W, 1, Relation::Lt, 0.0)]);
    vec![
        SecPiece { domain: upper, section: Section::PlanarRr { r1, r2, branch: Elbow::Up, cut: -FRAC_PI_2 }, target: vec![0.0, 0.0] },
        SecPiece { domain: lower, section: Section::PlanarRr { r1, r2, branch: Elbow::Up, cut: -PI }, target: vec![0.0, 0.0] },
    ]
}

/// Sectional cover of the sphere: the closed back half-meridian
/// `{y = 0, x ≤ 0}` (poles included), then its complement, optionally split
/// into `z ≤ 0` and `z > 0`.
pub fn pointing_sec_cover(split_hemispheres: bool) -> Vec<SecPiece> {
    let arc = vec![
        Clause::new(Space::W, 1, Relation::Le, 0.0),
        Clause::new(Space::W, 1, Relation::Ge, 0.0),
        Clause::new(Space::W, 0, Relation::Le, 0.0),
    ];
    let rest: Vec<Vec<Clause>> = arc.iter().map(|c| vec![Clause { relation: c.relation.complement(), ..*c }]).collect();
    let geo = Section::Pointing { branch: PointingBranch::Geo, cut: -PI };
    let mut cover = vec![SecPiece {
        domain: Domain::conj(arc),
        section: Section::Pointing { branch: PointingBranch::Meridian, cut: -PI },
        target: vec![PI, 0.0],
    }];
    if split_hemispheres {
        for rel in [Relation::Le, Relation::Gt] {
            let dnf = rest
                .iter()
                .map(|conj| {
                    let mut c = conj.clone();
                    c.push(Clause::new(Space::W, 2, rel, 0.0));
                    c
                })
                .collect();
            cover.push(SecPiece { domain: Domain::Clauses(dnf), section: geo.clone(), target: vec![0.0, 0.0] });
        }
    } else {
        cover.push(SecPiece { domain: Domain::Clauses(rest), section: geo, target: vec![0.0, 0.0] });
    }
    cover
}

/// Two-piece plan for `h`: `w ≤ 1` with `s(y) = y`, `w > 1` with `s(y) = y + 1`.
pub fn h_fixture_plan() -> ManipulationPlan {
    let base = Recipe::Geodesic { chart: ConfigChart::interval(0.0, 3.0), far: 0 };
    let piece = |rel, section: Section| PlanPiece {
        domain: Domain::conj(vec![Clause::new(Space::W, 0, rel, 1.0)]),
        section: Recipe::Pullback { section, base: Box::new(base.clone()) },
    };
    ManipulationPlan::new(
        MapSpec::HFixture,
        vec![piece(Relation::Le, Section::HLow), piece(Relation::Gt, Section::HHigh)],
        "closed filtration [0,1] then (1,2]",
    )
}

/// Turns an overlapping cover into a partition, `Q'_i = Q_i − ∪_{j<i} Q_j`,
/// dropping pieces left empty on the grid.
pub fn disjointify(
    map: MapSpec,
    pieces: Vec<PlanPiece>,
    k: &KinematicMap,
    grid: usize,
) -> Result<ManipulationPlan, PlanError> {
    let g = PlanGrid::new(k, grid)?;
    let candidates: Vec<PlanPiece> = pieces
        .iter()
        .enumerate()
        .map(|(i, p)| PlanPiece {
            domain: if i == 0 {
                p.domain.clone()
            } else {
                Domain::Difference {
                    base: Box::new(p.domain.clone()),
                    minus: pieces[..i].iter().map(|q| q.domain.clone()).collect(),
                }
            },
            section: p.section.clone(),
        })
        .collect();
    let membership = g.membership(&candidates)?;
    let mut used = vec![false; candidates.len()];
    let mut gaps = Vec::new();
    for (lin, m) in membership.iter().enumerate() {
        match m.first() {
            Some(&i) => used[i] = true,
            None => {
                if gaps.len() < 10 {
                    gaps.push(g.sample(lin));
                }
            }
        }
    }
    if !gaps.is_empty() {
        return Err(PlanError::CoverageGap { witnesses: gaps });
    }
    let kept: Vec<PlanPiece> = candidates.into_iter().zip(used).filter(|(_, u)| *u).map(|(p, _)| p).collect();
    let n = kept.len();
    Ok(ManipulationPlan::new(map, kept, format!("disjointified cover with {n} nonempty pieces")))
}

pub const BUILTIN_NAMES: [&str; 7] =
    ["identity_interval", "identity_circle", "identity_torus", "planar_rr", "scara", "pointing", "h_fixture"];

/// Built-in plan for a closed-form map with default parameters.
pub fn builtin_plan(name: &str) -> Result<ManipulationPlan, PlanError> {
    let spec = MapSpec::by_name(name, &[]).map_err(|_| PlanError::UnknownBuiltin(name.to_string()))?;
    builtin_plan_for(&spec)
}

pub fn builtin_plan_for(spec: &MapSpec) -> Result<ManipulationPlan, PlanError> {
    let mut plan = match spec {
        MapSpec::IdentityInterval { .. } | MapSpec::IdentityCircle => identity_plan(spec.clone()),
        MapSpec::IdentityTorus => {
            let circle = identity_plan(MapSpec::IdentityCircle);
            ManipulationPlan { map: spec.clone(), ..product_plan(&circle, &circle) }
        }
        MapSpec::PlanarRr { .. } => {
            let base = geodesic_plan(MapSpec::IdentityTorus, &ConfigChart::circles(2));
            pullback_plan(spec.clone(), canonical_section(spec, "elbow_up")?, &base, 16)?
        }
        MapSpec::Scara { r1, r2, h_lo, h_hi } => {
            let rr = builtin_plan_for(&MapSpec::PlanarRr { r1: *r1, r2: *r2 })?;
            let lift = identity_plan(MapSpec::IdentityInterval { lo: *h_lo, hi: *h_hi });
            ManipulationPlan { map: spec.clone(), ..product_plan(&rr, &lift) }
        }
        MapSpec::Pointing => {
            combine_csec_cat(spec.clone(), torus_cat_cover(&ConfigChart::circles(2)), pointing_sec_cover(false))?
        }
        MapSpec::HFixture => h_fixture_plan(),
        MapSpec::Product { .. } => return Err(PlanError::UnknownBuiltin(spec.name())),
    };
    plan.reference = reference_for(&spec.name());
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(&[0, 1, 2], 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(&[0, 1], 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn builtin_counts() {
        let expect =
            [("identity_interval", 1), ("identity_circle", 2), ("identity_torus", 3), ("planar_rr", 3), ("scara", 3), ("h_fixture", 2)];
        for (name, n) in expect {
            let p = builtin_plan(name).unwrap();
            assert_eq!(p.len(), n, "{name}");
            assert_eq!(p.piece_count, n);
        }
        assert!(builtin_plan("pointing").unwrap().len() <= 5);
        assert!(matches!(builtin_plan("delta"), Err(PlanError::UnknownBuiltin(_))));
    }

    #[test]
    fn count_laws() {
        let c = identity_plan(MapSpec::IdentityCircle);
        let i = identity_plan(MapSpec::IdentityInterval { lo: 0.0, hi: 1.0 });
        assert_eq!(product_plan(&c, &c).len(), 3);
        assert_eq!(product_plan(&i, &i).len(), 1);
        let cat = torus_cat_cover(&ConfigChart::circles(2));
        for split in [false, true] {
            let sec = pointing_sec_cover(split);
            let (nc, ns) = (cat.len(), sec.len());
            assert_eq!(combine_csec_cat(MapSpec::Pointing, cat.clone(), sec).unwrap().len(), nc + ns - 1);
        }
    }

    #[test]
    fn path_starts_exactly_at_c() {
        let p = builtin_plan("pointing").unwrap();
        let c = [0.1 + 1e-17, 5.0];
        let w = [0.0, 0.6f64.sqrt(), 0.4f64.sqrt()];
        let path = p.path(&c, &w).unwrap();
        assert_eq!(path[0], c.to_vec());
        assert_eq!(path.len(), crate::planning::PATH_SAMPLES);
    }

    #[test]
    fn json_round_trip() {
        for name in BUILTIN_NAMES {
            let p = builtin_plan(name).unwrap();
            assert_eq!(ManipulationPlan::from_json(&p.to_json()).unwrap(), p, "{name}");
        }
    }

    #[test]
    fn partial_section_rejected_for_pullback() {
        let base = identity_plan(MapSpec::IdentityTorus);
        let geo = Section::Pointing { branch: PointingBranch::Geo, cut: -PI };
        assert!(matches!(pullback_plan(MapSpec::Pointing, geo, &base, 8), Err(PlanError::Precondition(_))));
    }
}
