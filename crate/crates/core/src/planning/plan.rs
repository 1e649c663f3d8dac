//! Manipulation plans: ordered pieces, each a domain on `C × W` and a rule
//! producing a configuration path from `c` to a preimage of `w`.

use super::domain::{Domain, Relation};
use super::sections::Section;
use super::{PlanError, PATH_SAMPLES};
use crate::kinematics::{angle_diff, wrap_pi, wrap_tau, Config, ConfigChart, MapSpec};
use crate::mechanism::ChartFactor;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// A configuration path sampled at [`PATH_SAMPLES`] uniform parameters.
pub type PathInC = Vec<Config>;

fn lerp(a: &[f64], b: &[f64], t: f64) -> Config {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Whether the circle coordinate `d` counts as near (`|d| ≤ π/2`).
pub fn is_near(d: f64) -> bool {
    Relation::Le.holds(wrap_pi(d).abs(), FRAC_PI_2)
}

/// Contraction of a categorical piece of `C` to a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatDeformation {
    /// Straight chart line to `target`; for pieces on which the chart is a
    /// contractible box.
    Straight { target: Config },
    /// Each circle coordinate slides to the nearer of 0 and π, then from π
    /// to 0; interval coordinates slide to their midpoint.
    Corners { chart: ConfigChart },
}

impl CatDeformation {
    /// `H(c, t)` with `H(c, 0) = c` and `H(c, 1) = end()`.
    pub fn at(&self, c: &[f64], t: f64) -> Config {
        match self {
            CatDeformation::Straight { target } => lerp(c, target, t),
            CatDeformation::Corners { chart } => {
                // first third to the corner, the remaining two thirds home
                let split = 1.0 / 3.0;
                chart
                    .factors
                    .iter()
                    .zip(c)
                    .map(|(f, &x)| match *f {
                        ChartFactor::Circle => {
                            let corner = if is_near(x) { 0.0 } else { PI };
                            if t <= split {
                                x + (t / split) * angle_diff(x, corner)
                            } else {
                                corner * (1.0 - (t - split) / (1.0 - split))
                            }
                        }
                        ChartFactor::Interval { lo, hi } => {
                            let mid = 0.5 * (lo + hi);
                            x + (t / split).min(1.0) * (mid - x)
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn end(&self) -> Config {
        match self {
            CatDeformation::Straight { target } => target.clone(),
            CatDeformation::Corners { chart } => chart
                .factors
                .iter()
                .map(|f| match *f {
                    ChartFactor::Circle => 0.0,
                    ChartFactor::Interval { lo, hi } => 0.5 * (lo + hi),
                })
                .collect(),
        }
    }
}

/// A subset of `C` with a contraction to a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatPiece {
    /// Domain read with `on: C` clauses only.
    pub domain: Domain,
    pub deformation: CatDeformation,
}

/// A subset of `W` with a section whose image contracts (along the straight
/// chart line) to `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecPiece {
    /// Domain read with `on: W` clauses only.
    pub domain: Domain,
    pub section: Section,
    pub target: Config,
}

/// How a piece turns `(c, w)` into a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    /// Motion plan for an identity map: per circle factor the shortest arc
    /// when near, the counterclockwise arc when far; straight on
    /// intervals. Only pairs with exactly `far` far factors are accepted.
    Geodesic { chart: ConfigChart, far: usize },
    /// Base recipe from `c` to `s(w)`.
    Pullback { section: Section, base: Box<Recipe> },
    /// Componentwise paths from the matching pieces of two plans; only the
    /// listed piece pairs are accepted.
    Product {
        split_c: usize,
        split_w: usize,
        pairs: Vec<(usize, usize)>,
        left: Box<ManipulationPlan>,
        right: Box<ManipulationPlan>,
    },
    /// `H(c, 3t)`, then the connector `c0 → c1`, then `K(s(w), 3 − 3t)`.
    Thirds { pairs: Vec<(usize, usize)>, cat: Vec<CatPiece>, sec: Vec<SecPiece> },
}

fn sample<F: FnMut(f64) -> Config>(mut f: F) -> PathInC {
    (0..PATH_SAMPLES).map(|i| f(i as f64 / (PATH_SAMPLES - 1) as f64)).collect()
}

fn find_piece(domains: impl Iterator<Item = Result<bool, PlanError>>) -> Result<Option<usize>, PlanError> {
    for (i, d) in domains.enumerate() {
        if d? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

impl Recipe {
    pub fn path(&self, c: &[f64], w: &[f64]) -> Result<PathInC, PlanError> {
        let mut p = match self {
            Recipe::Geodesic { chart, far } => {
                if c.len() != chart.dim() || w.len() != chart.dim() {
                    return Err(PlanError::Domain("coordinate count does not match the chart".into()));
                }
                let mut count = 0;
                let step: Vec<f64> = chart
                    .factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| match f {
                        ChartFactor::Circle => {
                            let d = w[i] - c[i];
                            if is_near(d) {
                                angle_diff(c[i], w[i])
                            } else {
                                count += 1;
                                wrap_tau(d)
                            }
                        }
                        ChartFactor::Interval { .. } => w[i] - c[i],
                    })
                    .collect();
                if count != *far {
                    return Err(PlanError::Domain(format!("pair has {count} far factors, piece takes {far}")));
                }
                sample(|t| c.iter().zip(&step).map(|(x, d)| x + t * d).collect())
            }
            Recipe::Pullback { section, base } => base.path(c, &section.eval(w)?)?,
            Recipe::Product { split_c, split_w, pairs, left, right } => {
                let (cl, cr) = c.split_at(*split_c);
                let (wl, wr) = w.split_at(*split_w);
                let i = find_piece(left.pieces.iter().map(|p| p.domain.contains(cl, wl)))?;
                let j = find_piece(right.pieces.iter().map(|p| p.domain.contains(cr, wr)))?;
                let (Some(i), Some(j)) = (i, j) else {
                    return Err(PlanError::Domain("factor plans do not cover the pair".into()));
                };
                if !pairs.contains(&(i, j)) {
                    return Err(PlanError::Domain(format!("pair lies in factor pieces ({i}, {j})")));
                }
                let pl = left.pieces[i].section.path(cl, wl)?;
                let pr = right.pieces[j].section.path(cr, wr)?;
                pl.into_iter()
                    .zip(pr)
                    .map(|(mut a, b)| {
                        a.extend(b);
                        a
                    })
                    .collect()
            }
            Recipe::Thirds { pairs, cat, sec } => {
                let i = find_piece(cat.iter().map(|p| p.domain.contains(c, w)))?;
                let j = find_piece(sec.iter().map(|p| p.domain.contains(c, w)))?;
                let (Some(i), Some(j)) = (i, j) else {
                    return Err(PlanError::Domain("covers miss the pair".into()));
                };
                if !pairs.contains(&(i, j)) {
                    return Err(PlanError::Domain(format!("pair lies in cover pieces ({i}, {j})")));
                }
                let h = &cat[i].deformation;
                let c0 = h.end();
                let c1 = &sec[j].target;
                let s = sec[j].section.eval(w)?;
                sample(|t| {
                    if t <= 1.0 / 3.0 {
                        h.at(c, 3.0 * t)
                    } else if t <= 2.0 / 3.0 {
                        lerp(&c0, c1, 3.0 * t - 1.0)
                    } else {
                        // K(s, u) = s + u (c1 − s), run backwards
                        lerp(&s, c1, 3.0 - 3.0 * t)
                    }
                })
            }
        };
        // path(0) = c exactly
        p[0] = c.to_vec();
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanPiece {
    pub domain: Domain,
    pub section: Recipe,
}

/// Reference bound on the complexity of the plan's map, with its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBound {
    pub lo: u32,
    pub hi: u32,
    pub citation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationPlan {
    pub map: MapSpec,
    pub pieces: Vec<PlanPiece>,
    /// Claimed number of pieces.
    pub piece_count: usize,
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceBound>,
}

impl ManipulationPlan {
    pub fn new(map: MapSpec, pieces: Vec<PlanPiece>, note: impl Into<String>) -> Self {
        Self { piece_count: pieces.len(), map, pieces, note: note.into(), reference: None }
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Index of the first piece whose domain contains `(c, w)`.
    pub fn piece_of(&self, c: &[f64], w: &[f64]) -> Result<Option<usize>, PlanError> {
        find_piece(self.pieces.iter().map(|p| p.domain.contains(c, w)))
    }

    /// Path from `c` to a preimage of `w` by the piece containing the pair.
    pub fn path(&self, c: &[f64], w: &[f64]) -> Result<PathInC, PlanError> {
        let i = self.piece_of(c, w)?.ok_or_else(|| PlanError::Domain("no piece contains the pair".into()))?;
        self.pieces[i].section.path(c, w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        serde_json::from_str(text).map_err(|e| PlanError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
    }
}
