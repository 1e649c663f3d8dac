//! Piece domains over `C × W`: finite unions of conjunctions of
//! chart-coordinate inequalities, plus a few structural combinators.

use super::sections::Section;
use super::PlanError;
use crate::kinematics::wrap_pi;
use serde::{Deserialize, Serialize};

/// Slack applied to every bound so that a clause and its complement split
/// the line exactly, and grid samples sitting on a bound up to rounding
/// fall on the closed side.
pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    /// `≤` and `>` are complements, as are `<` and `≥`.
    pub fn holds(self, x: f64, bound: f64) -> bool {
        match self {
            Relation::Le => x <= bound + SLACK,
            Relation::Gt => x > bound + SLACK,
            Relation::Lt => x < bound - SLACK,
            Relation::Ge => x >= bound - SLACK,
        }
    }

    pub fn complement(self) -> Relation {
        match self {
            Relation::Le => Relation::Gt,
            Relation::Gt => Relation::Le,
            Relation::Lt => Relation::Ge,
            Relation::Ge => Relation::Lt,
        }
    }
}

/// Which coordinate a clause reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// `c[i]`
    C,
    /// `w[i]`
    W,
    /// `|wrap(w[i] − c[i])|`, the circle distance between matching coordinates.
    CW,
    /// `|wrap(c[i])|`, the circle distance of `c[i]` from 0.
    CA,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub coord: usize,
    pub relation: Relation,
    pub bound: f64,
    pub on: Space,
}

impl Clause {
    pub fn new(on: Space, coord: usize, relation: Relation, bound: f64) -> Self {
        Self { coord, relation, bound, on }
    }

    pub fn value(&self, c: &[f64], w: &[f64]) -> Result<f64, PlanError> {
        let get = |v: &[f64], what: &str| {
            v.get(self.coord)
                .copied()
                .ok_or_else(|| PlanError::Domain(format!("clause reads {what}[{}] of a {}-vector", self.coord, v.len())))
        };
        Ok(match self.on {
            Space::C => get(c, "c")?,
            Space::W => get(w, "w")?,
            Space::CW => wrap_pi(get(w, "w")? - get(c, "c")?).abs(),
            Space::CA => wrap_pi(get(c, "c")?).abs(),
        })
    }

    pub fn holds(&self, c: &[f64], w: &[f64]) -> Result<bool, PlanError> {
        Ok(self.relation.holds(self.value(c, w)?, self.bound))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    All,
    /// Disjunction of conjunctions; an empty list is the empty set.
    Clauses(Vec<Vec<Clause>>),
    /// `{(c, w) : (c, s(w)) ∈ inner}`.
    Pullback { section: Section, inner: Box<Domain> },
    /// Product of a domain on the leading coordinates with one on the rest.
    Product { split_c: usize, split_w: usize, left: Box<Domain>, right: Box<Domain> },
    Intersection(Vec<Domain>),
    Union(Vec<Domain>),
    Difference { base: Box<Domain>, minus: Vec<Domain> },
}

impl Domain {
    pub fn conj(clauses: Vec<Clause>) -> Domain {
        Domain::Clauses(vec![clauses])
    }

    pub fn empty() -> Domain {
        Domain::Clauses(Vec::new())
    }

    pub fn contains(&self, c: &[f64], w: &[f64]) -> Result<bool, PlanError> {
        match self {
            Domain::All => Ok(true),
            Domain::Clauses(dnf) => {
                for conj in dnf {
                    let mut all = true;
                    for cl in conj {
                        if !cl.holds(c, w)? {
                            all = false;
                            break;
                        }
                    }
                    if all {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Domain::Pullback { section, inner } => inner.contains(c, &section.eval(w)?),
            Domain::Product { split_c, split_w, left, right } => {
                if *split_c > c.len() || *split_w > w.len() {
                    return Err(PlanError::Domain("product split beyond coordinates".into()));
                }
                Ok(left.contains(&c[..*split_c], &w[..*split_w])? && right.contains(&c[*split_c..], &w[*split_w..])?)
            }
            Domain::Intersection(parts) => {
                for p in parts {
                    if !p.contains(c, w)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Domain::Union(parts) => {
                for p in parts {
                    if p.contains(c, w)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Domain::Difference { base, minus } => {
                if !base.contains(c, w)? {
                    return Ok(false);
                }
                for m in minus {
                    if m.contains(c, w)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn complements_split_exactly() {
        for x in [-1.0, 0.0, 1e-13, 1e-12, 2e-12, 0.5] {
            for r in [Relation::Le, Relation::Lt] {
                assert_ne!(r.holds(x, 0.0), r.complement().holds(x, 0.0), "{x} {r:?}");
            }
        }
    }

    #[test]
    fn cw_uses_circle_distance() {
        let near = Clause::new(Space::CW, 0, Relation::Le, FRAC_PI_2);
        assert!(near.holds(&[0.1], &[2.0 * PI - 0.1]).unwrap());
        assert!(!near.holds(&[0.0], &[PI]).unwrap());
        // a sample exactly on the bound up to rounding is on the closed side
        assert!(near.holds(&[0.0], &[2.0 * PI * 0.25]).unwrap());
    }

    #[test]
    fn combinators() {
        let left = Domain::conj(vec![Clause::new(Space::C, 0, Relation::Le, 0.0)]);
        let right = Domain::conj(vec![Clause::new(Space::W, 0, Relation::Gt, 0.0)]);
        let both = Domain::Product { split_c: 1, split_w: 1, left: Box::new(left.clone()), right: Box::new(right.clone()) };
        assert!(both.contains(&[-1.0, 9.0], &[5.0, 1.0]).unwrap());
        assert!(!both.contains(&[1.0, 9.0], &[5.0, 1.0]).unwrap());
        let diff = Domain::Difference { base: Box::new(Domain::All), minus: vec![left.clone()] };
        assert!(diff.contains(&[1.0], &[0.0]).unwrap());
        assert!(!diff.contains(&[-1.0], &[0.0]).unwrap());
        assert!(!Domain::empty().contains(&[0.0], &[0.0]).unwrap());
        assert!(Domain::Union(vec![left, right]).contains(&[1.0], &[1.0]).unwrap());
    }

    #[test]
    fn out_of_range_coordinate_is_an_error() {
        let d = Domain::conj(vec![Clause::new(Space::W, 3, Relation::Le, 0.0)]);
        assert!(d.contains(&[0.0], &[0.0]).is_err());
    }

    #[test]
    fn serde_shape() {
        let cl = Clause::new(Space::W, 1, Relation::Ge, 0.0);
        let s = serde_json::to_string(&cl).unwrap();
        assert_eq!(s, r#"{"coord":1,"relation":">=","bound":0.0,"on":"W"}"#);
    }
}
