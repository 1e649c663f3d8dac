//! Closed-form inverse kinematic sections `s: W ⊇ A → C` with `f ∘ s = id`.

use super::PlanError;
use crate::kinematics::{wrap_tau, Config, MapSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Elbow {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointingBranch {
    /// `(asin z, atan2(y, x))`, undefined at the poles.
    Geo,
    /// `(π − asin z, atan2(y, x) + π)`, undefined at the poles.
    GeoFlip,
    /// `(π − asin z, 0)`, valid on the half great circle `y = 0, x ≤ 0`.
    Meridian,
}

/// Azimuth `atan2(y, x)` taken in `[cut, cut + 2π)`.
fn azimuth(y: f64, x: f64, cut: f64) -> f64 {
    cut + wrap_tau(y.atan2(x) - cut)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Identity,
    /// Law-of-cosines inverse of the planar two-link arm.
    PlanarRr { r1: f64, r2: f64, branch: Elbow, cut: f64 },
    Pointing { branch: PointingBranch, cut: f64 },
    /// `s(y) = y` for the `h` fixture.
    HLow,
    /// `s(y) = y + 1` for the `h` fixture.
    HHigh,
    /// `y` up to 1, `y + 1` beyond: a section of `h` with a jump.
    HSwitch,
    /// Sections on the leading `split_w` work coordinates and on the rest.
    Product { split_w: usize, left: Box<Section>, right: Box<Section> },
}

impl Section {
    pub fn eval(&self, w: &[f64]) -> Result<Config, PlanError> {
        match self {
            Section::Identity => Ok(w.to_vec()),
            Section::PlanarRr { r1, r2, branch, cut } => {
                let (x, y) = (w[0], w[1]);
                let rsq = x * x + y * y;
                let cb = ((rsq - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)).clamp(-1.0, 1.0);
                let b = match branch {
                    Elbow::Up => cb.acos(),
                    Elbow::Down => -cb.acos(),
                };
                let a = azimuth(y, x, *cut) - (r2 * b.sin()).atan2(r1 + r2 * b.cos());
                Ok(vec![a, b])
            }
            Section::Pointing { branch, cut } => {
                let (x, y, z) = (w[0], w[1], w[2]);
                let lat = z.clamp(-1.0, 1.0).asin();
                match branch {
                    PointingBranch::Meridian => {
                        if y.abs() > 1e-9 || x > 1e-9 {
                            return Err(PlanError::Domain(format!("({x}, {y}, {z}) is off the back meridian")));
                        }
                        Ok(vec![PI - lat, 0.0])
                    }
                    _ if x.hypot(y) < 1e-12 => Err(PlanError::Domain("pole has no longitude".into())),
                    PointingBranch::Geo => Ok(vec![lat, azimuth(y, x, *cut)]),
                    PointingBranch::GeoFlip => Ok(vec![PI - lat, azimuth(y, x, *cut) + PI]),
                }
            }
            Section::HLow => Ok(vec![w[0]]),
            Section::HHigh => Ok(vec![w[0] + 1.0]),
            Section::HSwitch => Ok(vec![if w[0] <= 1.0 { w[0] } else { w[0] + 1.0 }]),
            Section::Product { split_w, left, right } => {
                let mut c = left.eval(&w[..*split_w])?;
                c.extend(right.eval(&w[*split_w..])?);
                Ok(c)
            }
        }
    }
}

/// Named section branches of the closed-form maps.
pub fn canonical_section(map: &MapSpec, branch: &str) -> Result<Section, PlanError> {
    let unknown = || PlanError::UnknownBranch(format!("{} has no branch `{branch}`", map.name()));
    let rr = |r1: f64, r2: f64| match branch {
        "elbow_up" => Ok(Section::PlanarRr { r1, r2, branch: Elbow::Up, cut: -PI }),
        "elbow_down" => Ok(Section::PlanarRr { r1, r2, branch: Elbow::Down, cut: -PI }),
        _ => Err(unknown()),
    };
    match map {
        MapSpec::PlanarRr { r1, r2 } => rr(*r1, *r2),
        MapSpec::Scara { r1, r2, .. } => Ok(Section::Product {
            split_w: 2,
            left: Box::new(rr(*r1, *r2)?),
            right: Box::new(Section::Identity),
        }),
        MapSpec::Pointing => match branch {
            "geo" => Ok(Section::Pointing { branch: PointingBranch::Geo, cut: -PI }),
            "geo_flip" => Ok(Section::Pointing { branch: PointingBranch::GeoFlip, cut: -PI }),
            "meridian" => Ok(Section::Pointing { branch: PointingBranch::Meridian, cut: -PI }),
            _ => Err(unknown()),
        },
        MapSpec::IdentityCircle | MapSpec::IdentityInterval { .. } | MapSpec::IdentityTorus if branch == "identity" => {
            Ok(Section::Identity)
        }
        MapSpec::HFixture => match branch {
            "low" => Ok(Section::HLow),
            "high" => Ok(Section::HHigh),
            _ => Err(unknown()),
        },
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::canonical_map;
    use crate::grid::product_values;

    #[test]
    fn planar_rr_worked_values() {
        let spec = MapSpec::PlanarRr { r1: 2.0, r2: 1.0 };
        let s = canonical_section(&spec, "elbow_up").unwrap();
        let c = s.eval(&[3.0, 0.0]).unwrap();
        assert!(c[0].abs() < 1e-15 && c[1].abs() < 1e-15);
        let k = canonical_map("planar_rr", &[2.0, 1.0]).unwrap();
        let w = k.forward(&s.eval(&[2.0, 1.0]).unwrap());
        assert!((w[0] - 2.0).abs() < 1e-9 && (w[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pointing_geo_fails_at_poles() {
        let s = canonical_section(&MapSpec::Pointing, "geo").unwrap();
        assert!(matches!(s.eval(&[0.0, 0.0, 1.0]), Err(PlanError::Domain(_))));
        assert!(matches!(s.eval(&[0.0, 0.0, -1.0]), Err(PlanError::Domain(_))));
    }

    #[test]
    fn sections_are_right_inverses_on_grids() {
        let cases = [
            ("planar_rr", "elbow_up"),
            ("planar_rr", "elbow_down"),
            ("scara", "elbow_up"),
            ("pointing", "geo"),
            ("pointing", "geo_flip"),
        ];
        for (name, branch) in cases {
            let k = canonical_map(name, &[]).unwrap();
            let s = canonical_section(k.spec().unwrap(), branch).unwrap();
            let n = if k.work_chart().dim() == 3 { 22 } else { 100 };
            let axes = k.work_chart().grid_axes(n).unwrap();
            for v in product_values(&axes) {
                let w = k.work_chart().grid_point(&v);
                match s.eval(&w) {
                    Ok(c) => assert!(k.work_chart().distance(&k.forward(&c), &w) <= 1e-9, "{name} {branch} {w:?}"),
                    Err(_) => assert!(name == "pointing" && w[2].abs() > 1.0 - 1e-12),
                }
            }
        }
    }

    #[test]
    fn meridian_section() {
        let s = Section::Pointing { branch: PointingBranch::Meridian, cut: 0.0 };
        let k = canonical_map("pointing", &[]).unwrap();
        for z in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let w = [-(1.0f64 - z * z).sqrt(), 0.0, z];
            let c = s.eval(&w).unwrap();
            assert!(k.work_chart().distance(&k.forward(&c), &w) < 1e-12);
        }
        assert!(s.eval(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn h_sections() {
        assert_eq!(Section::HLow.eval(&[0.5]).unwrap(), vec![0.5]);
        assert_eq!(Section::HHigh.eval(&[1.5]).unwrap(), vec![2.5]);
    }
}
