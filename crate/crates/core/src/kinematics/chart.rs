//! Configuration-space and workspace charts with their metrics and grids.

use crate::mechanism::ChartFactor;
use crate::pose::Rotation;
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Joint-variable values matched to a [`ConfigChart`]. Circle coordinates
/// may be unwrapped; they are compared modulo 2π.
pub type Config = Vec<f64>;

/// A point of a [`WorkChart`] in its ambient embedding coordinates.
pub type WorkPoint = Vec<f64>;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_tau(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let r = wrap_tau(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Signed shortest displacement from `a` to `b` on the circle, in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_pi(b - a)
}

/// One axis of a sampling grid: the sampled coordinate values and whether
/// the first and last samples are neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub values: Vec<f64>,
    pub cyclic: bool,
}

impl GridAxis {
    fn circle(n: usize) -> Self {
        Self { values: (0..n).map(|k| TAU * k as f64 / n as f64).collect(), cyclic: true }
    }

    fn closed(lo: f64, hi: f64, n: usize) -> Self {
        let values = if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        };
        Self { values, cyclic: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigChart {
    pub factors: Vec<ChartFactor>,
}

impl ConfigChart {
    pub fn new(factors: Vec<ChartFactor>) -> Self {
        Self { factors }
    }

    pub fn circles(n: usize) -> Self {
        Self::new(vec![ChartFactor::Circle; n])
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::new(vec![ChartFactor::Interval { lo, hi }])
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn concat(&self, other: &ConfigChart) -> ConfigChart {
        ConfigChart::new(self.factors.iter().chain(&other.factors).copied().collect())
    }

    /// Per-factor distance: quotient metric on circles, absolute difference on intervals.
    pub fn factor_distance(&self, i: usize, a: f64, b: f64) -> f64 {
        match self.factors[i] {
            ChartFactor::Circle => angle_diff(a, b).abs(),
            ChartFactor::Interval { .. } => (a - b).abs(),
        }
    }

    /// Euclidean combination of the factor distances.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..self.dim()).map(|i| self.factor_distance(i, a[i], b[i]).powi(2)).sum::<f64>().sqrt()
    }

    /// Displacement `b − a`, shortest representative on circle factors.
    pub fn difference(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| match f {
                ChartFactor::Circle => angle_diff(a[i], b[i]),
                ChartFactor::Interval { .. } => b[i] - a[i],
            })
            .collect()
    }

    /// Circle coordinates reduced to `[0, 2π)`.
    pub fn wrap(&self, c: &[f64]) -> Config {
        self.factors
            .iter()
            .zip(c)
            .map(|(f, &v)| if *f == ChartFactor::Circle { wrap_tau(v) } else { v })
            .collect()
    }

    pub fn contains(&self, c: &[f64], tol: f64) -> bool {
        c.len() == self.dim()
            && self.factors.iter().zip(c).all(|(f, &v)| match f {
                ChartFactor::Circle => v.is_finite(),
                ChartFactor::Interval { lo, hi } => v >= lo - tol && v <= hi + tol,
            })
    }

    /// Validation grid: `n` samples per circle, `n` closed-interval samples per interval.
    pub fn grid_axes(&self, n: usize) -> Vec<GridAxis> {
        self.factors
            .iter()
            .map(|f| match f {
                ChartFactor::Circle => GridAxis::circle(n),
                ChartFactor::Interval { lo, hi } => GridAxis::closed(*lo, *hi, n),
            })
            .collect()
    }

    /// Centres of an `n`-per-axis cell decomposition.
    pub fn cell_centers(&self, n: usize) -> Vec<Vec<f64>> {
        self.factors
            .iter()
            .map(|f| {
                let (lo, hi) = match f {
                    ChartFactor::Circle => (0.0, TAU),
                    ChartFactor::Interval { lo, hi } => (*lo, *hi),
                };
                (0..n).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64).collect()
            })
            .collect()
    }

    pub fn is_circle(&self, i: usize) -> bool {
        self.factors[i] == ChartFactor::Circle
    }

    pub fn describe(&self) -> String {
        self.factors
            .iter()
            .map(|f| match f {
                ChartFactor::Circle => "S1".to_string(),
                ChartFactor::Interval { lo, hi } => format!("I[{lo},{hi}]"),
            })
            .collect::<Vec<_>>()
            .join("x")
    }
}

/// Workspace models. Points are stored in ambient coordinates: the plane
/// and annulus as `(x, y)`, space, sphere and cylinder as `(x, y, z)`,
/// rotations as 9 row-major entries, rigid motions as 9 rotation entries
/// followed by the translation, and chart-like spaces by chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WorkChart {
    Plane,
    Space,
    Sphere,
    Annulus { r_min: f64, r_max: f64 },
    Cylinder { r_min: f64, r_max: f64, h_lo: f64, h_hi: f64 },
    Rotation,
    RigidMotion,
    /// A product of circles and intervals, used by identity maps and fixtures.
    Chart(ConfigChart),
    Product(Vec<WorkChart>),
}

fn rotation_of(p: &[f64]) -> Rotation {
    Rotation::from_matrix(&Matrix3::from_row_slice(&p[..9]))
}

impl WorkChart {
    /// Length of a point vector.
    pub fn ambient_dim(&self) -> usize {
        match self {
            WorkChart::Plane | WorkChart::Annulus { .. } => 2,
            WorkChart::Space | WorkChart::Sphere | WorkChart::Cylinder { .. } => 3,
            WorkChart::Rotation => 9,
            WorkChart::RigidMotion => 12,
            WorkChart::Chart(c) => c.dim(),
            WorkChart::Product(parts) => parts.iter().map(|p| p.ambient_dim()).sum(),
        }
    }

    /// Manifold dimension.
    pub fn dim(&self) -> usize {
        match self {
            WorkChart::Plane | WorkChart::Annulus { .. } | WorkChart::Sphere => 2,
            WorkChart::Space | WorkChart::Cylinder { .. } | WorkChart::Rotation => 3,
            WorkChart::RigidMotion => 6,
            WorkChart::Chart(c) => c.dim(),
            WorkChart::Product(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    /// Rows of a Jacobian into this chart: ambient velocity for embedded
    /// models, angular (and linear) velocity for SO(3) and SE(3).
    pub fn tangent_rows(&self) -> usize {
        match self {
            WorkChart::Rotation => 3,
            WorkChart::RigidMotion => 6,
            WorkChart::Product(parts) => parts.iter().map(|p| p.tangent_rows()).sum(),
            other => other.ambient_dim(),
        }
    }

    fn split<'a>(&self, parts: &[WorkChart], p: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out = Vec::with_capacity(parts.len());
        let mut off = 0;
        for part in parts {
            let n = part.ambient_dim();
            out.push(&p[off..off + n]);
            off += n;
        }
        out
    }

    /// Intrinsic distance: Euclidean on flat models, great-circle on the
    /// sphere, rotation angle on SO(3), and `sqrt(|Δt|² + angle²)` on SE(3).
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            WorkChart::Plane | WorkChart::Space | WorkChart::Annulus { .. } | WorkChart::Cylinder { .. } => {
                a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
            }
            WorkChart::Sphere => {
                let u = Vector3::new(a[0], a[1], a[2]);
                let v = Vector3::new(b[0], b[1], b[2]);
                u.cross(&v).norm().atan2(u.dot(&v))
            }
            WorkChart::Rotation => rotation_of(a).angle_to(&rotation_of(b)),
            WorkChart::RigidMotion => {
                let ang = rotation_of(a).angle_to(&rotation_of(b));
                let dt: f64 = (9..12).map(|i| (a[i] - b[i]).powi(2)).sum();
                (dt + ang * ang).sqrt()
            }
            WorkChart::Chart(c) => c.distance(a, b),
            WorkChart::Product(parts) => {
                let pa = self.split(parts, a);
                let pb = self.split(parts, b);
                parts.iter().enumerate().map(|(i, p)| p.distance(pa[i], pb[i]).powi(2)).sum::<f64>().sqrt()
            }
        }
    }

    /// Error vector pointing from `current` to `target` in tangent coordinates.
    pub fn error_vector(&self, current: &[f64], target: &[f64]) -> Vec<f64> {
        match self {
            WorkChart::Rotation => rotation_error(current, target).as_slice().to_vec(),
            WorkChart::RigidMotion => {
                let mut e: Vec<f64> = (9..12).map(|i| target[i] - current[i]).collect();
                e.extend(rotation_error(current, target).iter());
                e
            }
            WorkChart::Chart(c) => c.difference(current, target),
            WorkChart::Product(parts) => {
                let pc = self.split(parts, current);
                let pt = self.split(parts, target);
                parts.iter().enumerate().flat_map(|(i, p)| p.error_vector(pc[i], pt[i])).collect()
            }
            _ => target.iter().zip(current).map(|(t, c)| t - c).collect(),
        }
    }

    /// Whether `w` satisfies the model constraints within `tol`.
    pub fn contains(&self, w: &[f64], tol: f64) -> bool {
        if w.len() != self.ambient_dim() {
            return false;
        }
        let radius = |w: &[f64]| (w[0] * w[0] + w[1] * w[1]).sqrt();
        match self {
            WorkChart::Plane | WorkChart::Space => w.iter().all(|v| v.is_finite()),
            WorkChart::Sphere => ((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt() - 1.0).abs() <= tol,
            WorkChart::Annulus { r_min, r_max } => {
                let r = radius(w);
                r >= r_min - tol && r <= r_max + tol
            }
            WorkChart::Cylinder { r_min, r_max, h_lo, h_hi } => {
                let r = radius(w);
                r >= r_min - tol && r <= r_max + tol && w[2] >= h_lo - tol && w[2] <= h_hi + tol
            }
            WorkChart::Rotation | WorkChart::RigidMotion => {
                let m = Matrix3::from_row_slice(&w[..9]);
                (m.transpose() * m - Matrix3::identity()).amax() <= tol && (m.determinant() - 1.0).abs() <= tol
            }
            WorkChart::Chart(c) => c.contains(w, tol),
            WorkChart::Product(parts) => {
                let ps = self.split(parts, w);
                parts.iter().zip(ps).all(|(p, x)| p.contains(x, tol))
            }
        }
    }

    /// Grid axes for validation sampling, `None` for unbounded or
    /// group-valued models.
    pub fn grid_axes(&self, n: usize) -> Option<Vec<GridAxis>> {
        match self {
            WorkChart::Annulus { r_min, r_max } => Some(vec![GridAxis::circle(n), GridAxis::closed(*r_min, *r_max, n)]),
            WorkChart::Sphere => Some(vec![GridAxis::closed(-PI / 2.0, PI / 2.0, n), GridAxis::circle(n)]),
            WorkChart::Cylinder { r_min, r_max, h_lo, h_hi } => Some(vec![
                GridAxis::circle(n),
                GridAxis::closed(*r_min, *r_max, n),
                GridAxis::closed(*h_lo, *h_hi, n),
            ]),
            WorkChart::Chart(c) => Some(c.grid_axes(n)),
            WorkChart::Product(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.grid_axes(n)?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Maps grid-axis values (as produced by [`grid_axes`](Self::grid_axes)) to a point.
    pub fn grid_point(&self, v: &[f64]) -> WorkPoint {
        match self {
            WorkChart::Annulus { .. } => vec![v[1] * v[0].cos(), v[1] * v[0].sin()],
            WorkChart::Sphere => vec![v[0].cos() * v[1].cos(), v[0].cos() * v[1].sin(), v[0].sin()],
            WorkChart::Cylinder { .. } => vec![v[1] * v[0].cos(), v[1] * v[0].sin(), v[2]],
            WorkChart::Product(parts) => {
                let mut out = Vec::new();
                let mut off = 0;
                for p in parts {
                    let k = p.grid_axes(1).map(|a| a.len()).unwrap_or(0);
                    out.extend(p.grid_point(&v[off..off + k]));
                    off += k;
                }
                out
            }
            _ => v.to_vec(),
        }
    }

    /// Normalizes a nearby ambient vector onto the model (sphere only).
    pub fn project(&self, w: &mut [f64]) {
        if let WorkChart::Sphere = self {
            let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            if n > 0.0 {
                w.iter_mut().for_each(|x| *x /= n);
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WorkChart::Plane => "R2".into(),
            WorkChart::Space => "R3".into(),
            WorkChart::Sphere => "S2".into(),
            WorkChart::Annulus { r_min, r_max } => format!("S1x[{r_min},{r_max}]"),
            WorkChart::Cylinder { r_min, r_max, h_lo, h_hi } => format!("S1x[{r_min},{r_max}]x[{h_lo},{h_hi}]"),
            WorkChart::Rotation => "SO3".into(),
            WorkChart::RigidMotion => "SE3".into(),
            WorkChart::Chart(c) => c.describe(),
            WorkChart::Product(parts) => parts.iter().map(|p| p.describe()).collect::<Vec<_>>().join(" x "),
        }
    }
}

/// Spatial angular error `angle · axis` of `R_target · R_currentᵀ`.
fn rotation_error(current: &[f64], target: &[f64]) -> Vector3<f64> {
    let rc = rotation_of(current);
    let rt = rotation_of(target);
    let d = rt.compose(&rc.inverse());
    match d.to_angle_axis() {
        Ok((axis, angle)) => axis * angle,
        Err(_) => Vector3::zeros(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps() {
        assert_eq!(wrap_tau(-0.5), TAU - 0.5);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_pi(PI), PI);
        assert!((angle_diff(0.1, TAU - 0.1) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn circle_distance_is_quotient() {
        let c = ConfigChart::circles(1);
        assert!(c.distance(&[0.0], &[TAU]) < 1e-15);
        assert!((c.distance(&[0.0], &[PI]) - PI).abs() < 1e-15);
    }

    #[test]
    fn metrics_are_metrics_on_samples() {
        let charts = [
            WorkChart::Sphere,
            WorkChart::Annulus { r_min: 1.0, r_max: 3.0 },
            WorkChart::Cylinder { r_min: 1.0, r_max: 3.0, h_lo: 0.0, h_hi: 1.0 },
            WorkChart::Chart(ConfigChart::circles(2)),
        ];
        for w in charts {
            let axes = w.grid_axes(5).unwrap();
            let pts: Vec<WorkPoint> = crate::grid::product_values(&axes).iter().map(|v| w.grid_point(v)).collect();
            for a in &pts {
                assert!(w.contains(a, 1e-12));
                for b in &pts {
                    let d = w.distance(a, b);
                    assert!(d >= 0.0);
                    assert!((d - w.distance(b, a)).abs() < 1e-12);
                    if a == b {
                        assert!(d < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn distinct_grid_points_have_positive_distance() {
        let w = WorkChart::Annulus { r_min: 1.0, r_max: 3.0 };
        let axes = w.grid_axes(4).unwrap();
        let pts: Vec<WorkPoint> = crate::grid::product_values(&axes).iter().map(|v| w.grid_point(v)).collect();
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                assert!(w.distance(a, b) > 1e-6);
            }
        }
    }
}
