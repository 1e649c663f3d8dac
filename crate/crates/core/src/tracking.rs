//! Lifting workspace paths to configuration space with Jacobian tracking,
//! plus closed-loop drift diagnostics.

use crate::kinematics::{Config, KinematicMap, KinematicsError, WorkChart, WorkPoint};
use crate::linalg::{damped_solve, singular_values};
use crate::pose::Rotation;
use crate::report::{csv_row, fmt17};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Largest allowed chart distance between consecutive path samples.
pub const MAX_SAMPLE_STEP: f64 = 0.2;
/// Tracking error beyond which a lift is abandoned.
pub const LOST_THRESHOLD: f64 = 0.5;
/// Largest allowed distance between `f(start)` and the first path point.
pub const START_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackingError {
    #[error("invalid tracking spec: {0}")]
    InvalidSpec(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("start configuration is {distance} away from the path start")]
    StartMismatch { distance: f64 },
    #[error("path is not closed")]
    NotClosed,
    #[error("tracking lost at t={time} (error {error})")]
    Lost { time: f64, error: f64 },
    #[error("no start configuration for loop of radius {0}")]
    NoStart(f64),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Sampled workspace path on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkPath {
    pub times: Vec<f64>,
    pub points: Vec<WorkPoint>,
    pub closed: bool,
}

impl WorkPath {
    pub fn new(times: Vec<f64>, points: Vec<WorkPoint>, closed: bool) -> Result<Self, TrackingError> {
        if times.len() != points.len() || times.len() < 2 {
            return Err(TrackingError::InvalidPath("need at least two samples with matching times".into()));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TrackingError::InvalidPath("times must increase from 0 to 1".into()));
        }
        if closed {
            let (a, b) = (&points[0], points.last().unwrap());
            if a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12) {
                return Err(TrackingError::NotClosed);
            }
        }
        Ok(Self { times, points, closed })
    }

    /// Uniformly timed path through `points`.
    pub fn uniform(points: Vec<WorkPoint>, closed: bool) -> Result<Self, TrackingError> {
        let m = points.len().saturating_sub(1).max(1);
        let times = (0..points.len()).map(|i| if i == m { 1.0 } else { i as f64 / m as f64 }).collect();
        Self::new(times, points, closed)
    }

    pub fn max_step(&self, chart: &WorkChart) -> f64 {
        self.points.windows(2).map(|w| chart.distance(&w[0], &w[1])).fold(0.0, f64::max)
    }

    /// Inserts geodesic midpoints until consecutive samples are at most
    /// `max_step` apart.
    pub fn resample(&self, chart: &WorkChart, max_step: f64) -> WorkPath {
        let mut times = vec![self.times[0]];
        let mut points = vec![self.points[0].clone()];
        for i in 0..self.points.len() - 1 {
            let (a, b) = (&self.points[i], &self.points[i + 1]);
            let pieces = (chart.distance(a, b) / max_step).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                let s = k as f64 / pieces as f64;
                times.push(if k == pieces { self.times[i + 1] } else { self.times[i] + s * (self.times[i + 1] - self.times[i]) });
                points.push(if k == pieces { b.clone() } else { interpolate(chart, a, b, s).0 });
            }
        }
        WorkPath { times, points, closed: self.closed }
    }

    pub fn reversed(&self) -> WorkPath {
        let times = self.times.iter().rev().map(|t| 1.0 - t).collect();
        WorkPath { times, points: self.points.iter().rev().cloned().collect(), closed: self.closed }
    }

    pub fn to_csv(&self) -> String {
        let d = self.points[0].len();
        let mut header = vec!["t".to_string()];
        header.extend((0..d).map(|i| format!("w{i}")));
        let mut out = csv_row(&header);
        for (t, p) in self.times.iter().zip(&self.points) {
            let mut row = vec![fmt17(*t)];
            row.extend(p.iter().map(|&x| fmt17(x)));
            out.push_str(&csv_row(&row));
        }
        out
    }

    /// Parses `t,w0,w1,…` rows; a non-numeric first line is a header.
    /// The path counts as closed when its endpoints agree within 1e-12.
    pub fn from_csv(text: &str) -> Result<Self, TrackingError> {
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let vals: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match vals {
                Ok(v) if v.len() >= 2 => {
                    times.push(v[0]);
                    points.push(v[1..].to_vec());
                }
                Err(_) if n == 0 => continue,
                _ => return Err(TrackingError::InvalidPath(format!("line {}: expected t and coordinates", n + 1))),
            }
        }
        let closed = match (points.first(), points.last()) {
            (Some(a), Some(b)) if points.len() > 2 => a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12),
            _ => false,
        };
        Self::new(times, points, closed)
    }
}

fn rotation_of(p: &[f64]) -> Rotation {
    Rotation::from_matrix(&Matrix3::from_row_slice(&p[..9]))
}

fn row_major(r: &Rotation) -> Vec<f64> {
    let m = r.matrix();
    (0..3).flat_map(|i| (0..3).map(move |k| m[(i, k)])).collect()
}

/// Geodesic interpolation from `a` to `b` at fraction `s`, with the
/// velocity `d/ds` in the chart's tangent coordinates.
pub fn interpolate(chart: &WorkChart, a: &[f64], b: &[f64], s: f64) -> (WorkPoint, Vec<f64>) {
    match chart {
        WorkChart::Sphere => {
            let u = Vector3::new(a[0], a[1], a[2]);
            let v = Vector3::new(b[0], b[1], b[2]);
            let om = chart.distance(a, b);
            if om < 1e-12 {
                let d = v - u;
                let p = u + d * s;
                return (vec![p.x, p.y, p.z], vec![d.x, d.y, d.z]);
            }
            let so = om.sin();
            let p = (u * ((1.0 - s) * om).sin() + v * (s * om).sin()) / so;
            let dp = (-u * ((1.0 - s) * om).cos() + v * (s * om).cos()) * (om / so);
            (vec![p.x, p.y, p.z], vec![dp.x, dp.y, dp.z])
        }
        WorkChart::Rotation | WorkChart::RigidMotion => {
            let e = chart.error_vector(a, b);
            let (lin, omega): (Vec<f64>, Vector3<f64>) = match chart {
                WorkChart::RigidMotion => (e[..3].to_vec(), Vector3::new(e[3], e[4], e[5])),
                _ => (Vec::new(), Vector3::new(e[0], e[1], e[2])),
            };
            let ang = omega.norm();
            let step = if ang > 0.0 {
                Rotation::from_angle_axis(omega / ang, s * ang).expect("unit axis")
            } else {
                Rotation::identity()
            };
            let mut p = row_major(&step.compose(&rotation_of(a)));
            if let WorkChart::RigidMotion = chart {
                p.extend((0..3).map(|i| a[9 + i] + s * lin[i]));
            }
            let mut vel = lin;
            vel.extend(omega.iter());
            (p, vel)
        }
        WorkChart::Product(parts) => {
            let mut p = Vec::new();
            let mut vel = Vec::new();
            let mut off = 0;
            for part in parts {
                let n = part.ambient_dim();
                let (pp, vv) = interpolate(part, &a[off..off + n], &b[off..off + n], s);
                p.extend(pp);
                vel.extend(vv);
                off += n;
            }
            (p, vel)
        }
        _ => {
            let d = chart.error_vector(a, b);
            (a.iter().zip(&d).map(|(x, dx)| x + s * dx).collect(), d)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingMethod {
    Pseudoinverse,
    Damped,
    Extended,
}

/// Extended-Jacobian constraint `Σ q_i = value` over `indices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockSum {
    pub indices: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSpec {
    pub method: TrackingMethod,
    pub damping: f64,
    pub gain: f64,
    /// RK4 steps per input segment.
    pub steps: usize,
    pub constraint: Option<LockSum>,
    /// Relative threshold on `σ_min / σ_max` for recording singular encounters.
    pub singular_threshold: f64,
}

impl Default for TrackingSpec {
    fn default() -> Self {
        Self { method: TrackingMethod::Damped, damping: 1e-3, gain: 10.0, steps: 8, constraint: None, singular_threshold: 1e-2 }
    }
}

impl TrackingSpec {
    pub fn pseudoinverse() -> Self {
        Self { method: TrackingMethod::Pseudoinverse, damping: 0.0, ..Self::default() }
    }

    pub fn extended(constraint: LockSum) -> Self {
        Self { method: TrackingMethod::Extended, damping: 0.0, constraint: Some(constraint), ..Self::default() }
    }

    pub fn validate(&self, k: &KinematicMap) -> Result<(), TrackingError> {
        let bad = |m: &str| Err(TrackingError::InvalidSpec(m.into()));
        if !(self.damping >= 0.0 && self.gain >= 0.0) || self.steps == 0 {
            return bad("damping and gain must be nonnegative and steps positive");
        }
        match self.method {
            TrackingMethod::Damped if self.damping <= 0.0 => bad("damped tracking needs damping > 0"),
            TrackingMethod::Extended => {
                let Some(c) = &self.constraint else {
                    return bad("extended tracking needs a constraint");
                };
                let redundancy = k.config_chart().dim() as isize - k.work_chart().dim() as isize;
                if redundancy != 1 {
                    return bad("a single lock-sum row needs exactly one degree of redundancy");
                }
                if c.indices.is_empty() || c.indices.iter().any(|&i| i >= k.config_chart().dim()) {
                    return bad("constraint indices out of range");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Commanded joint velocity for task velocity `v` (tangent rows) at `q`.
    pub fn joint_velocity(&self, j: &DMatrix<f64>, v: &DVector<f64>, q: &[f64]) -> DVector<f64> {
        match (self.method, &self.constraint) {
            (TrackingMethod::Extended, Some(c)) => {
                let n = j.ncols();
                let mut a = DMatrix::zeros(j.nrows() + 1, n);
                a.view_mut((0, 0), j.shape()).copy_from(j);
                c.indices.iter().for_each(|&i| a[(j.nrows(), i)] = 1.0);
                let g: f64 = c.indices.iter().map(|&i| q[i]).sum::<f64>() - c.value;
                let mut rhs = DVector::zeros(v.len() + 1);
                rhs.rows_mut(0, v.len()).copy_from(v);
                rhs[v.len()] = -self.gain * g;
                damped_solve(&a, &rhs, self.damping)
            }
            (TrackingMethod::Pseudoinverse, _) => damped_solve(j, v, 0.0),
            _ => damped_solve(j, v, self.damping),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingResult {
    pub times: Vec<f64>,
    /// Lifted configurations with circle coordinates unwrapped.
    pub configs: Vec<Config>,
    pub errors: Vec<f64>,
    pub sigma_min: Vec<f64>,
    pub max_error: f64,
    pub drift: f64,
    pub singular_encounters: Vec<f64>,
}

impl TrackingResult {
    pub fn end(&self) -> &Config {
        self.configs.last().expect("nonempty lift")
    }

    pub fn to_csv(&self) -> String {
        let d = self.configs[0].len();
        let mut header = vec!["t".to_string()];
        header.extend((0..d).map(|i| format!("q{i}")));
        header.extend(["error".to_string(), "sigma_min".to_string()]);
        let mut out = csv_row(&header);
        for i in 0..self.times.len() {
            let mut row = vec![fmt17(self.times[i])];
            row.extend(self.configs[i].iter().map(|&x| fmt17(x)));
            row.push(fmt17(self.errors[i]));
            row.push(fmt17(self.sigma_min[i]));
            out.push_str(&csv_row(&row));
        }
        out
    }
}

fn sigma_ratio(k: &KinematicMap, j: &DMatrix<f64>) -> (f64, f64) {
    let full = k.config_chart().dim().min(k.work_chart().dim());
    let sv = singular_values(j);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.get(full.saturating_sub(1)).copied().unwrap_or(0.0);
    (smin, if smax > 0.0 { smin / smax } else { 0.0 })
}

/// Integrates `q̇ = J⁺(ẇ + κ e)` with fixed-step RK4 along `w`, starting at `start`.
pub fn lift_path(k: &KinematicMap, spec: &TrackingSpec, start: &[f64], w: &WorkPath) -> Result<TrackingResult, TrackingError> {
    spec.validate(k)?;
    k.check_config(start)?;
    let chart = k.work_chart();
    if w.points.iter().any(|p| p.len() != chart.ambient_dim()) {
        return Err(TrackingError::InvalidPath(format!("points must have {} coordinates", chart.ambient_dim())));
    }
    let d0 = chart.distance(&k.forward(start), &w.points[0]);
    if d0.is_nan() || d0 > START_TOL {
        return Err(TrackingError::StartMismatch { distance: d0 });
    }

    let field = |q: &[f64], a: &[f64], b: &[f64], s: f64, dt: f64| -> DVector<f64> {
        let (target, vel) = interpolate(chart, a, b, s);
        let e = chart.error_vector(&k.forward(q), &target);
        let v = DVector::from_iterator(vel.len(), vel.iter().zip(&e).map(|(v, e)| v / dt + spec.gain * e));
        spec.joint_velocity(&k.jacobian(q), &v, q)
    };
    let axpy = |q: &[f64], h: f64, d: &DVector<f64>| -> Config { q.iter().zip(d.iter()).map(|(x, y)| x + h * y).collect() };

    let mut q: Config = start.to_vec();
    let (s0, r0) = sigma_ratio(k, &k.jacobian(&q));
    let mut out = TrackingResult {
        times: vec![w.times[0]],
        configs: vec![q.clone()],
        errors: vec![d0],
        sigma_min: vec![s0],
        max_error: d0,
        drift: 0.0,
        singular_encounters: if r0 < spec.singular_threshold { vec![w.times[0]] } else { vec![] },
    };
    for i in 0..w.points.len() - 1 {
        let (a, b) = (&w.points[i], &w.points[i + 1]);
        let (t0, t1) = (w.times[i], w.times[i + 1]);
        let dt = t1 - t0;
        let h = dt / spec.steps as f64;
        let hs = 1.0 / spec.steps as f64;
        for step in 0..spec.steps {
            let s = step as f64 * hs;
            let k1 = field(&q, a, b, s, dt);
            let k2 = field(&axpy(&q, 0.5 * h, &k1), a, b, s + 0.5 * hs, dt);
            let k3 = field(&axpy(&q, 0.5 * h, &k2), a, b, s + 0.5 * hs, dt);
            let k4 = field(&axpy(&q, h, &k3), a, b, s + hs, dt);
            let incr = (k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0;
            q = axpy(&q, h, &incr);
            let sn = (step + 1) as f64 * hs;
            let t = if step + 1 == spec.steps { t1 } else { t0 + sn * dt };
            let target = if step + 1 == spec.steps { b.clone() } else { interpolate(chart, a, b, sn).0 };
            let err = chart.distance(&k.forward(&q), &target);
            if err.is_nan() || err > LOST_THRESHOLD {
                return Err(TrackingError::Lost { time: t, error: err });
            }
            let (smin, ratio) = sigma_ratio(k, &k.jacobian(&q));
            if ratio < spec.singular_threshold {
                out.singular_encounters.push(t);
            }
            out.max_error = out.max_error.max(err);
            out.times.push(t);
            out.configs.push(q.clone());
            out.errors.push(err);
            out.sigma_min.push(smin);
        }
    }
    out.drift = k.config_chart().distance(start, &q);
    Ok(out)
}

/// Config-chart distance between the start and end of the lift of a closed loop.
pub fn cyclicity_drift(k: &KinematicMap, spec: &TrackingSpec, lp: &WorkPath, start: &[f64]) -> Result<f64, TrackingError> {
    if !lp.closed {
        return Err(TrackingError::NotClosed);
    }
    Ok(lift_path(k, spec, start, lp)?.drift)
}

/// Closed test loops around a centre point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopShape {
    /// Geodesic circle of the given radius, starting at angle 0.
    Circle,
    /// From the circle point at angle π straight through the centre to
    /// angle 0, then back along the upper half-circle.
    Lollipop,
}

fn tangent_frame(chart: &WorkChart, center: &[f64]) -> Result<(Vec<f64>, Vec<f64>), TrackingError> {
    match chart {
        WorkChart::Sphere => {
            let c = Vector3::new(center[0], center[1], center[2]).normalize();
            let helper = if c.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            let e1 = (helper - c * c.dot(&helper)).normalize();
            let e2 = c.cross(&e1);
            Ok((e1.as_slice().to_vec(), e2.as_slice().to_vec()))
        }
        _ if chart.ambient_dim() >= 2 && !matches!(chart, WorkChart::Rotation | WorkChart::RigidMotion) => {
            let n = chart.ambient_dim();
            let mut e1 = vec![0.0; n];
            let mut e2 = vec![0.0; n];
            e1[0] = 1.0;
            e2[1] = 1.0;
            Ok((e1, e2))
        }
        _ => Err(TrackingError::InvalidPath(format!("no planar loops in {}", chart.describe()))),
    }
}

fn loop_point(chart: &WorkChart, center: &[f64], e: &(Vec<f64>, Vec<f64>), r: f64, theta: f64) -> WorkPoint {
    let (s, c) = theta.sin_cos();
    match chart {
        WorkChart::Sphere => (0..3).map(|i| r.cos() * center[i] + r.sin() * (c * e.0[i] + s * e.1[i])).collect(),
        _ => (0..center.len()).map(|i| center[i] + r * (c * e.0[i] + s * e.1[i])).collect(),
    }
}

/// A closed loop of radius `radius` about `center`, sampled finely enough
/// that consecutive points are at most [`MAX_SAMPLE_STEP`] / 4 apart.
pub fn closed_loop(chart: &WorkChart, center: &[f64], radius: f64, shape: LoopShape) -> Result<WorkPath, TrackingError> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(TrackingError::InvalidPath("radius must be positive".into()));
    }
    let frame = tangent_frame(chart, center)?;
    let n = ((PI * radius) / (MAX_SAMPLE_STEP / 4.0)).ceil().max(16.0) as usize;
    let mut pts = Vec::new();
    match shape {
        LoopShape::Circle => {
            for i in 0..=2 * n {
                pts.push(loop_point(chart, center, &frame, radius, TAU * i as f64 / (2 * n) as f64));
            }
        }
        LoopShape::Lollipop => {
            // diameter from angle π to angle 0 as a signed radius sweep
            for i in 0..=n {
                let rr = -radius + 2.0 * radius * i as f64 / n as f64;
                pts.push(loop_point(chart, center, &frame, rr, 0.0));
            }
            for i in 1..=n {
                pts.push(loop_point(chart, center, &frame, radius, PI * i as f64 / n as f64));
            }
        }
    }
    let last = pts.len() - 1;
    pts[last] = pts[0].clone();
    WorkPath::uniform(pts, true)
}

/// Loop that winds once around a circle factor of a one-dimensional chart.
pub fn winding_loop(start: f64, samples: usize) -> Result<WorkPath, TrackingError> {
    let n = samples.max(32);
    let mut pts: Vec<WorkPoint> = (0..=n).map(|i| vec![start + TAU * i as f64 / n as f64]).collect();
    pts[n] = pts[0].clone();
    WorkPath::uniform(pts, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub radius: f64,
    pub drift: f64,
    pub max_error: f64,
}

/// Drift of shrinking loops about `center`. Each loop starts at the
/// configuration `section` assigns to its first point.
pub fn shrinking_loop_probe<S>(
    k: &KinematicMap,
    spec: &TrackingSpec,
    center: &[f64],
    radii: &[f64],
    shape: LoopShape,
    section: S,
) -> Result<Vec<ProbeRow>, TrackingError>
where
    S: Fn(&[f64]) -> Option<Config> + Sync,
{
    let rows: Result<Vec<ProbeRow>, TrackingError> = radii
        .par_iter()
        .map(|&r| {
            let lp = closed_loop(k.work_chart(), center, r, shape)?;
            let start = section(&lp.points[0]).ok_or(TrackingError::NoStart(r))?;
            let res = lift_path(k, spec, &start, &lp)?;
            Ok(ProbeRow { radius: r, drift: res.drift, max_error: res.max_error })
        })
        .collect();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::maps::{canonical_map, planar_chain, ChainOutput};
    use std::f64::consts::FRAC_PI_2;

    fn rr() -> KinematicMap {
        canonical_map("planar_rr", &[2.0, 1.0]).unwrap()
    }

    fn elbow_up(w: &[f64]) -> Option<Config> {
        let r2 = w[0] * w[0] + w[1] * w[1];
        let cb = ((r2 - 5.0) / 4.0).clamp(-1.0, 1.0);
        let b = cb.acos();
        let a = w[1].atan2(w[0]) - (b.sin()).atan2(2.0 + cb);
        Some(vec![a, b])
    }

    fn arc(radius: f64, from: f64, to: f64, n: usize) -> WorkPath {
        let pts = (0..=n).map(|i| {
            let t = from + (to - from) * i as f64 / n as f64;
            vec![radius * t.cos(), radius * t.sin()]
        });
        WorkPath::uniform(pts.collect(), false).unwrap()
    }

    #[test]
    fn identity_circle_lift_is_input() {
        let k = canonical_map("identity_circle", &[]).unwrap();
        let lp = winding_loop(0.3, 64).unwrap();
        let res = lift_path(&k, &TrackingSpec::pseudoinverse(), &[0.3], &lp).unwrap();
        assert!(res.max_error < 1e-12);
        assert!(res.drift < 1e-12);
        // damping only adds a lag of order λ²
        let damped = lift_path(&k, &TrackingSpec::default(), &[0.3], &lp).unwrap();
        assert!(damped.max_error < 1e-5 && damped.drift < 1e-5);
    }

    #[test]
    fn quarter_circle_tracks_tightly() {
        let w = arc(2.5, 0.0, FRAC_PI_2, 40);
        let start = elbow_up(&w.points[0]).unwrap();
        let res = lift_path(&rr(), &TrackingSpec::default(), &start, &w).unwrap();
        assert!(res.max_error <= 1e-4, "{}", res.max_error);
        assert!(res.singular_encounters.is_empty());
    }

    #[test]
    fn outer_boundary_records_singularity() {
        let pts: Vec<WorkPoint> = (0..=20).map(|i| vec![2.0 + i as f64 / 20.0, 0.0]).collect();
        let w = WorkPath::uniform(pts, false).unwrap();
        let start = elbow_up(&w.points[0]).unwrap();
        let res = lift_path(&rr(), &TrackingSpec::default(), &start, &w).unwrap();
        assert!(!res.singular_encounters.is_empty());
        assert!(res.end()[1].abs() < 0.1);
    }

    #[test]
    fn interior_loop_has_small_drift() {
        let lp = closed_loop(rr().work_chart(), &[0.0, 0.0], 2.0, LoopShape::Circle).unwrap();
        let start = elbow_up(&lp.points[0]).unwrap();
        assert!(cyclicity_drift(&rr(), &TrackingSpec::default(), &lp, &start).unwrap() <= 1e-3);
    }

    #[test]
    fn start_mismatch_rejected() {
        let w = arc(2.5, 0.0, 1.0, 10);
        let err = lift_path(&rr(), &TrackingSpec::default(), &[0.0, 0.0], &w).unwrap_err();
        assert!(matches!(err, TrackingError::StartMismatch { .. }));
    }

    #[test]
    fn spec_validation() {
        let bad = TrackingSpec { damping: 0.0, ..TrackingSpec::default() };
        assert!(bad.validate(&rr()).is_err());
        let ext = TrackingSpec::extended(LockSum { indices: vec![0], value: 0.0 });
        assert!(ext.validate(&rr()).is_err());
    }

    #[test]
    fn extended_holds_constraint() {
        let m = planar_chain(&[1.0, 0.8, 0.5]);
        let k = KinematicMap::from_mechanism(&m, 3, ChainOutput::PlanarPosition).unwrap();
        let q0 = vec![0.2, 0.9, 0.4];
        let lock = LockSum { indices: vec![0, 1, 2], value: 1.5 };
        let spec = TrackingSpec::extended(lock);
        let p0 = k.forward(&q0);
        let pts: Vec<WorkPoint> = (0..=10).map(|i| vec![p0[0] - 0.03 * i as f64, p0[1] + 0.02 * i as f64]).collect();
        let res = lift_path(&k, &spec, &q0, &WorkPath::uniform(pts, false).unwrap()).unwrap();
        assert!(res.max_error < 1e-4);
        for q in &res.configs {
            assert!((q.iter().sum::<f64>() - 1.5).abs() < 1e-6);
        }
    }

    #[test]
    fn pseudoinverse_velocity_is_minimal() {
        let m = planar_chain(&[1.0, 0.8, 0.5]);
        let k = KinematicMap::from_mechanism(&m, 3, ChainOutput::PlanarPosition).unwrap();
        let spec = TrackingSpec::pseudoinverse();
        for q in [[0.1, 0.5, -0.3], [1.0, -1.2, 2.0], [2.5, 0.3, 0.7]] {
            let j = k.jacobian(&q);
            let v = DVector::from_vec(vec![0.3, -0.2]);
            let got = spec.joint_velocity(&j, &v, &q);
            let normal = j.transpose() * (&j * j.transpose()).try_inverse().unwrap() * &v;
            assert!((got - normal).amax() < 1e-8);
        }
    }

    #[test]
    fn reverse_returns_home() {
        let w = arc(2.2, 0.3, 1.4, 30);
        let start = elbow_up(&w.points[0]).unwrap();
        let fwd = lift_path(&rr(), &TrackingSpec::default(), &start, &w).unwrap();
        let back = lift_path(&rr(), &TrackingSpec::default(), fwd.end(), &w.reversed()).unwrap();
        assert!(rr().config_chart().distance(&start, back.end()) < 1e-3);
    }

    #[test]
    fn rk4_order() {
        let w = arc(2.4, 0.0, 1.5, 6);
        let start = elbow_up(&w.points[0]).unwrap();
        let spec = |steps| TrackingSpec { gain: 0.0, damping: 0.0, method: TrackingMethod::Pseudoinverse, steps, ..TrackingSpec::default() };
        let ends: Vec<Config> =
            [2, 4, 8].iter().map(|&s| lift_path(&rr(), &spec(s), &start, &w).unwrap().end().clone()).collect();
        let d1 = rr().config_chart().distance(&ends[0], &ends[1]);
        let d2 = rr().config_chart().distance(&ends[1], &ends[2]);
        assert!((d1 / d2).log2() >= 3.5, "{d1} {d2}");
    }

    #[test]
    fn resample_bounds_step() {
        let w = WorkPath::uniform(vec![vec![1.5, 0.0], vec![0.0, 2.5]], false).unwrap();
        let r = w.resample(&WorkChart::Plane, 0.2);
        assert!(r.max_step(&WorkChart::Plane) <= 0.2 + 1e-12);
        assert_eq!(r.points.last(), w.points.last());
    }

    #[test]
    fn csv_round_trip() {
        let w = arc(2.0, 0.0, 1.0, 5);
        assert_eq!(WorkPath::from_csv(&w.to_csv()).unwrap(), w);
    }

    #[test]
    fn loops_are_closed_and_fine() {
        for shape in [LoopShape::Circle, LoopShape::Lollipop] {
            let lp = closed_loop(&WorkChart::Sphere, &[0.0, 0.0, 1.0], 0.2, shape).unwrap();
            assert!(lp.closed);
            assert!(lp.max_step(&WorkChart::Sphere) <= MAX_SAMPLE_STEP);
            assert!(lp.points.iter().all(|p| WorkChart::Sphere.contains(p, 1e-12)));
        }
    }
}
