//! Kinematic maps: canonical closed-form mechanisms and serial/tree DH chains.

use super::chart::{Config, ConfigChart, WorkChart, WorkPoint};
use super::KinematicsError;
use crate::mechanism::{dh_transform, joint_chart, ChartFactor, DhParams, JointKind, Mechanism, Topology};
use crate::pose::RigidPose;
use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Closed-form maps, addressable by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum MapSpec {
    /// `(α, β) ↦ (cos α cos β, cos α sin β, sin α)` on `T² → S²`.
    Pointing,
    /// Two-link planar arm with link lengths `r1 > r2 > 0`.
    PlanarRr { r1: f64, r2: f64 },
    /// Planar arm times a vertical prismatic stroke.
    Scara { r1: f64, r2: f64, h_lo: f64, h_hi: f64 },
    IdentityCircle,
    IdentityInterval { lo: f64, hi: f64 },
    IdentityTorus,
    /// `h: [0,3] → [0,2]`, `t` then constant `1` then `t − 1`.
    HFixture,
    Product { left: Box<MapSpec>, right: Box<MapSpec> },
}

pub const MAP_NAMES: [&str; 7] =
    ["pointing", "planar_rr", "scara", "identity_circle", "identity_interval", "identity_torus", "h_fixture"];

impl MapSpec {
    /// Looks up a map by name. Missing parameters take defaults
    /// (`planar_rr` 2,1; `scara` 2,1,0,1; `identity_interval` 0,1).
    pub fn by_name(name: &str, params: &[f64]) -> Result<MapSpec, KinematicsError> {
        let p = |i: usize, d: f64| params.get(i).copied().unwrap_or(d);
        let expect = |n: usize| {
            if params.len() > n {
                Err(KinematicsError::InvalidParams(format!("{name} takes at most {n} parameters")))
            } else {
                Ok(())
            }
        };
        let spec = match name {
            "pointing" => {
                expect(0)?;
                MapSpec::Pointing
            }
            "planar_rr" => {
                expect(2)?;
                MapSpec::PlanarRr { r1: p(0, 2.0), r2: p(1, 1.0) }
            }
            "scara" => {
                expect(4)?;
                MapSpec::Scara { r1: p(0, 2.0), r2: p(1, 1.0), h_lo: p(2, 0.0), h_hi: p(3, 1.0) }
            }
            "identity_circle" => {
                expect(0)?;
                MapSpec::IdentityCircle
            }
            "identity_interval" => {
                expect(2)?;
                MapSpec::IdentityInterval { lo: p(0, 0.0), hi: p(1, 1.0) }
            }
            "identity_torus" => {
                expect(0)?;
                MapSpec::IdentityTorus
            }
            "h_fixture" => {
                expect(0)?;
                MapSpec::HFixture
            }
            other => return Err(KinematicsError::UnknownMap(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> String {
        match self {
            MapSpec::Pointing => "pointing".into(),
            MapSpec::PlanarRr { .. } => "planar_rr".into(),
            MapSpec::Scara { .. } => "scara".into(),
            MapSpec::IdentityCircle => "identity_circle".into(),
            MapSpec::IdentityInterval { .. } => "identity_interval".into(),
            MapSpec::IdentityTorus => "identity_torus".into(),
            MapSpec::HFixture => "h_fixture".into(),
            MapSpec::Product { left, right } => format!("{}*{}", left.name(), right.name()),
        }
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let bad = |m: String| Err(KinematicsError::InvalidParams(m));
        match self {
            MapSpec::PlanarRr { r1, r2 } | MapSpec::Scara { r1, r2, .. } if !(r1.is_finite() && r1 > r2 && *r2 > 0.0) => {
                bad(format!("link lengths need r1 > r2 > 0, got {r1}, {r2}"))
            }
            MapSpec::Scara { h_lo, h_hi, .. } if !(h_lo.is_finite() && h_hi.is_finite() && h_lo < h_hi) => {
                bad(format!("height interval [{h_lo}, {h_hi}] is empty"))
            }
            MapSpec::IdentityInterval { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                bad(format!("interval [{lo}, {hi}] is empty"))
            }
            MapSpec::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn config_chart(&self) -> ConfigChart {
        match self {
            MapSpec::Pointing | MapSpec::PlanarRr { .. } | MapSpec::IdentityTorus => ConfigChart::circles(2),
            MapSpec::Scara { h_lo, h_hi, .. } => ConfigChart::circles(2).concat(&ConfigChart::interval(*h_lo, *h_hi)),
            MapSpec::IdentityCircle => ConfigChart::circles(1),
            MapSpec::IdentityInterval { lo, hi } => ConfigChart::interval(*lo, *hi),
            MapSpec::HFixture => ConfigChart::interval(0.0, 3.0),
            MapSpec::Product { left, right } => left.config_chart().concat(&right.config_chart()),
        }
    }

    pub fn work_chart(&self) -> WorkChart {
        match self {
            MapSpec::Pointing => WorkChart::Sphere,
            MapSpec::PlanarRr { r1, r2 } => WorkChart::Annulus { r_min: r1 - r2, r_max: r1 + r2 },
            MapSpec::Scara { r1, r2, h_lo, h_hi } => {
                WorkChart::Cylinder { r_min: r1 - r2, r_max: r1 + r2, h_lo: *h_lo, h_hi: *h_hi }
            }
            MapSpec::IdentityCircle | MapSpec::IdentityInterval { .. } | MapSpec::IdentityTorus => {
                WorkChart::Chart(self.config_chart())
            }
            MapSpec::HFixture => WorkChart::Chart(ConfigChart::interval(0.0, 2.0)),
            MapSpec::Product { left, right } => WorkChart::Product(vec![left.work_chart(), right.work_chart()]),
        }
    }

    pub fn forward(&self, c: &[f64]) -> WorkPoint {
        match self {
            MapSpec::Pointing => {
                let (a, b) = (c[0], c[1]);
                vec![a.cos() * b.cos(), a.cos() * b.sin(), a.sin()]
            }
            MapSpec::PlanarRr { r1, r2 } => planar_rr(*r1, *r2, c[0], c[1]).to_vec(),
            MapSpec::Scara { r1, r2, .. } => {
                let [x, y] = planar_rr(*r1, *r2, c[0], c[1]);
                vec![x, y, c[2]]
            }
            MapSpec::IdentityCircle | MapSpec::IdentityInterval { .. } | MapSpec::IdentityTorus => c.to_vec(),
            MapSpec::HFixture => vec![h_value(c[0])],
            MapSpec::Product { left, right } => {
                let k = left.config_chart().dim();
                let mut w = left.forward(&c[..k]);
                w.extend(right.forward(&c[k..]));
                w
            }
        }
    }

    pub fn jacobian(&self, c: &[f64]) -> DMatrix<f64> {
        match self {
            MapSpec::Pointing => {
                let (sa, ca) = c[0].sin_cos();
                let (sb, cb) = c[1].sin_cos();
                DMatrix::from_row_slice(3, 2, &[-sa * cb, -ca * sb, -sa * sb, ca * cb, ca, 0.0])
            }
            MapSpec::PlanarRr { r1, r2 } => planar_rr_jacobian(*r1, *r2, c[0], c[1]),
            MapSpec::Scara { r1, r2, .. } => {
                let mut j = DMatrix::zeros(3, 3);
                j.view_mut((0, 0), (2, 2)).copy_from(&planar_rr_jacobian(*r1, *r2, c[0], c[1]));
                j[(2, 2)] = 1.0;
                j
            }
            MapSpec::IdentityCircle | MapSpec::IdentityInterval { .. } | MapSpec::IdentityTorus => {
                DMatrix::identity(c.len(), c.len())
            }
            MapSpec::HFixture => {
                let t = c[0];
                let slope = if (1.0..2.0).contains(&t) { 0.0 } else { 1.0 };
                DMatrix::from_element(1, 1, slope)
            }
            MapSpec::Product { left, right } => {
                let k = left.config_chart().dim();
                let jl = left.jacobian(&c[..k]);
                let jr = right.jacobian(&c[k..]);
                let mut j = DMatrix::zeros(jl.nrows() + jr.nrows(), jl.ncols() + jr.ncols());
                j.view_mut((0, 0), jl.shape()).copy_from(&jl);
                j.view_mut(jl.shape(), jr.shape()).copy_from(&jr);
                j
            }
        }
    }
}

fn planar_rr(r1: f64, r2: f64, a: f64, b: f64) -> [f64; 2] {
    [r1 * a.cos() + r2 * (a + b).cos(), r1 * a.sin() + r2 * (a + b).sin()]
}

fn planar_rr_jacobian(r1: f64, r2: f64, a: f64, b: f64) -> DMatrix<f64> {
    let (s1, c1) = a.sin_cos();
    let (s12, c12) = (a + b).sin_cos();
    DMatrix::from_row_slice(2, 2, &[-r1 * s1 - r2 * s12, -r2 * s12, r1 * c1 + r2 * c12, r2 * c12])
}

fn h_value(t: f64) -> f64 {
    if t <= 1.0 {
        t
    } else if t <= 2.0 {
        1.0
    } else {
        t - 1.0
    }
}

/// What a chain map reports about the end-effector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainOutput {
    Pose,
    Position,
    Orientation,
    PlanarPosition,
}

impl ChainOutput {
    fn work_chart(self) -> WorkChart {
        match self {
            ChainOutput::Pose => WorkChart::RigidMotion,
            ChainOutput::Position => WorkChart::Space,
            ChainOutput::Orientation => WorkChart::Rotation,
            ChainOutput::PlanarPosition => WorkChart::Plane,
        }
    }

    // rows of the 6-row (linear; angular) Jacobian that this output keeps
    fn rows(self) -> std::ops::Range<usize> {
        match self {
            ChainOutput::Pose => 0..6,
            ChainOutput::Position => 0..3,
            ChainOutput::Orientation => 3..6,
            ChainOutput::PlanarPosition => 0..2,
        }
    }
}

/// World-frame data of a chain evaluated at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameChain {
    /// Pose of each joint's child link.
    pub frames: Vec<RigidPose>,
    /// Unit axis `z_i` of each joint, taken from its parent frame.
    pub axes: Vec<Vector3<f64>>,
    /// Origin `p_i` of each joint's parent frame.
    pub points: Vec<Vector3<f64>>,
    pub kinds: Vec<JointKind>,
    /// Whether the joint lies between the base and the end-effector.
    pub on_path: Vec<bool>,
    pub end: RigidPose,
}

impl FrameChain {
    /// Full 6-row Jacobian: linear velocity rows then angular velocity rows.
    pub fn spatial_jacobian(&self) -> DMatrix<f64> {
        let n = self.axes.len();
        let pe = self.end.translation;
        let mut j = DMatrix::zeros(6, n);
        for i in (0..n).filter(|&i| self.on_path[i]) {
            let z = self.axes[i];
            let (lin, ang) = match self.kinds[i] {
                JointKind::P => (z, Vector3::zeros()),
                _ => (z.cross(&(pe - self.points[i])), z),
            };
            for r in 0..3 {
                j[(r, i)] = lin[r];
                j[(r + 3, i)] = ang[r];
            }
        }
        j
    }

    /// Axis directions of the revolute joints on the end-effector path.
    pub fn revolute_axes(&self) -> Vec<Vector3<f64>> {
        (0..self.axes.len()).filter(|&i| self.on_path[i] && self.kinds[i] == JointKind::R).map(|i| self.axes[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ChainMap {
    mechanism: Mechanism,
    end_link: usize,
    output: ChainOutput,
    // joints in an order where every parent link is placed before its child
    order: Vec<usize>,
    on_path: Vec<bool>,
}

impl ChainMap {
    fn frame_chain(&self, c: &[f64]) -> FrameChain {
        let m = &self.mechanism;
        let n = m.joints.len();
        let mut link = vec![None; m.links + 1];
        link[0] = Some(m.base_pose());
        let mut frames = vec![RigidPose::identity(); n];
        let mut axes = vec![Vector3::z(); n];
        let mut points = vec![Vector3::zeros(); n];
        for &ji in &self.order {
            let j = &m.joints[ji];
            let parent: RigidPose = link[j.parent].expect("parent placed first");
            let dh = j.dh.expect("checked at construction");
            let child = parent.compose(&dh_transform(&dh, c[ji], j.kind));
            axes[ji] = parent.rotation.apply(&Vector3::z());
            points[ji] = parent.translation;
            frames[ji] = child;
            link[j.child] = Some(child);
        }
        let end = link[self.end_link].expect("end link reachable");
        FrameChain { frames, axes, points, kinds: m.joints.iter().map(|j| j.kind).collect(), on_path: self.on_path.clone(), end }
    }

    fn work_point(&self, end: &RigidPose) -> WorkPoint {
        let r = end.rotation.matrix();
        let rm: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |k| r[(i, k)])).collect();
        let t = end.translation;
        match self.output {
            ChainOutput::Pose => {
                let mut v = rm;
                v.extend([t.x, t.y, t.z]);
                v
            }
            ChainOutput::Position => vec![t.x, t.y, t.z],
            ChainOutput::Orientation => rm,
            ChainOutput::PlanarPosition => vec![t.x, t.y],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum MapSource {
    Canonical(MapSpec),
    Chain(Box<ChainMap>),
}

/// A forward kinematic map `f: C → W` with its charts.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicMap {
    source: MapSource,
    config: ConfigChart,
    work: WorkChart,
}

impl KinematicMap {
    pub fn from_spec(spec: MapSpec) -> Result<Self, KinematicsError> {
        spec.validate()?;
        Ok(Self { config: spec.config_chart(), work: spec.work_chart(), source: MapSource::Canonical(spec) })
    }

    /// Chain map of a serial or tree mechanism whose joints are all R or P
    /// and carry DH parameters. Every joint contributes one coordinate.
    pub fn from_mechanism(m: &Mechanism, end_link: usize, output: ChainOutput) -> Result<Self, KinematicsError> {
        if m.classify() == Topology::Parallel {
            return Err(KinematicsError::LoopClosureUnsupported);
        }
        let mut depth = Vec::with_capacity(m.joints.len());
        for (i, j) in m.joints.iter().enumerate() {
            if !matches!(j.kind, JointKind::R | JointKind::P) {
                return Err(KinematicsError::Unsupported(format!("joint {i} has kind {:?}", j.kind)));
            }
            if j.dh.is_none() {
                return Err(KinematicsError::Unsupported(format!("joint {i} has no DH parameters")));
            }
            let path = m.path_to_link(j.child).unwrap_or_default();
            if path.last() != Some(&i) {
                return Err(KinematicsError::Unsupported(format!("joint {i} points toward the base")));
            }
            depth.push(path.len());
        }
        let path = m
            .path_to_link(end_link)
            .filter(|_| end_link > 0)
            .ok_or_else(|| KinematicsError::InvalidParams(format!("end link {end_link} is not a moving link")))?;
        let mut order: Vec<usize> = (0..m.joints.len()).collect();
        order.sort_by_key(|&i| (depth[i], i));
        let mut on_path = vec![false; m.joints.len()];
        path.iter().for_each(|&i| on_path[i] = true);
        let factors: Vec<ChartFactor> = m.joints.iter().flat_map(|j| joint_chart(j).factors).collect();
        Ok(Self {
            config: ConfigChart::new(factors),
            work: output.work_chart(),
            source: MapSource::Chain(Box::new(ChainMap { mechanism: m.clone(), end_link, output, order, on_path })),
        })
    }

    pub fn spec(&self) -> Option<&MapSpec> {
        match &self.source {
            MapSource::Canonical(s) => Some(s),
            MapSource::Chain(_) => None,
        }
    }

    pub fn mechanism(&self) -> Option<&Mechanism> {
        match &self.source {
            MapSource::Chain(c) => Some(&c.mechanism),
            MapSource::Canonical(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.source {
            MapSource::Canonical(s) => s.name(),
            MapSource::Chain(c) => c.mechanism.name.clone(),
        }
    }

    pub fn config_chart(&self) -> &ConfigChart {
        &self.config
    }

    pub fn work_chart(&self) -> &WorkChart {
        &self.work
    }

    pub fn check_config(&self, c: &[f64]) -> Result<(), KinematicsError> {
        if c.len() != self.config.dim() {
            return Err(KinematicsError::ConfigMismatch { expected: self.config.dim(), got: c.len() });
        }
        Ok(())
    }

    /// `f(c)`; `c` must match the configuration chart.
    pub fn forward(&self, c: &[f64]) -> WorkPoint {
        match &self.source {
            MapSource::Canonical(s) => s.forward(c),
            MapSource::Chain(ch) => ch.work_point(&ch.frame_chain(c).end),
        }
    }

    /// Frame data for chain maps, `None` for closed-form maps.
    pub fn frame_chain(&self, c: &[f64]) -> Option<FrameChain> {
        match &self.source {
            MapSource::Chain(ch) => Some(ch.frame_chain(c)),
            MapSource::Canonical(_) => None,
        }
    }

    /// Analytic Jacobian with [`WorkChart::tangent_rows`] rows.
    pub fn jacobian(&self, c: &[f64]) -> DMatrix<f64> {
        match &self.source {
            MapSource::Canonical(s) => s.jacobian(c),
            MapSource::Chain(ch) => {
                let full = ch.frame_chain(c).spatial_jacobian();
                full.rows_range(ch.output.rows()).into_owned()
            }
        }
    }

    /// Central-difference Jacobian, differencing through the work chart's
    /// error vector so group-valued outputs give spatial velocities.
    pub fn numeric_jacobian(&self, c: &[f64], h: f64) -> DMatrix<f64> {
        let n = c.len();
        let mut j = DMatrix::zeros(self.work.tangent_rows(), n);
        for k in 0..n {
            let mut lo: Config = c.to_vec();
            let mut hi: Config = c.to_vec();
            lo[k] -= h;
            hi[k] += h;
            let d = self.work.error_vector(&self.forward(&lo), &self.forward(&hi));
            for (r, v) in d.iter().enumerate() {
                j[(r, k)] = v / (2.0 * h);
            }
        }
        j
    }
}

/// Builds a closed-form map by name.
pub fn canonical_map(name: &str, params: &[f64]) -> Result<KinematicMap, KinematicsError> {
    KinematicMap::from_spec(MapSpec::by_name(name, params)?)
}

/// Work point and, for chain maps, the frame chain at `c`.
pub fn forward_kinematics(k: &KinematicMap, c: &[f64]) -> Result<(WorkPoint, Option<FrameChain>), KinematicsError> {
    k.check_config(c)?;
    Ok((k.forward(c), k.frame_chain(c)))
}

pub fn jacobian(k: &KinematicMap, c: &[f64]) -> Result<DMatrix<f64>, KinematicsError> {
    k.check_config(c)?;
    Ok(k.jacobian(c))
}

/// Spatial 4R chain with all twists `π/2`, used as a test fixture.
pub fn fixture_4r() -> Mechanism {
    let row = |d: f64| (JointKind::R, DhParams::new(0.0, d, 1.0, FRAC_PI_2));
    Mechanism::serial_dh("4r", &[row(0.5), row(0.0), row(0.3), row(0.0)]).expect("valid 4R chain")
}

/// Planar revolute chain (all twists zero) with the given link lengths.
pub fn planar_chain(lengths: &[f64]) -> Mechanism {
    let rows: Vec<_> = lengths.iter().map(|&a| (JointKind::R, DhParams::new(0.0, 0.0, a, 0.0))).collect();
    Mechanism::serial_dh("planar", &rows).expect("valid planar chain")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{four_bar, JointSpec};
    use crate::pose::Rotation;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn canonical_charts() {
        let rr = canonical_map("planar_rr", &[2.0, 1.0]).unwrap();
        assert_eq!(rr.work_chart(), &WorkChart::Annulus { r_min: 1.0, r_max: 3.0 });
        assert_eq!(rr.config_chart(), &ConfigChart::circles(2));
        let p = canonical_map("pointing", &[]).unwrap();
        assert_eq!(p.work_chart(), &WorkChart::Sphere);
        let s = canonical_map("scara", &[2.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.config_chart().describe(), "S1xS1xI[0,1]");
        assert_eq!(s.work_chart().describe(), "S1x[1,3]x[0,1]");
    }

    #[test]
    fn bad_names_and_params() {
        assert!(matches!(canonical_map("delta", &[]), Err(KinematicsError::UnknownMap(_))));
        assert!(matches!(canonical_map("planar_rr", &[1.0, 2.0]), Err(KinematicsError::InvalidParams(_))));
        assert!(matches!(canonical_map("scara", &[2.0, 1.0, 1.0, 0.0]), Err(KinematicsError::InvalidParams(_))));
    }

    #[test]
    fn worked_forward_values() {
        let rr = canonical_map("planar_rr", &[2.0, 1.0]).unwrap();
        assert!(close(&rr.forward(&[0.0, 0.0]), &[3.0, 0.0], 1e-15));
        assert!(close(&rr.forward(&[0.0, PI]), &[1.0, 0.0], 1e-15));
        let p = canonical_map("pointing", &[]).unwrap();
        for b in [0.0, 1.0, 4.0] {
            assert!(close(&p.forward(&[FRAC_PI_2, b]), &[0.0, 0.0, 1.0], 1e-15));
        }
    }

    #[test]
    fn pointing_jacobian_at_origin() {
        let p = canonical_map("pointing", &[]).unwrap();
        let j = p.jacobian(&[0.0, 0.0]);
        assert_eq!(j.column(0).as_slice(), &[0.0, 0.0, 1.0]);
        assert!(close(j.column(1).as_slice(), &[0.0, 1.0, 0.0], 0.0));
    }

    #[test]
    fn planar_rr_determinant() {
        let rr = canonical_map("planar_rr", &[2.0, 1.0]).unwrap();
        for b in [0.3, FRAC_PI_2, 2.0] {
            let det = rr.jacobian(&[0.7, b]).determinant();
            assert!((det - 2.0 * b.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_mechanism_rejected() {
        let err = KinematicMap::from_mechanism(&four_bar(), 1, ChainOutput::Pose).unwrap_err();
        assert_eq!(err, KinematicsError::LoopClosureUnsupported);
        assert_eq!(err.to_string(), "loop closure unsupported");
    }

    #[test]
    fn chain_matches_dh_fold() {
        let m = fixture_4r();
        let k = KinematicMap::from_mechanism(&m, 4, ChainOutput::Pose).unwrap();
        let q = [0.3, -1.1, 2.0, 0.4];
        let mut expect = m.base_pose();
        for (j, &v) in m.joints.iter().zip(&q) {
            expect = expect.compose(&dh_transform(&j.dh.unwrap(), v, j.kind));
        }
        let (w, chain) = forward_kinematics(&k, &q).unwrap();
        let chain = chain.unwrap();
        let h = expect.to_homogeneous();
        assert!((chain.end.to_homogeneous() - h).amax() < 1e-12);
        assert!(close(&w[9..], &[h[(0, 3)], h[(1, 3)], h[(2, 3)]], 1e-12));
        assert!(chain.axes.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!(k.work_chart().contains(&w, 1e-12));
    }

    #[test]
    fn config_length_checked() {
        let k = canonical_map("pointing", &[]).unwrap();
        assert!(matches!(forward_kinematics(&k, &[0.0]), Err(KinematicsError::ConfigMismatch { .. })));
    }

    #[test]
    fn tree_chain_zero_columns_off_path() {
        let dh = DhParams::new(0.0, 0.0, 1.0, 0.0);
        let joints = vec![
            JointSpec::new(JointKind::R, 0, 1).with_dh(dh),
            JointSpec::new(JointKind::R, 1, 2).with_dh(dh),
            JointSpec::new(JointKind::R, 1, 3).with_dh(dh),
        ];
        let m = Mechanism::new("y", true, 3, RigidPose::identity(), joints).unwrap();
        let k = KinematicMap::from_mechanism(&m, 2, ChainOutput::PlanarPosition).unwrap();
        let j = k.jacobian(&[0.1, 0.2, 0.3]);
        assert_eq!(j.column(2).amax(), 0.0);
        assert!((j - k.numeric_jacobian(&[0.1, 0.2, 0.3], 1e-6)).amax() < 1e-8);
    }

    #[test]
    fn planar_angle_sum() {
        let m = planar_chain(&[1.0, 0.7, 0.4]);
        let k = KinematicMap::from_mechanism(&m, 3, ChainOutput::Orientation).unwrap();
        let q = [2.5, 1.9, -0.7];
        let chain = k.frame_chain(&q).unwrap();
        let expect = Rotation::from_angle_axis(Vector3::z(), q.iter().sum::<f64>().rem_euclid(TAU)).unwrap();
        assert!(chain.end.rotation.angle_to(&expect) < 1e-9);
    }

    proptest! {
        #[test]
        fn chain_jacobian_matches_differences(q in prop::collection::vec(-PI..PI, 4)) {
            let k = KinematicMap::from_mechanism(&fixture_4r(), 4, ChainOutput::Pose).unwrap();
            let a = k.jacobian(&q);
            let n = k.numeric_jacobian(&q, 1e-6);
            prop_assert!((&a - &n).amax() <= 1e-5 * a.amax().max(1.0));
        }

        #[test]
        fn canonical_jacobians_match_differences(a in -PI..PI, b in -PI..PI, h in 0.01..0.99f64) {
            for name in ["pointing", "planar_rr", "scara", "identity_torus"] {
                let k = canonical_map(name, &[]).unwrap();
                let c: Vec<f64> = [a, b, h][..k.config_chart().dim()].to_vec();
                let j = k.jacobian(&c);
                let n = k.numeric_jacobian(&c, 1e-6);
                prop_assert!((&j - &n).amax() <= 1e-5 * j.amax().max(1.0), "{name}");
            }
        }

        #[test]
        fn outputs_land_in_work_chart(a in -10.0..10.0f64, b in -10.0..10.0f64) {
            for name in ["pointing", "planar_rr"] {
                let k = canonical_map(name, &[]).unwrap();
                prop_assert!(k.work_chart().contains(&k.forward(&[a, b]), 1e-9));
            }
        }
    }
}
