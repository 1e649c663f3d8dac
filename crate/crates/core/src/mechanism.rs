//! Declarative mechanism model: joints, joint spaces, the link graph,
//! Denavit-Hartenberg frames and Grübler mobility.

use crate::pose::{RigidPose, Rotation};
use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechanismError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
}

/// The six lower-pair joint kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JointKind {
    /// revolute
    R,
    /// prismatic
    P,
    /// helical
    H,
    /// cylindrical
    C,
    /// spherical
    S,
    /// planar
    E,
}

impl JointKind {
    pub fn dof(self) -> usize {
        match self {
            JointKind::R | JointKind::P | JointKind::H => 1,
            JointKind::C => 2,
            JointKind::S | JointKind::E => 3,
        }
    }

    /// Number of bounded interval factors in the joint chart.
    pub fn interval_factors(self) -> usize {
        match self {
            JointKind::R => 0,
            JointKind::P | JointKind::H | JointKind::C => 1,
            JointKind::S | JointKind::E => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhParams {
    pub theta: f64,
    pub d: f64,
    pub a: f64,
    pub alpha: f64,
}

impl DhParams {
    pub fn new(theta: f64, d: f64, a: f64, alpha: f64) -> Self {
        Self { theta, d, a, alpha }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.d.is_finite() && self.a.is_finite() && self.alpha.is_finite()
    }

    /// The standard DH homogeneous matrix `Rz(θ) Tz(d) Tx(a) Rx(α)`.
    pub fn matrix(&self) -> Matrix4<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sa, ca) = self.alpha.sin_cos();
        Matrix4::new(
            ct, -ca * st, sa * st, self.a * ct,
            st, ca * ct, -sa * ct, self.a * st,
            0.0, sa, ca, self.d,
            0.0, 0.0, 0.0, 1.0,
        )
    }
}

/// Substitutes the joint variable (θ for R, d for P) and returns the frame transform.
pub fn dh_transform(p: &DhParams, joint_variable: f64, kind: JointKind) -> RigidPose {
    let mut q = *p;
    match kind {
        JointKind::P => q.d = joint_variable,
        _ => q.theta = joint_variable,
    }
    let m = q.matrix();
    let r = m.fixed_view::<3, 3>(0, 0).into_owned();
    RigidPose::new(Rotation::from_matrix(&r), m.fixed_view::<3, 1>(0, 3).into_owned())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub kind: JointKind,
    pub parent: usize,
    pub child: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dh: Option<DhParams>,
    #[serde(default)]
    pub limits: Vec<[f64; 2]>,
    #[serde(default)]
    pub actuated: bool,
    /// Screw pitch of a helical joint. Stored, not used kinematically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
    /// Optional declared degree of freedom, checked against `kind`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<usize>,
}

impl JointSpec {
    pub fn new(kind: JointKind, parent: usize, child: usize) -> Self {
        Self { kind, parent, child, dh: None, limits: Vec::new(), actuated: false, pitch: None, dof: None }
    }

    pub fn with_dh(mut self, dh: DhParams) -> Self {
        self.dh = Some(dh);
        self
    }

    pub fn with_limits(mut self, limits: Vec<[f64; 2]>) -> Self {
        self.limits = limits;
        self
    }

    pub fn actuated(mut self) -> Self {
        self.actuated = true;
        self
    }

    pub fn dof(&self) -> usize {
        self.kind.dof()
    }

    fn validate(&self, index: usize) -> Result<(), MechanismError> {
        let err = |m: String| Err(MechanismError::Validation(format!("joint {index}: {m}")));
        if let Some(d) = self.dof {
            if d != self.kind.dof() {
                return err(format!("declared dof {d} does not match kind {:?} (dof {})", self.kind, self.kind.dof()));
            }
        }
        let need = self.kind.interval_factors();
        let allowed = if self.kind == JointKind::R { 1 } else { need };
        if self.limits.len() < need || self.limits.len() > allowed {
            return err(format!("kind {:?} needs {need} interval limit(s), got {}", self.kind, self.limits.len()));
        }
        for [lo, hi] in &self.limits {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return err(format!("limit [{lo}, {hi}] is not a nonempty interval"));
            }
        }
        if let Some(dh) = &self.dh {
            if !dh.is_finite() {
                return err("non-finite DH parameter".into());
            }
        }
        Ok(())
    }
}

/// One factor of a joint or configuration chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChartFactor {
    Circle,
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointChart {
    pub factors: Vec<ChartFactor>,
}

/// Joint space chart. Spherical and planar joints use a bounded disk
/// (two intervals taken from the limits) times a circle.
pub fn joint_chart(j: &JointSpec) -> JointChart {
    let iv = |k: usize| {
        let [lo, hi] = j.limits.get(k).copied().unwrap_or([-1.0, 1.0]);
        ChartFactor::Interval { lo, hi }
    };
    let factors = match j.kind {
        JointKind::R => vec![ChartFactor::Circle],
        JointKind::P | JointKind::H => vec![iv(0)],
        JointKind::C => vec![iv(0), ChartFactor::Circle],
        JointKind::S | JointKind::E => vec![iv(0), iv(1), ChartFactor::Circle],
    };
    JointChart { factors }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Serial,
    Tree,
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityReport {
    pub naive_mobility: i64,
    pub redundancy_override: i64,
    pub effective_mobility: i64,
    pub planar: bool,
}

/// A set of links joined by joints. Link 0 is the fixed base; links
/// `1..=links` move.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    pub name: String,
    pub planar: bool,
    pub links: usize,
    /// Row-major homogeneous matrix of the base frame, kept verbatim so
    /// documents round-trip exactly.
    pub base_frame: [f64; 16],
    pub joints: Vec<JointSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MechanismDoc {
    name: String,
    #[serde(default)]
    planar: bool,
    links: usize,
    #[serde(default = "identity_row_major")]
    base_frame: Vec<f64>,
    joints: Vec<JointDoc>,
}

// A joint as written in the document; separate from JointSpec so the
// strict field set lives in one place.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    kind: JointKind,
    parent: usize,
    child: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dh: Option<DhParams>,
    #[serde(default)]
    limits: Vec<[f64; 2]>,
    #[serde(default)]
    actuated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pitch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dof: Option<usize>,
}

fn identity_row_major() -> Vec<f64> {
    RigidPose::identity().to_row_major().to_vec()
}

impl Mechanism {
    /// Builds and validates a mechanism.
    pub fn new(
        name: impl Into<String>,
        planar: bool,
        links: usize,
        base_frame: RigidPose,
        joints: Vec<JointSpec>,
    ) -> Result<Self, MechanismError> {
        let m = Self { name: name.into(), planar, links, base_frame: base_frame.to_row_major(), joints };
        m.validate()?;
        Ok(m)
    }

    pub fn base_pose(&self) -> RigidPose {
        RigidPose::from_row_major(&self.base_frame)
    }

    /// Convenience constructor for a serial chain of R/P joints given by DH rows.
    pub fn serial_dh(name: &str, rows: &[(JointKind, DhParams)]) -> Result<Self, MechanismError> {
        let joints = rows
            .iter()
            .enumerate()
            .map(|(i, (k, dh))| {
                let j = JointSpec::new(*k, i, i + 1).with_dh(*dh).actuated();
                if *k == JointKind::P {
                    j.with_limits(vec![[-1.0, 1.0]])
                } else {
                    j
                }
            })
            .collect();
        Mechanism::new(name, false, rows.len(), RigidPose::identity(), joints)
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<(), MechanismError> {
        if self.joints.is_empty() {
            return Err(MechanismError::Validation("mechanism has no joints".into()));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if j.parent > self.links || j.child > self.links {
                return Err(MechanismError::Validation(format!(
                    "joint {i}: link index out of range 0..={}",
                    self.links
                )));
            }
            if j.parent == j.child {
                return Err(MechanismError::Validation(format!("joint {i}: connects link {} to itself", j.parent)));
            }
            j.validate(i)?;
        }
        let reach = self.reachable_from_base();
        if let Some(missing) = reach.iter().position(|r| !r) {
            return Err(MechanismError::Validation(format!("graph is disconnected: link {missing} unreachable from base")));
        }
        Ok(())
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.links + 1];
        for (i, j) in self.joints.iter().enumerate() {
            adj[j.parent].push((j.child, i));
            adj[j.child].push((j.parent, i));
        }
        adj
    }

    fn reachable_from_base(&self) -> Vec<bool> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.links + 1];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Serial iff the graph is a path starting at the base, tree iff
    /// acyclic otherwise, parallel iff there is a cycle.
    pub fn classify(&self) -> Topology {
        // connected graph on links+1 vertices: acyclic iff edges == vertices - 1
        if self.joints.len() > self.links {
            return Topology::Parallel;
        }
        let adj = self.adjacency();
        let is_path = adj[0].len() <= 1 && adj.iter().all(|a| a.len() <= 2);
        if is_path {
            Topology::Serial
        } else {
            Topology::Tree
        }
    }

    /// Grübler mobility, spatial (`6(n−g) + Σf`) or planar (`3(n−g) + Σf`).
    pub fn mobility(&self, planar: bool, redundancy_override: u32) -> MobilityReport {
        let n = self.links as i64;
        let g = self.joints.len() as i64;
        let k = if planar { 3 } else { 6 };
        let sum_f: i64 = self.joints.iter().map(|j| j.dof() as i64).sum();
        let naive = k * (n - g) + sum_f;
        MobilityReport {
            naive_mobility: naive,
            redundancy_override: redundancy_override as i64,
            effective_mobility: naive - redundancy_override as i64,
            planar,
        }
    }

    /// Joints along the unique base-to-`link` path, in order from the base.
    /// Only meaningful for acyclic mechanisms.
    pub fn path_to_link(&self, link: usize) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let mut via: Vec<Option<(usize, usize)>> = vec![None; self.links + 1];
        let mut seen = vec![false; self.links + 1];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &(u, ji) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    via[u] = Some((v, ji));
                    queue.push_back(u);
                }
            }
        }
        if link > self.links || !seen[link] {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = link;
        while cur != 0 {
            let (prev, ji) = via[cur]?;
            out.push(ji);
            cur = prev;
        }
        out.reverse();
        Some(out)
    }

    pub fn from_json(text: &str) -> Result<Self, MechanismError> {
        let doc: MechanismDoc = serde_json::from_str(text).map_err(|e| MechanismError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let frame: [f64; 16] = doc.base_frame.as_slice().try_into().map_err(|_| {
            MechanismError::Validation(format!("base_frame needs 16 numbers, got {}", doc.base_frame.len()))
        })?;
        if frame[12..] != [0.0, 0.0, 0.0, 1.0] {
            return Err(MechanismError::Validation("base_frame bottom row must be 0 0 0 1".into()));
        }
        let r = Matrix3::from_fn(|i, j| frame[4 * i + j]);
        if (r.transpose() * r - Matrix3::identity()).amax() > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(MechanismError::Validation("base_frame rotation block is not a rotation".into()));
        }
        let joints = doc
            .joints
            .into_iter()
            .map(|j| JointSpec {
                kind: j.kind,
                parent: j.parent,
                child: j.child,
                dh: j.dh,
                limits: j.limits,
                actuated: j.actuated,
                pitch: j.pitch,
                dof: j.dof,
            })
            .collect();
        let m = Mechanism { name: doc.name, planar: doc.planar, links: doc.links, base_frame: frame, joints };
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let doc = MechanismDoc {
            name: self.name.clone(),
            planar: self.planar,
            links: self.links,
            base_frame: self.base_frame.to_vec(),
            joints: self
                .joints
                .iter()
                .map(|j| JointDoc {
                    kind: j.kind,
                    parent: j.parent,
                    child: j.child,
                    dh: j.dh,
                    limits: j.limits.clone(),
                    actuated: j.actuated,
                    pitch: j.pitch,
                    dof: j.dof,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("mechanism serializes")
    }
}

pub fn parse_mechanism(text: &str) -> Result<Mechanism, MechanismError> {
    Mechanism::from_json(text)
}

pub fn classify_mechanism(m: &Mechanism) -> Topology {
    m.classify()
}

pub fn mobility(m: &Mechanism, planar: bool, redundancy_override: u32) -> MobilityReport {
    m.mobility(planar, redundancy_override)
}

/// Planar four-bar: three moving links and four revolute joints in one loop.
pub fn four_bar() -> Mechanism {
    let joints = vec![
        JointSpec::new(JointKind::R, 0, 1).actuated(),
        JointSpec::new(JointKind::R, 1, 2),
        JointSpec::new(JointKind::R, 2, 3),
        JointSpec::new(JointKind::R, 3, 0),
    ];
    Mechanism::new("four-bar", true, 3, RigidPose::identity(), joints).expect("valid four-bar")
}

/// Stewart platform with SPS legs: 12 strut bodies plus the platform.
pub fn stewart_platform() -> Mechanism {
    let platform = 13;
    let disk = vec![[-0.5, 0.5], [-0.5, 0.5]];
    let mut joints = Vec::new();
    for leg in 0..6 {
        let lower = 1 + 2 * leg;
        let upper = lower + 1;
        joints.push(JointSpec::new(JointKind::S, 0, lower).with_limits(disk.clone()));
        joints.push(JointSpec::new(JointKind::P, lower, upper).with_limits(vec![[0.5, 1.5]]).actuated());
        joints.push(JointSpec::new(JointKind::S, upper, platform).with_limits(disk.clone()));
    }
    Mechanism::new("stewart", false, 13, RigidPose::identity(), joints).expect("valid stewart platform")
}
