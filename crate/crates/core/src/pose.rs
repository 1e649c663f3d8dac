//! Rigid-body orientation and pose.
//!
//! Orientations are stored as unit quaternions normalized to `w >= 0`;
//! matrices, angle-axis pairs, ZYX angles and screw parameters are views
//! computed on demand. Conversions that have a chart singularity return
//! an error instead of an arbitrary value.

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Tolerance on the norm of an axis handed to [`Rotation::from_angle_axis`].
pub const AXIS_NORM_TOL: f64 = 1e-9;
/// Rotations closer than this angle to the identity have no axis.
pub const IDENTITY_ANGLE_TOL: f64 = 1e-9;
/// Pitch values within this distance of `±π/2` are gimbal-locked.
pub const GIMBAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoseError {
    #[error("axis must be a unit vector (norm {0})")]
    NonUnitAxis(f64),
    #[error("axis undefined: rotation is the identity")]
    AxisUndefined,
    #[error("representation singular: pitch {0} is at gimbal lock")]
    RepresentationSingular(f64),
}

/// An element of SO(3) stored as a unit quaternion with `w >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub const fn identity() -> Self {
        Self { w: 1.0, x: 0.0, y: 0.0, z: 0.0 }
    }

    /// Builds a rotation from raw quaternion components, normalizing the
    /// norm and the sign of `w`.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let s = if w < 0.0 { -1.0 / n } else { 1.0 / n };
        Self { w: w * s, x: x * s, y: y * s, z: z * s }
    }

    /// Quaternion components `(w, x, y, z)`.
    pub fn quaternion(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Right-handed rotation by `angle` about the unit vector `axis`.
    pub fn from_angle_axis(axis: Vector3<f64>, angle: f64) -> Result<Self, PoseError> {
        let n = axis.norm();
        if (n - 1.0).abs() > AXIS_NORM_TOL {
            return Err(PoseError::NonUnitAxis(n));
        }
        let u = axis / n;
        let (s, c) = (angle / 2.0).sin_cos();
        Ok(Self::from_quaternion(c, s * u.x, s * u.y, s * u.z))
    }

    /// Axis and angle with the angle in `(0, π]`.
    ///
    /// For half turns both `u` and `-u` describe the rotation; the axis is
    /// then canonicalized so that its first nonzero coordinate is positive.
    /// No continuous choice exists, so this output jumps along some closed
    /// loops of half turns.
    pub fn to_angle_axis(&self) -> Result<(Vector3<f64>, f64), PoseError> {
        let v = Vector3::new(self.x, self.y, self.z);
        let s = v.norm();
        let angle = 2.0 * s.atan2(self.w);
        if angle < IDENTITY_ANGLE_TOL {
            return Err(PoseError::AxisUndefined);
        }
        let mut axis = v / s;
        if self.w.abs() < 1e-12 {
            axis = canonical_line_direction(axis);
        }
        Ok((axis, angle.min(PI)))
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    /// Converts a rotation matrix (assumed orthonormal with det 1).
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        // Shepperd: pick the largest diagonal term of the 4x4 symmetric form.
        let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
        let (w, x, y, z);
        if tr >= m[(0, 0)] && tr >= m[(1, 1)] && tr >= m[(2, 2)] {
            let s = (1.0 + tr).sqrt() * 2.0;
            w = s / 4.0;
            x = (m[(2, 1)] - m[(1, 2)]) / s;
            y = (m[(0, 2)] - m[(2, 0)]) / s;
            z = (m[(1, 0)] - m[(0, 1)]) / s;
        } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
            let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
            w = (m[(2, 1)] - m[(1, 2)]) / s;
            x = s / 4.0;
            y = (m[(0, 1)] + m[(1, 0)]) / s;
            z = (m[(0, 2)] + m[(2, 0)]) / s;
        } else if m[(1, 1)] >= m[(2, 2)] {
            let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
            w = (m[(0, 2)] - m[(2, 0)]) / s;
            x = (m[(0, 1)] + m[(1, 0)]) / s;
            y = s / 4.0;
            z = (m[(1, 2)] + m[(2, 1)]) / s;
        } else {
            let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
            w = (m[(1, 0)] - m[(0, 1)]) / s;
            x = (m[(0, 2)] + m[(2, 0)]) / s;
            y = (m[(1, 2)] + m[(2, 1)]) / s;
            z = s / 4.0;
        }
        Self::from_quaternion(w, x, y, z)
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let s = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        (2.0 * s.atan2(self.w)).min(PI)
    }

    pub fn inverse(&self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        let (a, b) = (self, other);
        Rotation::from_quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let q = Vector3::new(self.x, self.y, self.z);
        let t = 2.0 * q.cross(v);
        v + self.w * t + q.cross(&t)
    }

    /// Geodesic distance on SO(3), the angle of `self⁻¹ · other`.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        self.inverse().compose(other).angle()
    }
}

/// Flips `u` so that its first coordinate with magnitude above 1e-12 is positive.
pub fn canonical_line_direction(u: Vector3<f64>) -> Vector3<f64> {
    for i in 0..3 {
        if u[i].abs() > 1e-12 {
            return if u[i] < 0.0 { -u } else { u };
        }
    }
    u
}

/// Yaw-pitch-roll angles with `R = Rz(yaw) · Ry(pitch) · Rx(roll)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerZyx {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl EulerZyx {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn to_rotation(&self) -> Rotation {
        let z = Vector3::z();
        let y = Vector3::y();
        let x = Vector3::x();
        let rz = Rotation::from_angle_axis(z, self.yaw).expect("unit axis");
        let ry = Rotation::from_angle_axis(y, self.pitch).expect("unit axis");
        let rx = Rotation::from_angle_axis(x, self.roll).expect("unit axis");
        rz.compose(&ry).compose(&rx)
    }

    /// Inverse conversion; fails at gimbal lock where yaw and roll are not
    /// separately determined.
    pub fn from_rotation(r: &Rotation) -> Result<Self, PoseError> {
        let m = r.matrix();
        let pitch = (-m[(2, 0)]).atan2((m[(0, 0)].powi(2) + m[(1, 0)].powi(2)).sqrt());
        if (pitch.abs() - FRAC_PI_2).abs() < GIMBAL_TOL {
            return Err(PoseError::RepresentationSingular(pitch));
        }
        Ok(Self {
            yaw: m[(1, 0)].atan2(m[(0, 0)]),
            pitch,
            roll: m[(2, 1)].atan2(m[(2, 2)]),
        })
    }
}

/// Which way [`euler_convert`] runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EulerInput {
    Angles(EulerZyx),
    Rotation(Rotation),
}

/// Converts between ZYX angles and a rotation, returning the other form.
pub fn euler_convert(input: EulerInput) -> Result<EulerInput, PoseError> {
    match input {
        EulerInput::Angles(a) => Ok(EulerInput::Rotation(a.to_rotation())),
        EulerInput::Rotation(r) => EulerZyx::from_rotation(&r).map(EulerInput::Angles),
    }
}

/// An element of SE(3).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RigidPose {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

impl RigidPose {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self { rotation: Rotation::identity(), translation: t }
    }

    pub fn from_rotation(r: Rotation) -> Self {
        Self { rotation: r, translation: Vector3::zeros() }
    }

    /// `self ∘ other`: the homogeneous matrix of the result is the product
    /// of the two homogeneous matrices.
    pub fn compose(&self, other: &RigidPose) -> RigidPose {
        RigidPose {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.translation + self.rotation.apply(&other.translation),
        }
    }

    pub fn inverse(&self) -> RigidPose {
        let r = self.rotation.inverse();
        RigidPose { rotation: r, translation: -r.apply(&self.translation) }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.apply(p) + self.translation
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation.matrix());
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        h
    }

    /// Reads the rotation block and translation column; the bottom row is ignored.
    pub fn from_homogeneous(h: &Matrix4<f64>) -> RigidPose {
        let r: Matrix3<f64> = h.fixed_view::<3, 3>(0, 0).into_owned();
        RigidPose {
            rotation: Rotation::from_matrix(&r),
            translation: h.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }

    /// Row-major 16-number form used in documents.
    pub fn to_row_major(&self) -> [f64; 16] {
        let h = self.to_homogeneous();
        let mut out = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                out[4 * r + c] = h[(r, c)];
            }
        }
        out
    }

    pub fn from_row_major(v: &[f64; 16]) -> RigidPose {
        RigidPose::from_homogeneous(&Matrix4::from_row_slice(v))
    }

    /// Chasles decomposition into a rotation about a line plus a slide along it.
    pub fn screw(&self) -> ScrewParams {
        let q = self.rotation.quaternion();
        let v = Vector3::new(q[1], q[2], q[3]);
        let s = v.norm();
        let t = self.translation;
        if s == 0.0 {
            let len = t.norm();
            let dir = if len > 0.0 { t / len } else { Vector3::z() };
            return ScrewParams { axis_point: Vector3::zeros(), axis_direction: dir, angle: 0.0, slide: len };
        }
        let u = v / s;
        let angle = self.rotation.angle();
        let slide = u.dot(&t);
        let t_perp = t - slide * u;
        // (I - R) p = t_perp with p ⊥ u
        let cot_half = (angle / 2.0).cos() / (angle / 2.0).sin();
        let axis_point = 0.5 * (t_perp + cot_half * u.cross(&t_perp));
        ScrewParams { axis_point, axis_direction: u, angle, slide }
    }
}

/// A screw displacement: rotate by `angle` about the line through
/// `axis_point` along `axis_direction`, then slide by `slide` along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrewParams {
    pub axis_point: Vector3<f64>,
    pub axis_direction: Vector3<f64>,
    pub angle: f64,
    pub slide: f64,
}

impl ScrewParams {
    pub fn to_pose(&self) -> RigidPose {
        let r = Rotation::from_angle_axis(self.axis_direction, self.angle).expect("unit screw axis");
        let p = self.axis_point;
        RigidPose { rotation: r, translation: p - r.apply(&p) + self.slide * self.axis_direction }
    }
}

/// Pose composition, `a ∘ b`.
pub fn pose_compose(a: &RigidPose, b: &RigidPose) -> RigidPose {
    a.compose(b)
}

pub fn pose_to_homogeneous(p: &RigidPose) -> Matrix4<f64> {
    p.to_homogeneous()
}

pub fn screw_decompose(p: &RigidPose) -> ScrewParams {
    p.screw()
}
