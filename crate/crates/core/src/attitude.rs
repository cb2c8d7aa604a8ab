//! Attitude representations and quaternion kinematics.
//!
//! Conventions used throughout the crate:
//!
//! - Quaternions are stored vector-first, scalar-last: `(x, y, z; w)`.
//! - `⊗` is the Hamilton product (`i ⊗ j = k`).
//! - The attitude matrix `A(q)` is the frame transformation taking inertial
//!   (reference) coordinates to body coordinates, `A·r = b`. In terms of the
//!   Hamilton product, `A(q)·v = vec(q* ⊗ (v; 0) ⊗ q)`.
//! - Kinematics follow `q̇ = ½ (ω; 0) ⊗ q`.

use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::numerics::{Mat3, Mat4, Matrix, Vec3, Vec4, Vector};
use crate::{Error, Result};

/// Unit-norm tolerance for inputs documented as unit quaternions.
const UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Quaternion { x, y, z, w }
    }

    pub fn from_parts(v: Vec3, w: f64) -> Self {
        Quaternion::new(v[0], v[1], v[2], w)
    }

    /// Rotation of `angle` radians about `axis` (normalised internally).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self> {
        let a = axis
            .normalized()
            .ok_or_else(|| Error::invalid("rotation axis has zero length"))?;
        let (s, c) = (0.5 * angle).sin_cos();
        Ok(Quaternion::from_parts(a * s, c))
    }

    pub fn vector(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn scalar(&self) -> f64 {
        self.w
    }

    pub fn to_vec4(&self) -> Vec4 {
        Vector([self.x, self.y, self.z, self.w])
    }

    pub fn from_vec4(v: &Vec4) -> Self {
        Quaternion::new(v[0], v[1], v[2], v[3])
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.to_vec4().dot(&o.to_vec4())
    }

    pub fn norm(&self) -> f64 {
        self.to_vec4().norm()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 1e-12) {
            return Err(Error::DegenerateQuaternion);
        }
        Ok(Quaternion::from_vec4(&(self.to_vec4() * (1.0 / n))))
    }

    /// Negated vector part; the inverse for unit quaternions.
    pub fn conjugate(&self) -> Self {
        Quaternion::new(-self.x, -self.y, -self.z, self.w)
    }

    /// Representative of the same attitude with `⟨self, reference⟩ ≥ 0`.
    pub fn aligned_with(&self, reference: &Self) -> Self {
        if self.dot(reference) < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// Representative with non-negative scalar part.
    pub fn canonical(&self) -> Self {
        if self.w < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// Gibbs vector `q₁:₃ / w`.
    pub fn to_gibbs(&self) -> Result<GibbsVector> {
        if self.w.abs() <= 1e-9 {
            return Err(Error::GibbsSingularity);
        }
        Ok(GibbsVector(self.vector() * (1.0 / self.w)))
    }

    /// Time derivative `½ (ω; 0) ⊗ q`.
    pub fn kinematics(&self, omega: Vec3) -> Quaternion {
        let d = Quaternion::from_parts(omega, 0.0) * *self;
        Quaternion::from_vec4(&(d.to_vec4() * 0.5))
    }

    /// Exact increment `exp(½ (ω; 0) dt)` for constant `ω` over `dt`.
    pub fn rotation_increment(omega: Vec3, dt: f64) -> Quaternion {
        let rate = omega.norm();
        let half = 0.5 * rate * dt;
        // sin(half)/rate, with the series near zero rate
        let k = if half.abs() < 1e-8 {
            0.5 * dt * (1.0 - half * half / 6.0)
        } else {
            half.sin() / rate
        };
        Quaternion::from_parts(omega * k, half.cos())
    }

    /// Propagate through `dt` seconds of constant body rate `omega`.
    pub fn integrate(&self, omega: Vec3, dt: f64) -> Quaternion {
        if omega.norm() * dt == 0.0 {
            return *self;
        }
        let q = Self::rotation_increment(omega, dt) * *self;
        // The increment is unit, so the product norm stays near 1.
        q.normalize().unwrap_or(q)
    }

    /// Attitude matrix `A(q)` mapping inertial to body coordinates.
    pub fn to_matrix(&self) -> Result<RotationMatrix> {
        if !self.is_unit(UNIT_TOL) {
            return Err(Error::invalid(format!(
                "attitude matrix needs a unit quaternion, norm is {}",
                self.norm()
            )));
        }
        let v = self.vector();
        let w = self.w;
        let m = Mat3::identity().scale(w * w - v.norm_squared()) + v.outer(&v).scale(2.0)
            - v.cross_matrix().scale(2.0 * w);
        Ok(RotationMatrix(m))
    }

    /// Quaternion (scalar part ≥ 0) for a proper orthogonal attitude matrix.
    pub fn from_matrix(a: &RotationMatrix) -> Quaternion {
        let m = &a.0 .0;
        let tr = m[0][0] + m[1][1] + m[2][2];
        // Shepperd: pick the largest of w², x², y², z² for conditioning.
        let cands = [m[0][0], m[1][1], m[2][2], tr];
        let best = (0..4)
            .max_by(|&i, &j| cands[i].total_cmp(&cands[j]))
            .unwrap_or(3);
        let q = match best {
            0 => {
                let s = 2.0 * (1.0 + 2.0 * m[0][0] - tr).sqrt();
                Quaternion::new(
                    0.25 * s,
                    (m[0][1] + m[1][0]) / s,
                    (m[0][2] + m[2][0]) / s,
                    (m[1][2] - m[2][1]) / s,
                )
            }
            1 => {
                let s = 2.0 * (1.0 + 2.0 * m[1][1] - tr).sqrt();
                Quaternion::new(
                    (m[0][1] + m[1][0]) / s,
                    0.25 * s,
                    (m[1][2] + m[2][1]) / s,
                    (m[2][0] - m[0][2]) / s,
                )
            }
            2 => {
                let s = 2.0 * (1.0 + 2.0 * m[2][2] - tr).sqrt();
                Quaternion::new(
                    (m[0][2] + m[2][0]) / s,
                    (m[1][2] + m[2][1]) / s,
                    0.25 * s,
                    (m[0][1] - m[1][0]) / s,
                )
            }
            _ => {
                let s = 2.0 * (1.0 + tr).sqrt();
                Quaternion::new(
                    (m[1][2] - m[2][1]) / s,
                    (m[2][0] - m[0][2]) / s,
                    (m[0][1] - m[1][0]) / s,
                    0.25 * s,
                )
            }
        };
        q.normalize().unwrap_or(q).canonical()
    }

    /// Rotation angle between two attitudes, `2·acos(|⟨a, b⟩|)` in `[0, π]`.
    pub fn error_angle(&self, other: &Self) -> f64 {
        // atan2 form keeps precision for nearly equal attitudes where acos
        // would lose half the digits: |a−b| = 2 sin(θ/4), |a+b| = 2 cos(θ/4).
        let a = self.aligned_with(other);
        let diff = (*other - a).norm();
        let sum = (*other + a).norm();
        (4.0 * diff.atan2(sum)).min(std::f64::consts::PI)
    }

    /// Matrix `Ξ(q)` with `(ω; 0) ⊗ q = Ξ(q)·ω` (4×3, vector-first rows).
    pub fn xi(&self) -> Matrix<4, 3> {
        let v = self.vector();
        let top = Mat3::identity().scale(self.w) - v.cross_matrix();
        let mut m = Matrix::<4, 3>::zeros();
        m.set_block(0, 0, &top);
        for j in 0..3 {
            m.0[3][j] = -v[j];
        }
        m
    }

    /// Left-multiplication matrix `Ω(ω)` with `(ω; 0) ⊗ q = Ω(ω)·q`.
    pub fn omega_matrix(omega: Vec3) -> Mat4 {
        let mut m = Mat4::zeros();
        m.set_block(0, 0, &omega.cross_matrix());
        for i in 0..3 {
            m.0[i][3] = omega[i];
            m.0[3][i] = -omega[i];
        }
        m
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    /// Hamilton product.
    fn mul(self, b: Quaternion) -> Quaternion {
        let (av, aw) = (self.vector(), self.w);
        let (bv, bw) = (b.vector(), b.w);
        let v = bv * aw + av * bw + av.cross(&bv);
        Quaternion::from_parts(v, aw * bw - av.dot(&bv))
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.x, -self.y, -self.z, -self.w)
    }
}

impl std::ops::Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::from_vec4(&(self.to_vec4() - o.to_vec4()))
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::from_vec4(&(self.to_vec4() + o.to_vec4()))
    }
}

/// Gibbs vector (Rodrigues parameters), `tan(θ/2)·axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsVector(pub Vec3);

impl GibbsVector {
    /// `(g; 1)/√(1+‖g‖²)`, scalar part positive.
    pub fn to_quaternion(&self) -> Quaternion {
        let s = 1.0 / (1.0 + self.0.norm_squared()).sqrt();
        Quaternion::from_parts(self.0 * s, s)
    }
}

/// Proper orthogonal 3×3 attitude matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(pub Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn transpose(&self) -> Self {
        RotationMatrix(self.0.transpose())
    }

    /// Largest entry of `|AᵀA − I|` and `|det A − 1|`.
    pub fn orthogonality_error(&self) -> f64 {
        let e = (self.0.transpose() * self.0 - Mat3::identity()).max_abs();
        e.max((self.0.determinant() - 1.0).abs())
    }

    pub fn to_euler(&self) -> EulerAngles {
        EulerAngles::from_matrix(self)
    }
}

/// Roll, pitch, yaw (radians) for reporting, intrinsic Z-Y-X sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    /// For `A = R_x(roll)·R_y(pitch)·R_z(yaw)` in frame-transformation form.
    pub fn from_matrix(a: &RotationMatrix) -> Self {
        let m = &a.0 .0;
        EulerAngles {
            roll: m[1][2].atan2(m[2][2]),
            pitch: (-m[0][2]).clamp(-1.0, 1.0).asin(),
            yaw: m[0][1].atan2(m[0][0]),
        }
    }

    pub fn to_matrix(&self) -> RotationMatrix {
        let (sr, cr) = self.roll.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        let rx = Matrix([[1.0, 0.0, 0.0], [0.0, cr, sr], [0.0, -sr, cr]]);
        let ry = Matrix([[cp, 0.0, -sp], [0.0, 1.0, 0.0], [sp, 0.0, cp]]);
        let rz = Matrix([[cy, sy, 0.0], [-sy, cy, 0.0], [0.0, 0.0, 1.0]]);
        RotationMatrix(rx * ry * rz)
    }
}
