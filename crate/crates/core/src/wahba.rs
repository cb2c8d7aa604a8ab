//! Single-frame attitude solutions: TRIAD and Davenport's q-method.
//!
//! The Davenport matrix is laid out to match the vector-first quaternion:
//!
//! ```text
//! K = [ S − tr(B)·I   z     ]
//!     [ zᵀ            tr(B) ]
//! ```
//!
//! so that `tr(A(q)·Bᵀ) = qᵀKq` for `q = (x, y, z; w)`.

use crate::attitude::{Quaternion, RotationMatrix};
use crate::numerics::{jacobi_eigen_sym, Mat3, Mat4, Vec3};
use crate::startracker::StarObservation;
use crate::{Error, Result};

/// `B = Σ aᵢ bᵢ rᵢᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeProfileMatrix {
    pub b: Mat3,
    pub total_weight: f64,
}

impl AttitudeProfileMatrix {
    pub fn from_observations(obs: &[StarObservation]) -> Result<Self> {
        if obs.is_empty() {
            return Err(Error::invalid("no observations"));
        }
        let mut b = Mat3::zeros();
        let mut total = 0.0;
        for o in obs {
            if !(o.weight.is_finite() && o.weight > 0.0) {
                return Err(Error::invalid(format!(
                    "weight must be positive, got {}",
                    o.weight
                )));
            }
            b += o.b.outer(&o.r).scale(o.weight);
            total += o.weight;
        }
        Ok(AttitudeProfileMatrix {
            b,
            total_weight: total,
        })
    }

    /// `z = (B₂₃ − B₃₂, B₃₁ − B₁₃, B₁₂ − B₂₁)`.
    pub fn z(&self) -> Vec3 {
        let m = &self.b.0;
        Vec3::new(m[1][2] - m[2][1], m[2][0] - m[0][2], m[0][1] - m[1][0])
    }

    pub fn davenport(&self) -> DavenportMatrix {
        let tr = self.b.trace();
        let s = self.b + self.b.transpose();
        let z = self.z();
        let mut k = Mat4::zeros();
        k.set_block(0, 0, &(s - Mat3::identity().scale(tr)));
        for i in 0..3 {
            k.0[i][3] = z[i];
            k.0[3][i] = z[i];
        }
        k.0[3][3] = tr;
        DavenportMatrix { k }
    }
}

/// `z = Σ aᵢ (bᵢ × rᵢ)`, the direct form of [`AttitudeProfileMatrix::z`].
pub fn cross_sum(obs: &[StarObservation]) -> Vec3 {
    obs.iter()
        .fold(Vec3::zeros(), |z, o| z + o.b.cross(&o.r) * o.weight)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DavenportMatrix {
    pub k: Mat4,
}

impl DavenportMatrix {
    /// `qᵀKq`.
    pub fn gain(&self, q: &Quaternion) -> f64 {
        let v = q.to_vec4();
        v.dot(&(self.k * v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WahbaSolution {
    /// Optimal attitude, scalar part ≥ 0.
    pub q: Quaternion,
    pub lambda_max: f64,
    /// `Σ aᵢ‖bᵢ − A(q)rᵢ‖²`.
    pub loss: f64,
}

/// `Σ aᵢ‖bᵢ − A·rᵢ‖²`.
pub fn wahba_loss(a: &RotationMatrix, obs: &[StarObservation]) -> f64 {
    obs.iter()
        .map(|o| o.weight * (o.b - a.apply(o.r)).norm_squared())
        .sum()
}

/// Davenport's q-method: the eigenvector of `K` with the largest eigenvalue.
pub fn davenport_solve(obs: &[StarObservation]) -> Result<WahbaSolution> {
    if obs.len() < 2 {
        return Err(Error::UnderdeterminedAttitude);
    }
    let profile = AttitudeProfileMatrix::from_observations(obs)?;
    let k = profile.davenport();
    let eig = jacobi_eigen_sym(&k.k)?;
    let gap = eig.values[0] - eig.values[1];
    if gap < 1e-9 * profile.total_weight {
        return Err(Error::UnderdeterminedAttitude);
    }
    let q = Quaternion::from_vec4(&eig.vectors[0])
        .normalize()?
        .canonical();
    let loss = wahba_loss(&q.to_matrix()?, obs);
    Ok(WahbaSolution {
        q,
        lambda_max: eig.values[0],
        loss,
    })
}

/// Orthonormal triad `[v₁ v₂ v₃]` with `v₁ = u₁`, `v₂ ∥ u₁ × u₂`.
fn triad_basis(u1: Vec3, u2: Vec3) -> Result<Mat3> {
    let c = u1.cross(&u2);
    if c.norm() <= 1e-8 {
        return Err(Error::DegenerateGeometry);
    }
    let v2 = c * (1.0 / c.norm());
    let v3 = u1.cross(&v2);
    Ok(Mat3::from_columns(&[u1, v2, v3]))
}

/// TRIAD attitude from two reference/body pairs; the first pair is honoured
/// exactly.
pub fn triad(r1: Vec3, r2: Vec3, b1: Vec3, b2: Vec3) -> Result<RotationMatrix> {
    for v in [r1, r2, b1, b2] {
        if (v.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid("TRIAD needs unit vectors"));
        }
    }
    let v = triad_basis(r1, r2)?;
    let w = triad_basis(b1, b2)?;
    Ok(RotationMatrix(w * v.transpose()))
}
