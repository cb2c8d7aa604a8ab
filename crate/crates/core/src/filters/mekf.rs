use crate::attitude::Quaternion;
use crate::numerics::{Mat3, Mat6, Matrix, Vec3, Vec6};
use crate::{Error, Result};

use super::{check_dt, check_measurement, NoiseParams};

/// Reference attitude plus error state `Δx = (δa, δβ)`, attitude error
/// stacked on gyro bias error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MekfState {
    pub q_ref: Quaternion,
    pub dx: Vec6,
    pub p: Mat6,
}

impl MekfState {
    pub fn new(q_ref: Quaternion, p: Mat6) -> Self {
        MekfState {
            q_ref,
            dx: Vec6::zeros(),
            p,
        }
    }

    /// Block-diagonal starting covariance.
    pub fn with_variances(q_ref: Quaternion, attitude: f64, bias: f64) -> Self {
        let mut p = Mat6::zeros();
        for i in 0..3 {
            p.0[i][i] = attitude;
            p.0[i + 3][i + 3] = bias;
        }
        MekfState::new(q_ref, p)
    }

    /// Covariance of the attitude error.
    pub fn attitude_covariance(&self) -> Mat3 {
        self.p.block::<3, 3>(0, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MekfMatrices {
    pub f: Mat6,
    pub g: Mat6,
    pub q: Mat6,
    pub h: Matrix<3, 6>,
}

pub fn mekf_build_matrices(np: &NoiseParams, omega: Vec3, dt: f64) -> MekfMatrices {
    let i3 = Mat3::identity();
    let (sv2, su2) = (np.sigma_v * np.sigma_v, np.sigma_u * np.sigma_u);

    let mut f = Mat6::zeros();
    f.set_block(0, 0, &(-omega.cross_matrix()));
    f.set_block(0, 3, &(-i3));

    let mut g = Mat6::zeros();
    g.set_block(0, 0, &(-i3));
    g.set_block(3, 3, &i3);

    let mut q = Mat6::zeros();
    let off = i3.scale(-0.5 * su2 * dt * dt);
    q.set_block(0, 0, &i3.scale(sv2 * dt + su2 * dt * dt * dt / 3.0));
    q.set_block(0, 3, &off);
    q.set_block(3, 0, &off);
    q.set_block(3, 3, &i3.scale(su2 * dt));

    let mut h = Matrix::<3, 6>::zeros();
    h.set_block(0, 0, &i3);

    MekfMatrices { f, g, q, h }
}

fn clear_bias(p: &mut Mat6) {
    for i in 0..6 {
        for j in 3..6 {
            p.0[i][j] = 0.0;
            p.0[j][i] = 0.0;
        }
    }
}

pub fn mekf_predict(s: MekfState, omega: Vec3, dt: f64, np: &NoiseParams) -> Result<MekfState> {
    check_dt(dt)?;
    let m = mekf_build_matrices(np, omega, dt);
    let phi = Mat6::identity() + m.f.scale(dt);
    let mut p = (phi * s.p * phi.transpose() + m.g * m.q * m.g.transpose()).symmetrized();
    if np.zero_bias_blocks {
        clear_bias(&mut p);
    }
    if !p.is_finite() {
        return Err(Error::NumericalFailure(
            "MEKF covariance became non-finite".into(),
        ));
    }
    Ok(MekfState {
        q_ref: s.q_ref.integrate(omega, dt),
        dx: s.dx,
        p,
    })
}

/// Error quaternion `q_meas ⊗ q_ref⁻¹` with positive scalar part, mapped to
/// the rotation-angle scaled Gibbs vector `2 q_e,1:3 / w`.
pub(crate) fn attitude_innovation(q_meas: &Quaternion, q_ref: &Quaternion) -> Result<Vec3> {
    let qe = (*q_meas * q_ref.conjugate()).canonical();
    if qe.w <= 1e-9 {
        return Err(Error::GibbsSingularity);
    }
    Ok(qe.vector() * (2.0 / qe.w))
}

/// `normalize((a; 2))`, the unit quaternion whose scaled Gibbs vector is `a`.
pub(crate) fn error_quaternion(a: Vec3) -> Result<Quaternion> {
    Quaternion::from_parts(a, 2.0).normalize()
}

pub fn mekf_update(s: MekfState, q_meas: Quaternion, r3: &Mat3) -> Result<MekfState> {
    check_measurement(&q_meas)?;
    let m = mekf_build_matrices(&NoiseParams::default(), Vec3::zeros(), 1.0);
    let a = attitude_innovation(&q_meas, &s.q_ref)?;

    let pht = s.p * m.h.transpose();
    let sinv = (m.h * pht + *r3)
        .inverse()
        .ok_or_else(|| Error::NumericalFailure("MEKF innovation covariance is singular".into()))?;
    let k = pht * sinv;
    let dx = k * a;

    let dq = error_quaternion(Vec3::new(dx[0], dx[1], dx[2]))?;
    let q_ref = (dq * s.q_ref).normalize()?;
    let p = ((Mat6::identity() - k * m.h) * s.p).symmetrized();
    if !p.is_finite() {
        return Err(Error::NumericalFailure(
            "MEKF covariance became non-finite".into(),
        ));
    }
    // Reset: the error is now carried by q_ref. Bias corrections are not fed
    // back, so the bias part is discarded as well.
    Ok(MekfState {
        q_ref,
        dx: Vec6::zeros(),
        p,
    })
}
