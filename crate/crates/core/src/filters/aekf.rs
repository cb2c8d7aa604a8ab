use crate::attitude::Quaternion;
use crate::numerics::{Mat4, Vec3};
use crate::{Error, Result};

use super::{check_dt, check_measurement, AekfProcessNoise, NoiseParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AekfState {
    pub q: Quaternion,
    pub p: Mat4,
}

impl AekfState {
    pub fn new(q: Quaternion, p: Mat4) -> Self {
        AekfState { q, p }
    }

    /// Starting state with `P = variance · I₄`.
    pub fn with_variance(q: Quaternion, variance: f64) -> Self {
        AekfState::new(q, Mat4::identity().scale(variance))
    }
}

/// Discrete transition `I₄ + ½ Ω(ω) dt`.
pub(crate) fn transition(omega: Vec3, dt: f64) -> Mat4 {
    Mat4::identity() + Quaternion::omega_matrix(omega).scale(0.5 * dt)
}

pub(crate) fn process_noise(q: &Quaternion, dt: f64, np: &NoiseParams) -> Mat4 {
    let var = np.sigma_v * np.sigma_v * dt;
    match np.aekf_process_noise {
        AekfProcessNoise::Kinematic => {
            let xi = q.xi();
            (xi * xi.transpose()).scale(0.25 * var)
        }
        AekfProcessNoise::Flat => Mat4::identity().scale(var),
    }
}

pub fn aekf_predict(s: AekfState, omega: Vec3, dt: f64, np: &NoiseParams) -> Result<AekfState> {
    check_dt(dt)?;
    let f = transition(omega, dt);
    let q = s.q.integrate(omega, dt);
    let p = (f * s.p * f.transpose() + process_noise(&q, dt, np)).symmetrized();
    if !p.is_finite() {
        return Err(Error::NumericalFailure(
            "AEKF covariance became non-finite".into(),
        ));
    }
    Ok(AekfState { q, p })
}

pub fn aekf_update(s: AekfState, q_meas: Quaternion, r4: &Mat4) -> Result<AekfState> {
    check_measurement(&q_meas)?;
    let y = q_meas.aligned_with(&s.q).to_vec4() - s.q.to_vec4();
    let sinv = (s.p + *r4)
        .inverse()
        .ok_or_else(|| Error::NumericalFailure("AEKF innovation covariance is singular".into()))?;
    let k = s.p * sinv;
    let q = Quaternion::from_vec4(&(s.q.to_vec4() + k * y)).normalize()?;
    let p = ((Mat4::identity() - k) * s.p).symmetrized();
    if !p.is_finite() {
        return Err(Error::NumericalFailure(
            "AEKF covariance became non-finite".into(),
        ));
    }
    Ok(AekfState { q, p })
}
