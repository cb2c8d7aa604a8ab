//! Recursive attitude estimators driven by a gyro and quaternion measurements.
//!
//! - [`aekf`]: additive EKF over the four quaternion components, renormalised
//!   after each update.
//! - [`mekf`]: multiplicative EKF over a small attitude error about a
//!   reference quaternion, folded back into the reference after each update.
//!
//! Both filters are plain values; every step consumes a state and returns the
//! next one.

mod aekf;
mod mekf;

pub use aekf::{aekf_predict, aekf_update, AekfState};
pub use mekf::{mekf_build_matrices, mekf_predict, mekf_update, MekfMatrices, MekfState};

use serde::{Deserialize, Serialize};

use crate::attitude::Quaternion;
use crate::{Error, Result};

/// How the additive filter maps gyro noise into quaternion process noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AekfProcessNoise {
    /// `¼ σ_v² dt · Ξ(q) Ξ(q)ᵀ`, the rate noise pushed through `q̇ = ½ Ξ(q) ω`.
    #[default]
    Kinematic,
    /// `σ_v² dt · I₄`.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Gyro rate white noise, rad/s/√Hz.
    pub sigma_v: f64,
    /// Gyro bias random walk, rad/s^(3/2).
    pub sigma_u: f64,
    pub aekf_process_noise: AekfProcessNoise,
    /// Clear the bias rows and columns of the MEKF covariance after each
    /// prediction, so only the attitude error is carried.
    pub zero_bias_blocks: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            sigma_v: 0.0,
            sigma_u: 0.0,
            aekf_process_noise: AekfProcessNoise::Kinematic,
            zero_bias_blocks: false,
        }
    }
}

impl NoiseParams {
    pub fn new(sigma_v: f64, sigma_u: f64) -> Self {
        NoiseParams {
            sigma_v,
            sigma_u,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("sigma_v", self.sigma_v), ("sigma_u", self.sigma_u)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {s}"
                )));
            }
        }
        Ok(())
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "time step must be positive, got {dt}"
        )))
    }
}

fn check_measurement(q: &Quaternion) -> Result<()> {
    if q.is_unit(1e-6) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "measurement quaternion is not unit, norm {}",
            q.norm()
        )))
    }
}
