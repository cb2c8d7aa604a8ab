use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::filters::AekfProcessNoise;
use crate::numerics::Vec3;
use crate::{Error, Result};

/// Simulation settings, read from a flat JSON object. Missing keys take their
/// defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub duration_s: f64,
    pub gyro_rate_hz: f64,
    pub tracker_rate_hz: f64,
    pub n_stars: usize,
    pub n_cameras: usize,
    pub fov_half_angle_rad: f64,
    pub focal_length: f64,
    /// Per-sample gyro noise, rad/s.
    pub sigma_gyro: f64,
    /// Per-axis star direction noise, rad.
    pub sigma_star: f64,
    /// Assumed per-axis attitude error of a tracker solution, rad. Sets the
    /// measurement covariance of both filters.
    pub sigma_meas: f64,
    /// Gyro bias random walk assumed by the MEKF, rad/s^(3/2).
    pub sigma_bias: f64,
    /// Initial per-axis attitude uncertainty, rad.
    pub init_sigma: f64,
    pub seed: u64,
    pub trajectory_axis: Vec3,
    pub run_aekf: bool,
    pub run_mekf: bool,
    pub aekf_process_noise: AekfProcessNoise,
    pub zero_bias_blocks: bool,
    /// Star catalog CSV to use instead of a generated one.
    pub catalog_path: Option<PathBuf>,
    /// Write every n-th step to the time-series CSV.
    pub csv_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            duration_s: super::ORBIT_PERIOD_S,
            gyro_rate_hz: 100.0,
            tracker_rate_hz: 1.0,
            n_stars: 100,
            n_cameras: 3,
            fov_half_angle_rad: 20f64.to_radians(),
            focal_length: 1.0,
            sigma_gyro: 1e-3,
            sigma_star: 1e-4,
            sigma_meas: 5e-5,
            sigma_bias: 0.0,
            init_sigma: 1e-3,
            seed: 1,
            trajectory_axis: Vec3::new(0.0, 0.0, 1.0),
            run_aekf: true,
            run_mekf: true,
            aekf_process_noise: AekfProcessNoise::Kinematic,
            zero_bias_blocks: true,
            catalog_path: None,
            csv_stride: 100,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => bad(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("duration_s", self.duration_s),
            ("gyro_rate_hz", self.gyro_rate_hz),
            ("tracker_rate_hz", self.tracker_rate_hz),
            ("focal_length", self.focal_length),
            ("init_sigma", self.init_sigma),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("sigma_gyro", self.sigma_gyro),
            ("sigma_star", self.sigma_star),
            ("sigma_meas", self.sigma_meas),
            ("sigma_bias", self.sigma_bias),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.tracker_rate_hz > self.gyro_rate_hz {
            return Err(bad("tracker_rate_hz must not exceed gyro_rate_hz"));
        }
        if !(1..=6).contains(&self.n_cameras) {
            return Err(bad(format!(
                "n_cameras must be in 1..=6, got {}",
                self.n_cameras
            )));
        }
        if self.n_stars < 2 {
            return Err(bad("n_stars must be at least 2"));
        }
        if !(self.fov_half_angle_rad > 0.0 && self.fov_half_angle_rad < std::f64::consts::FRAC_PI_2)
        {
            return Err(bad("fov_half_angle_rad must be in (0, pi/2)"));
        }
        if !self.trajectory_axis.is_finite() || self.trajectory_axis.norm() < 1e-12 {
            return Err(bad("trajectory_axis must be a nonzero vector"));
        }
        if self.csv_stride == 0 {
            return Err(bad("csv_stride must be at least 1"));
        }
        if !self.run_aekf && !self.run_mekf {
            return Err(bad("at least one filter must be enabled"));
        }
        Ok(())
    }

    pub fn axis(&self) -> Vec3 {
        self.trajectory_axis
            .normalized()
            .unwrap_or(Vec3::new(0.0, 0.0, 1.0))
    }

    pub fn gyro_dt(&self) -> f64 {
        1.0 / self.gyro_rate_hz
    }

    /// Number of gyro steps, `floor(duration · rate)`.
    pub fn gyro_steps(&self) -> u64 {
        (self.duration_s * self.gyro_rate_hz + 1e-9).floor() as u64
    }

    /// Tracker epochs completed by the end of gyro step `k`.
    pub(crate) fn epochs_by_step(&self, k: u64) -> u64 {
        (k as f64 * self.tracker_rate_hz / self.gyro_rate_hz + 1e-9).floor() as u64
    }
}
