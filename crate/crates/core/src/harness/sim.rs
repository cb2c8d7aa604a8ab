use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::Instant;

use serde::Serialize;

use crate::attitude::Quaternion;
use crate::filters::{
    aekf_predict, aekf_update, mekf_predict, mekf_update, AekfState, MekfState, NoiseParams,
};
use crate::numerics::{jacobi_eigen_sym, Mat3, Mat4, Matrix, RngStream, Vec3};
use crate::startracker::{observe, CameraModel, StarCatalog};
use crate::wahba::davenport_solve;
use crate::{Error, Result};

use super::{SimConfig, ORBIT_PERIOD_S};

/// Floor on measurement variances so the innovation covariance stays
/// invertible when the configured noise is zero.
const MIN_MEAS_VAR: f64 = 1e-12;

const CATALOG_STREAM: u64 = 0;
const GYRO_STREAM: u64 = 1;
const STAR_STREAM: u64 = 2;

/// Body rate along `axis`: `−cos(2π t / T_orbit) · π/2` rad/s.
pub fn trajectory_omega(t: f64, axis: Vec3) -> Vec3 {
    axis * (-(TAU * t / ORBIT_PERIOD_S).cos() * FRAC_PI_2)
}

/// Gyro reading: truth plus per-axis `N(0, sigma²)`.
pub fn emulate_gyro(omega_true: Vec3, sigma: f64, rng: &mut RngStream) -> Result<Vec3> {
    Ok(omega_true
        + Vec3::new(
            rng.gaussian(sigma)?,
            rng.gaussian(sigma)?,
            rng.gaussian(sigma)?,
        ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterSample {
    pub q: Quaternion,
    pub error_angle: f64,
    /// `min ‖q_true ∓ q̂‖`.
    pub error_norm: f64,
    /// Spectral norm of the attitude covariance.
    pub cov_norm: f64,
    pub condition_number: f64,
    /// Wall time of this step's predict and update calls.
    pub step_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub q_true: Quaternion,
    /// A tracker measurement was applied at this step.
    pub updated: bool,
    pub aekf: Option<FilterSample>,
    pub mekf: Option<FilterSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub gyro_steps: u64,
    pub tracker_updates: u64,
    pub skipped_epochs: u64,
    /// Set when a filter failed and the run stopped early.
    pub aborted: Option<String>,
}

fn sample<const N: usize>(
    q: Quaternion,
    q_true: &Quaternion,
    p: &Matrix<N, N>,
    step_time_s: f64,
) -> Result<FilterSample> {
    let eig = jacobi_eigen_sym(p)?;
    Ok(FilterSample {
        q,
        error_angle: q.error_angle(q_true),
        error_norm: (q_true.to_vec4() - q.aligned_with(q_true).to_vec4()).norm(),
        cov_norm: eig.spectral_norm(),
        condition_number: eig.condition_number(),
        step_time_s,
    })
}

fn load_catalog(cfg: &SimConfig) -> Result<StarCatalog> {
    match &cfg.catalog_path {
        Some(path) => {
            let c = StarCatalog::load(path)?;
            if c.len() != cfg.n_stars {
                return Err(Error::Config(format!(
                    "catalog {} has {} stars, config says {}",
                    path.display(),
                    c.len(),
                    cfg.n_stars
                )));
            }
            Ok(c)
        }
        None => StarCatalog::generate(
            cfg.n_stars,
            &mut RngStream::with_stream(cfg.seed, CATALOG_STREAM),
        ),
    }
}

/// Run one closed-loop scenario.
///
/// Truth and both filters step at the gyro rate using one shared noisy rate
/// sample per step. At each tracker epoch the emulated cameras feed one
/// Davenport solution to both filters; epochs with too few stars are skipped.
/// A filter failure ends the run early with `aborted` set.
pub fn run_simulation(cfg: &SimConfig) -> Result<RunResult> {
    cfg.validate()?;
    let catalog = load_catalog(cfg)?;
    let cams =
        CameraModel::orthogonal_set(cfg.n_cameras, cfg.focal_length, cfg.fov_half_angle_rad)?;
    let mut gyro_rng = RngStream::with_stream(cfg.seed, GYRO_STREAM);
    let mut star_rng = RngStream::with_stream(cfg.seed, STAR_STREAM);

    let dt = cfg.gyro_dt();
    let axis = cfg.axis();
    let np = NoiseParams {
        // per-sample noise σ at rate 1/dt has density σ·√dt
        sigma_v: cfg.sigma_gyro * dt.sqrt(),
        sigma_u: cfg.sigma_bias,
        aekf_process_noise: cfg.aekf_process_noise,
        zero_bias_blocks: cfg.zero_bias_blocks,
    };
    let var = cfg.sigma_meas * cfg.sigma_meas;
    let r3 = Mat3::identity().scale(var.max(MIN_MEAS_VAR));
    // quaternion components carry half the rotation angle
    let r4 = Mat4::identity().scale((0.25 * var).max(MIN_MEAS_VAR));
    let p0 = cfg.init_sigma * cfg.init_sigma;

    let mut q_true = Quaternion::IDENTITY;
    let mut aekf = cfg
        .run_aekf
        .then(|| AekfState::with_variance(q_true, 0.25 * p0));
    let mut mekf = cfg
        .run_mekf
        .then(|| MekfState::with_variances(q_true, p0, 0.0));

    let n = cfg.gyro_steps();
    let mut result = RunResult {
        seed: cfg.seed,
        steps: Vec::with_capacity(n as usize),
        gyro_steps: 0,
        tracker_updates: 0,
        skipped_epochs: 0,
        aborted: None,
    };

    for k in 1..=n {
        let t = k as f64 * dt;
        let omega = trajectory_omega((k - 1) as f64 * dt, axis);
        q_true = q_true.integrate(omega, dt);
        let omega_meas = emulate_gyro(omega, cfg.sigma_gyro, &mut gyro_rng)?;

        let mut meas = None;
        if cfg.epochs_by_step(k) > cfg.epochs_by_step(k - 1) {
            let obs = observe(&q_true, &catalog, &cams, cfg.sigma_star, &mut star_rng)?;
            match davenport_solve(&obs) {
                Ok(sol) => {
                    meas = Some(sol.q);
                    result.tracker_updates += 1;
                }
                Err(Error::UnderdeterminedAttitude) => {
                    log::debug!("t={t:.2}: {} stars in view, epoch skipped", obs.len());
                    result.skipped_epochs += 1;
                }
                Err(e) => {
                    result.aborted = Some(format!("tracker solution at t={t}: {e}"));
                    break;
                }
            }
        }

        let mut record = StepRecord {
            t,
            q_true,
            updated: meas.is_some(),
            aekf: None,
            mekf: None,
        };

        if let Some(s) = aekf {
            let start = Instant::now();
            let stepped = aekf_predict(s, omega_meas, dt, &np)
                .and_then(|s| meas.map_or(Ok(s), |m| aekf_update(s, m, &r4)));
            let elapsed = start.elapsed().as_secs_f64();
            match stepped.and_then(|s| Ok((s, sample(s.q, &q_true, &s.p, elapsed)?))) {
                Ok((s, smp)) => {
                    aekf = Some(s);
                    record.aekf = Some(smp);
                }
                Err(e) => {
                    result.aborted = Some(format!("AEKF at t={t}: {e}"));
                    break;
                }
            }
        }
        if let Some(s) = mekf {
            let start = Instant::now();
            let stepped = mekf_predict(s, omega_meas, dt, &np)
                .and_then(|s| meas.map_or(Ok(s), |m| mekf_update(s, m, &r3)));
            let elapsed = start.elapsed().as_secs_f64();
            match stepped.and_then(|s| {
                Ok((
                    s,
                    sample(s.q_ref, &q_true, &s.attitude_covariance(), elapsed)?,
                ))
            }) {
                Ok((s, smp)) => {
                    mekf = Some(s);
                    record.mekf = Some(smp);
                }
                Err(e) => {
                    result.aborted = Some(format!("MEKF at t={t}: {e}"));
                    break;
                }
            }
        }

        result.steps.push(record);
        result.gyro_steps = k;
    }

    if let Some(reason) = &result.aborted {
        log::warn!("run aborted: {reason}");
    }
    log::info!(
        "seed {}: {} steps, {} tracker updates, {} skipped epochs",
        cfg.seed,
        result.gyro_steps,
        result.tracker_updates,
        result.skipped_epochs
    );
    Ok(result)
}
