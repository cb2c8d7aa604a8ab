use serde::{Deserialize, Serialize};

use crate::attitude::{Quaternion, RotationMatrix};
use crate::{Error, Result};

use super::{FilterSample, RunResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterMetrics {
    pub mean_error_angle: f64,
    pub max_error_angle: f64,
    /// Mean of `min ‖q_true ∓ q̂‖`.
    pub mean_abs_error_norm: f64,
    /// Spectral norm of the attitude covariance at the last step.
    pub final_cov_norm: f64,
    pub mean_condition_number: f64,
    pub max_condition_number: f64,
    pub mean_step_time_s: f64,
    pub mean_abs_roll_error: f64,
    pub mean_abs_pitch_error: f64,
    pub mean_abs_yaw_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub gyro_steps: u64,
    pub tracker_updates: u64,
    pub skipped_epochs: u64,
    pub aborted: Option<String>,
    pub aekf: Option<FilterMetrics>,
    pub mekf: Option<FilterMetrics>,
}

impl MetricsReport {
    /// Zero the wall-clock fields so reports compare byte for byte.
    pub fn without_timing(mut self) -> Self {
        for m in [&mut self.aekf, &mut self.mekf].into_iter().flatten() {
            m.mean_step_time_s = 0.0;
        }
        self
    }
}

fn error_euler(q: &Quaternion, q_true: &Quaternion) -> Result<[f64; 3]> {
    let a = q.to_matrix()?;
    let t = q_true.to_matrix()?;
    let e = RotationMatrix(*a.matrix() * t.matrix().transpose()).to_euler();
    Ok([e.roll, e.pitch, e.yaw])
}

fn aggregate<'a>(
    samples: impl Iterator<Item = (&'a FilterSample, &'a Quaternion)>,
) -> Result<Option<FilterMetrics>> {
    let mut n = 0usize;
    let mut m = FilterMetrics {
        mean_error_angle: 0.0,
        max_error_angle: 0.0,
        mean_abs_error_norm: 0.0,
        final_cov_norm: 0.0,
        mean_condition_number: 0.0,
        max_condition_number: 0.0,
        mean_step_time_s: 0.0,
        mean_abs_roll_error: 0.0,
        mean_abs_pitch_error: 0.0,
        mean_abs_yaw_error: 0.0,
    };
    for (s, q_true) in samples {
        n += 1;
        m.mean_error_angle += s.error_angle;
        m.max_error_angle = m.max_error_angle.max(s.error_angle);
        m.mean_abs_error_norm += s.error_norm;
        m.final_cov_norm = s.cov_norm;
        m.mean_condition_number += s.condition_number;
        m.max_condition_number = m.max_condition_number.max(s.condition_number);
        m.mean_step_time_s += s.step_time_s;
        let [r, p, y] = error_euler(&s.q, q_true)?;
        m.mean_abs_roll_error += r.abs();
        m.mean_abs_pitch_error += p.abs();
        m.mean_abs_yaw_error += y.abs();
    }
    if n == 0 {
        return Ok(None);
    }
    let inv = 1.0 / n as f64;
    for v in [
        &mut m.mean_error_angle,
        &mut m.mean_abs_error_norm,
        &mut m.mean_condition_number,
        &mut m.mean_step_time_s,
        &mut m.mean_abs_roll_error,
        &mut m.mean_abs_pitch_error,
        &mut m.mean_abs_yaw_error,
    ] {
        *v *= inv;
    }
    Ok(Some(m))
}

/// Aggregate a run into per-filter summary numbers.
pub fn compute_metrics(r: &RunResult) -> Result<MetricsReport> {
    if r.steps.is_empty() {
        return Err(Error::invalid("run has no steps"));
    }
    let aekf = aggregate(
        r.steps
            .iter()
            .filter_map(|s| s.aekf.as_ref().map(|a| (a, &s.q_true))),
    )?;
    let mekf = aggregate(
        r.steps
            .iter()
            .filter_map(|s| s.mekf.as_ref().map(|a| (a, &s.q_true))),
    )?;
    Ok(MetricsReport {
        seed: r.seed,
        gyro_steps: r.gyro_steps,
        tracker_updates: r.tracker_updates,
        skipped_epochs: r.skipped_epochs,
        aborted: r.aborted.clone(),
        aekf,
        mekf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::StepRecord;
    use crate::numerics::Vec3;

    fn smp(q: Quaternion, q_true: &Quaternion, cov: f64, cond: f64, time: f64) -> FilterSample {
        FilterSample {
            q,
            error_angle: q.error_angle(q_true),
            error_norm: (q_true.to_vec4() - q.aligned_with(q_true).to_vec4()).norm(),
            cov_norm: cov,
            condition_number: cond,
            step_time_s: time,
        }
    }

    fn run(steps: Vec<StepRecord>) -> RunResult {
        RunResult {
            seed: 3,
            gyro_steps: steps.len() as u64,
            steps,
            tracker_updates: 0,
            skipped_epochs: 0,
            aborted: None,
        }
    }

    #[test]
    fn perfect_tracking_has_zero_error() {
        let q = Quaternion::from_axis_angle(Vec3::new(1.0, 1.0, 0.0), 0.7).unwrap();
        let steps = (0..5)
            .map(|i| StepRecord {
                t: i as f64,
                q_true: q,
                updated: false,
                aekf: Some(smp(-q, &q, 1.0, 1.0, 1e-6)),
                mekf: None,
            })
            .collect();
        let m = compute_metrics(&run(steps)).unwrap();
        let a = m.aekf.unwrap();
        assert!(m.mekf.is_none());
        assert_eq!(a.mean_error_angle, 0.0);
        assert_eq!(a.mean_abs_error_norm, 0.0);
        assert!(a.mean_abs_roll_error < 1e-15 && a.mean_abs_yaw_error < 1e-15);
    }

    #[test]
    fn single_step_mean_equals_max() {
        let t = Quaternion::IDENTITY;
        let q = Quaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), 0.01).unwrap();
        let steps = vec![StepRecord {
            t: 1.0,
            q_true: t,
            updated: true,
            aekf: None,
            mekf: Some(smp(q, &t, 2.0, 3.0, 4.0)),
        }];
        let m = compute_metrics(&run(steps)).unwrap().mekf.unwrap();
        assert_eq!(m.mean_error_angle, m.max_error_angle);
        assert!((m.mean_error_angle - 0.01).abs() < 1e-15);
        assert!((m.mean_abs_yaw_error - 0.01).abs() < 1e-15);
        assert!(m.mean_abs_roll_error < 1e-15);
        assert_eq!(
            (
                m.final_cov_norm,
                m.mean_condition_number,
                m.mean_step_time_s
            ),
            (2.0, 3.0, 4.0)
        );
    }

    #[test]
    fn hand_computed_aggregates() {
        let t = Quaternion::IDENTITY;
        let x = Vec3::new(1.0, 0.0, 0.0);
        let angles = [0.01, 0.03, 0.02, 0.06];
        let steps = angles
            .iter()
            .enumerate()
            .map(|(i, &a)| StepRecord {
                t: i as f64,
                q_true: t,
                updated: false,
                aekf: Some(smp(
                    Quaternion::from_axis_angle(x, a).unwrap(),
                    &t,
                    10.0 - i as f64,
                    1.0 + i as f64,
                    1e-6 * (i + 1) as f64,
                )),
                mekf: None,
            })
            .collect();
        let m = compute_metrics(&run(steps)).unwrap();
        let a = m.aekf.unwrap();
        assert!((a.mean_error_angle - 0.03).abs() < 1e-15);
        assert!((a.max_error_angle - 0.06).abs() < 1e-15);
        // ‖q − 1‖ = 2 sin(θ/4)
        let norm: f64 = angles
            .iter()
            .map(|a| 2.0 * (a / 4.0_f64).sin())
            .sum::<f64>()
            / 4.0;
        assert!((a.mean_abs_error_norm - norm).abs() < 1e-15);
        assert!((a.mean_abs_roll_error - 0.03).abs() < 1e-15);
        assert_eq!(a.final_cov_norm, 7.0);
        assert_eq!(a.mean_condition_number, 2.5);
        assert_eq!(a.max_condition_number, 4.0);
        assert!((a.mean_step_time_s - 2.5e-6).abs() < 1e-20);
        assert_eq!(m.without_timing().aekf.unwrap().mean_step_time_s, 0.0);
    }

    #[test]
    fn empty_run_is_rejected() {
        assert!(compute_metrics(&run(vec![])).is_err());
    }
}
