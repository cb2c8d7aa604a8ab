use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::attitude::Quaternion;
use crate::Result;

use super::{FilterSample, MetricsReport, RunResult};

/// Column order of `timeseries.csv`. Quaternions are written scalar first.
pub const TIMESERIES_HEADER: &str = "t,qw_true,qx_true,qy_true,qz_true,\
qw_aekf,qx_aekf,qy_aekf,qz_aekf,qw_mekf,qx_mekf,qy_mekf,qz_mekf,\
err_aekf,err_mekf,pnorm_aekf,pnorm_mekf,cond_aekf,cond_mekf";

fn push_quat(line: &mut String, q: Option<&Quaternion>) {
    match q {
        Some(q) => {
            let _ = write!(line, ",{},{},{},{}", q.w, q.x, q.y, q.z);
        }
        None => line.push_str(",,,,"),
    }
}

fn push_field(line: &mut String, s: Option<&FilterSample>, f: impl Fn(&FilterSample) -> f64) {
    match s {
        Some(s) => {
            let _ = write!(line, ",{}", f(s));
        }
        None => line.push(','),
    }
}

/// Every `stride`-th step plus the last one. Columns of a disabled filter are
/// left empty.
pub fn write_timeseries_csv<W: Write>(r: &RunResult, stride: usize, mut w: W) -> Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    let stride = stride.max(1);
    let last = r.steps.len().saturating_sub(1);
    let mut line = String::new();
    for (i, s) in r.steps.iter().enumerate() {
        if (i + 1) % stride != 0 && i != last {
            continue;
        }
        line.clear();
        let _ = write!(line, "{}", s.t);
        push_quat(&mut line, Some(&s.q_true));
        push_quat(&mut line, s.aekf.as_ref().map(|a| &a.q));
        push_quat(&mut line, s.mekf.as_ref().map(|a| &a.q));
        let fields: [fn(&FilterSample) -> f64; 3] =
            [|s| s.error_angle, |s| s.cov_norm, |s| s.condition_number];
        for f in fields {
            push_field(&mut line, s.aekf.as_ref(), f);
            push_field(&mut line, s.mekf.as_ref(), f);
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_json<W: Write>(m: &MetricsReport, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, m).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

/// Write `metrics.json` and `timeseries.csv` into `dir`, creating it.
pub fn write_reports(dir: &Path, r: &RunResult, m: &MetricsReport, stride: usize) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_metrics_json(
        m,
        std::io::BufWriter::new(fs::File::create(dir.join("metrics.json"))?),
    )?;
    write_timeseries_csv(
        r,
        stride,
        std::io::BufWriter::new(fs::File::create(dir.join("timeseries.csv"))?),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{compute_metrics, StepRecord};

    fn result() -> RunResult {
        let steps = (1..=5)
            .map(|i| StepRecord {
                t: i as f64 * 0.5,
                q_true: Quaternion::new(0.0, 0.0, 0.6, 0.8),
                updated: false,
                aekf: Some(FilterSample {
                    q: Quaternion::IDENTITY,
                    error_angle: 0.25,
                    error_norm: 0.1,
                    cov_norm: 2.0,
                    condition_number: 3.0,
                    step_time_s: 1e-6,
                }),
                mekf: None,
            })
            .collect();
        RunResult {
            seed: 1,
            steps,
            gyro_steps: 5,
            tracker_updates: 1,
            skipped_epochs: 0,
            aborted: None,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_timeseries_csv(&result(), 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], TIMESERIES_HEADER);
        assert_eq!(lines[0].split(',').count(), 19);
        // steps 2, 4 and the final step 5
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "1,0.8,0,0,0.6,1,0,0,0,,,,,0.25,,2,,3,");
        assert!(lines[3].starts_with("2.5,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 19));
    }

    #[test]
    fn reports_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let r = result();
        let m = compute_metrics(&r).unwrap();
        write_reports(&dir.path().join("out"), &r, &m, 1).unwrap();
        let json = fs::read_to_string(dir.path().join("out/metrics.json")).unwrap();
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        for key in [
            "mean_error_angle",
            "final_cov_norm",
            "mean_condition_number",
            "mean_step_time_s",
        ] {
            assert!(json.contains(key));
        }
        let csv = fs::read_to_string(dir.path().join("out/timeseries.csv")).unwrap();
        assert_eq!(csv.lines().count(), 6);
    }
}
