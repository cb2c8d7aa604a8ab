use std::time::Instant;

use satattitude::attitude::Quaternion;
use satattitude::harness::{compute_metrics, run_simulation, SimConfig};
use satattitude::numerics::{jacobi_eigen_sym, Mat4, RngStream, Vec3};
use satattitude::startracker::StarObservation;
use satattitude::wahba::{davenport_solve, triad, wahba_loss, AttitudeProfileMatrix};

use crate::Failure;

type Check = (&'static str, fn() -> Result<String, String>);

fn random_unit(rng: &mut RngStream) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
        );
        if let Ok(q) = q.normalize() {
            return q;
        }
    }
}

fn random_dir(rng: &mut RngStream) -> Vec3 {
    Vec3::new(
        rng.standard_normal(),
        rng.standard_normal(),
        rng.standard_normal(),
    )
    .normalized()
    .unwrap_or(Vec3::new(0.0, 0.0, 1.0))
}

fn noiseless_obs(q: &Quaternion, n: usize, rng: &mut RngStream) -> Vec<StarObservation> {
    let a = q.to_matrix().expect("unit quaternion");
    (0..n)
        .map(|_| {
            let r = random_dir(rng);
            StarObservation::new(a.apply(r), r)
        })
        .collect()
}

fn davenport_recovery() -> Result<String, String> {
    let mut rng = RngStream::new(101);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let q = random_unit(&mut rng);
        let sol = davenport_solve(&noiseless_obs(&q, 5, &mut rng)).map_err(|e| e.to_string())?;
        worst = worst.max(sol.q.error_angle(&q));
    }
    (worst <= 1e-6)
        .then(|| format!("worst error {worst:.2e} rad"))
        .ok_or(format!("worst error {worst:.2e} rad > 1e-6"))
}

fn trace_identity() -> Result<String, String> {
    let mut rng = RngStream::new(102);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let obs: Vec<_> = (0..4)
            .map(|_| {
                StarObservation::new(random_dir(&mut rng), random_dir(&mut rng))
                    .with_weight(0.5 + rng.uniform())
            })
            .collect();
        let p = AttitudeProfileMatrix::from_observations(&obs).map_err(|e| e.to_string())?;
        let q = random_unit(&mut rng);
        let lhs = (q.to_matrix().map_err(|e| e.to_string())?.0 * p.b.transpose()).trace();
        worst = worst.max((lhs - p.davenport().gain(&q)).abs());
    }
    (worst <= 1e-10)
        .then(|| format!("worst gap {worst:.2e}"))
        .ok_or(format!("worst gap {worst:.2e} > 1e-10"))
}

fn triad_exactness() -> Result<String, String> {
    let mut rng = RngStream::new(103);
    let (mut fit, mut loss) = (0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let q = random_unit(&mut rng);
        let obs = noiseless_obs(&q, 2, &mut rng);
        let a = triad(obs[0].r, obs[1].r, obs[0].b, obs[1].b).map_err(|e| e.to_string())?;
        fit = fit.max((a.apply(obs[0].r) - obs[0].b).max_abs());
        loss = loss.max(wahba_loss(&a, &obs));
    }
    (fit <= 1e-12 && loss <= 1e-20)
        .then(|| format!("first pair {fit:.2e}, loss {loss:.2e}"))
        .ok_or(format!("first pair {fit:.2e}, loss {loss:.2e}"))
}

fn eigen_residuals() -> Result<String, String> {
    let mut rng = RngStream::new(104);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in i..4 {
                m.0[i][j] = rng.standard_normal();
                m.0[j][i] = m.0[i][j];
            }
        }
        let e = jacobi_eigen_sym(&m).map_err(|e| e.to_string())?;
        for k in 0..4 {
            let v = e.vectors[k];
            worst = worst.max((m * v - v * e.values[k]).max_abs());
        }
    }
    (worst <= 1e-10)
        .then(|| format!("worst residual {worst:.2e}"))
        .ok_or(format!("worst residual {worst:.2e} > 1e-10"))
}

fn noiseless(duration_s: f64) -> Result<String, String> {
    let cfg = SimConfig {
        duration_s,
        sigma_gyro: 0.0,
        sigma_star: 0.0,
        sigma_meas: 0.0,
        ..Default::default()
    };
    let start = Instant::now();
    let r = run_simulation(&cfg).map_err(|e| e.to_string())?;
    let m = compute_metrics(&r).map_err(|e| e.to_string())?;
    let worst = [m.aekf, m.mekf]
        .iter()
        .flatten()
        .map(|f| f.max_error_angle)
        .fold(0.0, f64::max);
    let msg = format!(
        "{} steps in {:.1} s, worst error {worst:.2e} rad",
        r.gyro_steps,
        start.elapsed().as_secs_f64()
    );
    (worst <= 1e-5 && r.aborted.is_none())
        .then_some(msg.clone())
        .ok_or(msg)
}

fn closed_loop_minute() -> Result<String, String> {
    noiseless(60.0)
}

fn closed_loop_orbit() -> Result<String, String> {
    noiseless(satattitude::harness::ORBIT_PERIOD_S)
}

pub fn run(full: bool) -> Result<(), Failure> {
    let mut checks: Vec<Check> = vec![
        ("davenport recovery", davenport_recovery),
        ("trace identity", trace_identity),
        ("triad exactness", triad_exactness),
        ("eigensolver residuals", eigen_residuals),
        ("noiseless 60 s run", closed_loop_minute),
    ];
    if full {
        checks.push(("noiseless full orbit", closed_loop_orbit));
    }
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{failed} self-check(s) failed")))
    }
}
