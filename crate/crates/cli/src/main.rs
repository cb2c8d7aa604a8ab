//! `satattitude`: batch front end for the attitude simulator.
//!
//! Exit codes: 0 success, 1 usage error, 2 config or input-file error,
//! 3 numerical failure.

mod selfcheck;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use satattitude::attitude::Quaternion;
use satattitude::harness::{compute_metrics, run_simulation, write_reports, SimConfig};
use satattitude::numerics::{RngStream, Vec3};
use satattitude::startracker::{StarCatalog, StarObservation};
use satattitude::wahba::{davenport_solve, triad};
use satattitude::Error;

#[derive(Debug, Parser)]
#[command(
    name = "satattitude",
    version,
    about = "Star tracker + gyro attitude estimation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one orbit and write metrics.json and timeseries.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the seed in the config.
        #[arg(long, conflicts_with = "seeds")]
        seed: Option<u64>,
        /// Inclusive seed range `a..b`; each run goes to `out/seed_<n>/`.
        #[arg(long, value_parser = parse_seed_range)]
        seeds: Option<(u64, u64)>,
        /// Write zeros for wall-clock timings so reports are reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Solve Wahba's problem for observations in a CSV file
    /// (`bx,by,bz,rx,ry,rz[,weight]`).
    SolveWahba { observations: PathBuf },
    /// TRIAD from two reference and two body directions, in the order
    /// r1 r2 b1 b2: either 8 numbers (longitude, latitude pairs in radians)
    /// or 12 Cartesian components.
    Triad {
        #[arg(allow_negative_numbers = true, required = true)]
        values: Vec<f64>,
    },
    /// Generate a random star catalog as CSV.
    GenCatalog {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in numerical checks.
    Selfcheck {
        #[arg(long, value_enum, default_value_t = Profile::Quick)]
        profile: Profile,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    /// Property checks plus a one-minute closed-loop run.
    Quick,
    /// Adds a noiseless full-orbit run.
    Full,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io(_) => Failure::Config(e.to_string()),
            Error::InvalidInput(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn parse_seed_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|e| format!("bad start {a:?}: {e}"))?;
    let b: u64 = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|e| format!("bad end {b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty seed range {s:?}"));
    }
    Ok((a, b))
}

fn run_one(cfg: &SimConfig, out: &Path, no_timing: bool) -> Result<(), Failure> {
    let result = run_simulation(cfg)?;
    let mut metrics = compute_metrics(&result)?;
    if no_timing {
        metrics = metrics.without_timing();
    }
    write_reports(out, &result, &metrics, cfg.csv_stride)?;
    for (name, m) in [("aekf", &metrics.aekf), ("mekf", &metrics.mekf)] {
        if let Some(m) = m {
            println!(
                "seed {} {name}: mean error {:.3e} rad, max {:.3e} rad, final P norm {:.3e}",
                cfg.seed, m.mean_error_angle, m.max_error_angle, m.final_cov_norm
            );
        }
    }
    match result.aborted {
        Some(reason) => Err(Failure::Numerical(format!("seed {}: {reason}", cfg.seed))),
        None => Ok(()),
    }
}

fn cmd_run(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    seeds: Option<(u64, u64)>,
    no_timing: bool,
) -> Result<(), Failure> {
    let mut cfg = SimConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let Some((a, b)) = seeds else {
        return run_one(&cfg, out, no_timing);
    };

    let all: Vec<u64> = (a..=b).collect();
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(all.len());
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&s) = all.get(i) else { break };
                let cfg = SimConfig {
                    seed: s,
                    ..cfg.clone()
                };
                if let Err(f) = run_one(&cfg, &out.join(format!("seed_{s}")), no_timing) {
                    failures.lock().unwrap().push((s, f));
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    failures.sort_by_key(|(s, _)| *s);
    for (s, f) in &failures {
        log::error!("seed {s}: {}", f.message());
    }
    match failures.into_iter().max_by_key(|(_, f)| f.code()) {
        Some((_, f)) => Err(f),
        None => Ok(()),
    }
}

fn read_observations(path: &Path) -> Result<Vec<StarObservation>, Failure> {
    let cfg_err = |m: String| Failure::Config(format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| cfg_err(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| cfg_err(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(["bx", "by", "bz", "rx", "ry", "rz"]) {
        *slot = col(name).ok_or_else(|| cfg_err(format!("missing column {name}")))?;
    }
    let weight = col("weight");

    let mut obs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| cfg_err(e.to_string()))?;
        let num = |i: usize| -> Result<f64, Failure> {
            let field = rec.get(i).unwrap_or("");
            field
                .parse()
                .map_err(|_| cfg_err(format!("row {}: bad number {field:?}", line + 2)))
        };
        let unit = |v: Vec3| {
            v.normalized()
                .ok_or_else(|| cfg_err(format!("row {}: zero-length vector", line + 2)))
        };
        let b = unit(Vec3::new(num(idx[0])?, num(idx[1])?, num(idx[2])?))?;
        let r = unit(Vec3::new(num(idx[3])?, num(idx[4])?, num(idx[5])?))?;
        let w = match weight {
            Some(i) if !rec.get(i).unwrap_or("").is_empty() => num(i)?,
            _ => 1.0,
        };
        obs.push(StarObservation::new(b, r).with_weight(w));
    }
    Ok(obs)
}

fn cmd_solve_wahba(path: &Path) -> Result<(), Failure> {
    let obs = read_observations(path)?;
    let sol = davenport_solve(&obs)?;
    let q = sol.q;
    let out = serde_json::json!({
        "q": [q.x, q.y, q.z, q.w],
        "lambda_max": sol.lambda_max,
        "loss": sol.loss,
    });
    println!("{out}");
    Ok(())
}

fn cmd_triad(values: &[f64]) -> Result<(), Failure> {
    let dirs: Vec<Vec3> = match values.len() {
        8 => values
            .chunks(2)
            .map(|p| {
                let (lon, lat) = (p[0], p[1]);
                Vec3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin())
            })
            .collect(),
        12 => values
            .chunks(3)
            .map(|c| {
                Vec3::new(c[0], c[1], c[2])
                    .normalized()
                    .unwrap_or(Vec3::zeros())
            })
            .collect(),
        n => {
            return Err(Failure::Usage(format!(
                "triad takes 8 (lon/lat) or 12 (Cartesian) numbers, got {n}"
            )))
        }
    };
    let a = triad(dirs[0], dirs[1], dirs[2], dirs[3])?;
    let q = Quaternion::from_matrix(&a);
    let out = serde_json::json!({
        "matrix": a.matrix().0,
        "q": [q.x, q.y, q.z, q.w],
    });
    println!("{out}");
    Ok(())
}

fn cmd_gen_catalog(n: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    // Same stream the simulator uses, so a run with this seed sees this sky.
    let catalog = StarCatalog::generate(n, &mut RngStream::with_stream(seed, 0))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
    }
    catalog.save(out)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            seeds,
            no_timing,
        } => cmd_run(&config, &out, seed, seeds, no_timing),
        Command::SolveWahba { observations } => cmd_solve_wahba(&observations),
        Command::Triad { values } => cmd_triad(&values),
        Command::GenCatalog { n, seed, out } => cmd_gen_catalog(n, seed, &out),
        Command::Selfcheck { profile } => selfcheck::run(profile == Profile::Full),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
