use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Method};
use super::ExperimentError;
use crate::channel::ChannelMatrix;
use crate::constellation::PmfMatrix;
use crate::firefly::{run_fa, FaConfig, FaTrace};
use crate::precoder::PrecodingMatrix;
use crate::problem::Problem;
use crate::rate::NoiseModel;
use crate::zf_ao::{run_ao, AoConfig, AoTrace};

/// Env var capping the sweep worker pool.
pub const THREADS_ENV: &str = "VLC_SHAPER_THREADS";

#[derive(Debug, Clone)]
pub enum PointTrace {
    Fa(FaTrace),
    Ao(AoTrace),
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub method: Method,
    pub a_over_sigma_db: f64,
    pub peak: f64,
    pub seed: u64,
    pub sum_rate: f64,
    pub per_user: Vec<f64>,
    pub w: PrecodingMatrix,
    pub pmf: PmfMatrix,
    pub amplitudes: Vec<Vec<f64>>,
    pub wall_ms: u128,
    pub trace: PointTrace,
}

#[derive(Debug, Clone)]
pub struct PointFailure {
    pub a_over_sigma_db: f64,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub method: Method,
    pub points: Vec<PointOutcome>,
    pub failures: Vec<PointFailure>,
}

impl SweepResult {
    pub fn point(&self, db: f64) -> Option<&PointOutcome> {
        self.points.iter().find(|p| p.a_over_sigma_db == db)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Per-point RNG seed derived from the base seed and the point index.
pub fn point_seed(base: u64, index: usize) -> u64 {
    splitmix64(base ^ splitmix64(index as u64))
}

/// Formats an A/sigma value for file names (`60`, `62.5`).
pub fn point_label(db: f64) -> String {
    format!("{db}")
}

/// Solves one A/sigma point with sigma = 1 and the peak set from the dB
/// convention.
pub fn run_point(
    cfg: &ExperimentConfig,
    channel: &ChannelMatrix,
    method: Method,
    db: f64,
    seed: u64,
) -> crate::Result<PointOutcome> {
    let peak = cfg.noise.db_convention.peak(db);
    let problem = Problem::shared_pam(
        channel.clone(),
        cfg.modulation.m,
        peak,
        NoiseModel::new(1.0)?,
        cfg.quadrature,
    )?;
    let start = Instant::now();
    let (w, pmf, sum_rate, per_user, trace) = match method {
        Method::Fa | Method::UniformBaselineFa => {
            let fa = FaConfig { seed, optimize_pmf: method == Method::Fa, ..cfg.fa.clone() };
            let out = run_fa(&fa, &problem)?;
            (out.w, out.p, out.sum_rate.total, out.sum_rate.per_user, PointTrace::Fa(out.trace))
        }
        Method::ZfAo | Method::UniformBaselineZf => {
            let ao = AoConfig { optimize_pmf: method == Method::ZfAo, ..cfg.ao };
            let out = run_ao(&problem, &ao)?;
            (out.w, out.p, out.sum_rate.total, out.sum_rate.per_user, PointTrace::Ao(out.trace))
        }
    };
    Ok(PointOutcome {
        method,
        a_over_sigma_db: db,
        peak,
        seed,
        sum_rate,
        per_user,
        w,
        pmf,
        amplitudes: problem.constellations().iter().map(|c| c.amplitudes().to_vec()).collect(),
        wall_ms: start.elapsed().as_millis(),
        trace,
    })
}

fn pool() -> rayon::ThreadPool {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

/// Runs every configured point without touching the filesystem. Failed
/// points are collected, not fatal.
pub fn sweep_points(cfg: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    let channel = cfg.room.channel()?;
    let points: Vec<(usize, f64)> = cfg.noise.a_over_sigma_db.iter().copied().enumerate().collect();
    let results: Vec<_> = pool().install(|| {
        points
            .par_iter()
            .map(|&(i, db)| run_point(cfg, &channel, cfg.method, db, point_seed(cfg.seed, i)))
            .collect()
    });
    let mut out = SweepResult { method: cfg.method, points: Vec::new(), failures: Vec::new() };
    for ((_, db), r) in points.into_iter().zip(results) {
        match r {
            Ok(p) => out.points.push(p),
            Err(e) => {
                log::error!("point {db} dB failed: {e}");
                out.failures.push(PointFailure { a_over_sigma_db: db, error: e.to_string() });
            }
        }
    }
    Ok(out)
}

/// Runs the sweep and writes `sweep.csv`, `trace_<point>.csv` and
/// `point_<point>/pmf_<user>.csv` under `out`.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepResult, ExperimentError> {
    let result = sweep_points(cfg)?;
    write_sweep(&result, out)?;
    Ok(result)
}

pub fn write_sweep(result: &SweepResult, out: &Path) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(out)?;
    let users = result.points.first().map(|p| p.per_user.len()).unwrap_or(0);
    let mut sweep = csv::Writer::from_path(out.join("sweep.csv"))?;
    let mut header: Vec<String> =
        ["method", "a_over_sigma_db", "seed", "sum_rate_bits"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=users).map(|k| format!("rate_user_{k}")));
    header.push("wall_ms".into());
    header.push("trace_file".into());
    sweep.write_record(&header)?;

    for p in &result.points {
        // matrices are re-validated before anything is written
        let w = PrecodingMatrix::new(p.w.as_matrix().clone())?;
        let pmf = PmfMatrix::new(p.pmf.as_matrix().clone())?;
        let label = point_label(p.a_over_sigma_db);
        let trace_file = format!("trace_{label}.csv");
        match &p.trace {
            PointTrace::Fa(t) => t.write_csv(&out.join(&trace_file))?,
            PointTrace::Ao(t) => t.write_csv(&out.join(&trace_file))?,
        }
        let dir = out.join(format!("point_{label}"));
        std::fs::create_dir_all(&dir)?;
        for k in 0..pmf.users() {
            let mut f = csv::Writer::from_path(dir.join(format!("pmf_{}.csv", k + 1)))?;
            f.write_record(["amplitude", "probability"])?;
            for (a, q) in p.amplitudes[k].iter().zip(pmf.row(k)) {
                f.write_record([a.to_string(), q.to_string()])?;
            }
            f.flush()?;
        }
        let mut w_out = csv::Writer::from_path(dir.join("precoder.csv"))?;
        for n in 0..w.leds() {
            w_out.write_record(w.as_matrix().row(n).iter().map(|x| x.to_string()))?;
        }
        w_out.flush()?;

        let mut rec = vec![
            p.method.name().to_string(),
            p.a_over_sigma_db.to_string(),
            p.seed.to_string(),
            p.sum_rate.to_string(),
        ];
        rec.extend(p.per_user.iter().map(|r| r.to_string()));
        rec.push(p.wall_ms.to_string());
        rec.push(trace_file);
        sweep.write_record(&rec)?;
    }
    sweep.flush()?;

    if !result.failures.is_empty() {
        let mut f = csv::Writer::from_path(out.join("failures.csv"))?;
        f.write_record(["a_over_sigma_db", "error"])?;
        for e in &result.failures {
            f.write_record([e.a_over_sigma_db.to_string(), e.error.clone()])?;
        }
        f.flush()?;
    }
    Ok(())
}
