//! Penalty-method firefly search over general precoders and PMFs.
//!
//! Each firefly is a raw `(W, P)` pair whose brightness is the sum rate
//! minus the constraint penalty. In every generation each firefly moves
//! toward every brighter one, pairwise and in place, then the population
//! is re-ranked and the best-ever location is kept.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constellation::{uniform_pmf, PmfMatrix};
use crate::error::{invalid, Error, Result};
use crate::precoder::PrecodingMatrix;
use crate::problem::Problem;
use crate::rate::{fitness, sum_rate, PenaltyWeights, RateMode, SumRate};

/// Lower clamp applied to probabilities in the final projection.
const FINAL_PMF_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaConfig {
    pub population: usize,
    pub generations: usize,
    pub beta0: f64,
    pub gamma_fa: f64,
    pub alpha0: f64,
    pub penalty: PenaltyWeights,
    /// Set per run; experiment configs derive it from the top-level seed.
    #[serde(skip)]
    pub seed: u64,
    /// When false the PMFs stay uniform and only the precoder is searched.
    pub optimize_pmf: bool,
}

impl Default for FaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 35,
            beta0: 1.0,
            gamma_fa: 1.0,
            alpha0: 0.9,
            penalty: PenaltyWeights::default(),
            seed: 0,
            optimize_pmf: true,
        }
    }
}

impl FaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(invalid("population", "must be >= 2"));
        }
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(invalid("beta0", "must be > 0"));
        }
        if !(self.gamma_fa > 0.0 && self.gamma_fa.is_finite()) {
            return Err(invalid("gamma_fa", "must be > 0"));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            return Err(invalid("alpha0", "must lie in (0, 1]"));
        }
        self.penalty.validate()
    }
}

/// A candidate location with its cached brightness.
#[derive(Debug, Clone, PartialEq)]
pub struct Firefly {
    pub w: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub brightness: f64,
    pub sum_rate: f64,
    pub penalty: f64,
}

impl Firefly {
    pub fn evaluate(problem: &Problem, w: DMatrix<f64>, p: DMatrix<f64>, weights: &PenaltyWeights) -> Result<Self> {
        let f = fitness(problem, &p, &w, weights)?;
        Ok(Self { w, p, brightness: f.value, sum_rate: f.sum_rate, penalty: f.penalty })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaTraceRow {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_sum_rate_bits: f64,
    pub penalty: f64,
}

/// Incumbent statistics after initialization (generation 0) and after every
/// generation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FaTrace {
    pub rows: Vec<FaTraceRow>,
}

impl FaTrace {
    fn push(&mut self, generation: usize, best: &Firefly) {
        self.rows.push(FaTraceRow {
            generation,
            best_fitness: best.brightness,
            best_sum_rate_bits: best.sum_rate,
            penalty: best.penalty,
        });
    }

    pub fn best_fitness(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.best_fitness).collect()
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut out = csv::Writer::from_path(path)?;
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()
    }

    pub fn write_csv_to(&self, w: impl Write) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()
    }
}

/// Result of a firefly run, projected onto the feasible set.
#[derive(Debug, Clone)]
pub struct FaOutcome {
    pub w: PrecodingMatrix,
    pub p: PmfMatrix,
    pub sum_rate: SumRate,
    pub trace: FaTrace,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_simplex_row(m: usize, rng: &mut impl Rng) -> Vec<f64> {
    // normalized exponentials are uniform on the simplex
    let e: Vec<f64> = (0..m)
        .map(|_| {
            let x: f64 = Exp1.sample(rng);
            x + 1e-12
        })
        .collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Random initial fireflies: precoder entries uniform on `[-1/K, 1/K]` so
/// every row is L1-feasible, PMF rows uniform on the simplex.
pub fn init_population(cfg: &FaConfig, problem: &Problem, rng: &mut impl Rng) -> Result<Vec<Firefly>> {
    let (nt, k, m) = (problem.leds(), problem.users(), problem.m());
    let bound = 1.0 / k as f64;
    let uniform = uniform_pmf(k, m)?.as_matrix().clone();
    let mut pop = Vec::with_capacity(cfg.population);
    for _ in 0..cfg.population {
        let w = DMatrix::from_fn(nt, k, |_, _| rng.gen_range(-bound..=bound));
        let p = if cfg.optimize_pmf {
            let rows: Vec<Vec<f64>> = (0..k).map(|_| random_simplex_row(m, rng)).collect();
            DMatrix::from_fn(k, m, |i, j| rows[i][j])
        } else {
            uniform.clone()
        };
        pop.push(Firefly::evaluate(problem, w, p, &cfg.penalty)?);
    }
    Ok(pop)
}

/// Moves firefly `a` toward the brighter firefly `b` at generation `t`.
///
/// Attraction decays with the squared Frobenius distance; the random term
/// has standard-normal entries scaled by `1/K` for the precoder and `1/M`
/// for the PMF, times `alpha0^t`.
pub fn move_firefly(
    a: &Firefly,
    b: &Firefly,
    t: usize,
    cfg: &FaConfig,
    problem: &Problem,
    rng: &mut impl Rng,
) -> Result<Firefly> {
    let alpha = cfg.alpha0.powi(t as i32);
    let k = a.w.ncols() as f64;
    let m = a.p.ncols() as f64;

    let step = |x: &DMatrix<f64>, y: &DMatrix<f64>, scale: f64, rng: &mut dyn rand::RngCore| {
        let diff = y - x;
        let beta = cfg.beta0 * (-cfg.gamma_fa * diff.norm_squared()).exp();
        let mut out = x + diff * beta;
        for v in out.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v += alpha * scale * z;
        }
        out
    };
    let w = step(&a.w, &b.w, 1.0 / k, rng);
    let p = if cfg.optimize_pmf { step(&a.p, &b.p, 1.0 / m, rng) } else { a.p.clone() };
    Firefly::evaluate(problem, w, p, &cfg.penalty)
}

/// Stable descending sort by brightness; NaN sinks to the end.
pub fn rank(pop: &mut [Firefly]) {
    pop.sort_by(|x, y| match (x.brightness.is_nan(), y.brightness.is_nan()) {
        (false, false) => y.brightness.total_cmp(&x.brightness),
        (a, b) => a.cmp(&b),
    });
}

/// Runs the firefly search and returns the brightest location ever
/// evaluated, projected onto the feasible set.
pub fn run_fa(cfg: &FaConfig, problem: &Problem) -> Result<FaOutcome> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut pop = init_population(cfg, problem, &mut rng)?;
    rank(&mut pop);
    if pop.iter().all(|f| f.brightness.is_nan()) {
        return Err(Error::AllNan);
    }
    let mut best = pop[0].clone();
    let mut trace = FaTrace::default();
    trace.push(0, &best);

    let n = pop.len();
    for t in 1..=cfg.generations {
        for i in 0..n {
            for j in 0..n {
                if pop[j].brightness > pop[i].brightness {
                    let moved = move_firefly(&pop[i], &pop[j], t, cfg, problem, &mut rng)?;
                    if moved.brightness > best.brightness {
                        best = moved.clone();
                    }
                    pop[i] = moved;
                }
            }
        }
        rank(&mut pop);
        log::debug!("fa generation {t}: best fitness {:.6}", best.brightness);
        trace.push(t, &best);
    }

    let (w, p) = project_feasible(&best.w, &best.p)?;
    let sum_rate = sum_rate(problem, w.as_matrix(), &p, RateMode::General)?;
    Ok(FaOutcome { w, p, sum_rate, trace })
}

/// Clamps PMF entries to `[1e-6, 1]` and renormalizes, and scales down
/// precoder rows whose L1 norm exceeds one.
pub fn project_feasible(w: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<(PrecodingMatrix, PmfMatrix)> {
    let mut q = p.map(|x| if x.is_nan() { FINAL_PMF_FLOOR } else { x.clamp(FINAL_PMF_FLOOR, 1.0) });
    for k in 0..q.nrows() {
        let s = q.row(k).sum();
        q.row_mut(k).scale_mut(1.0 / s);
    }
    Ok((PrecodingMatrix::project(w.clone())?, PmfMatrix::new(q)?))
}
