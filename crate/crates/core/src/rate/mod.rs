//! Achievable rates of the precoded broadcast channel.
//!
//! Every received signal is a Gaussian mixture: one component per tuple of
//! transmitted symbols. A user's rate is the entropy of its received mixture
//! minus the entropy of the mixture with its own symbol removed.

mod mixture;

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use mixture::{
    auto_grid, differential_entropy, gaussian_entropy_bits, GaussianMixture, GridPolicy,
    QuadratureGrid,
};

use crate::constellation::{entropy_bits, Constellation, PmfMatrix, PMF_SUM_TOL};
use crate::error::{invalid, Error, Result};
use crate::problem::Problem;

/// Largest mixture the general-mode rate will build.
pub const COMPONENT_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", format!("must be > 0, got {sigma}")));
        }
        Ok(Self { sigma })
    }
}

/// `general` keeps multi-user interference; `zf` assumes it has been nulled
/// and only uses each user's own effective gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    General,
    Zf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumRate {
    pub total: f64,
    pub per_user: Vec<f64>,
}

fn check_dims(
    h_k: &[f64],
    w: &DMatrix<f64>,
    constellations: &[Constellation],
    pmf: &PmfMatrix,
) -> Result<()> {
    let k = constellations.len();
    if w.nrows() != h_k.len() || w.ncols() != k || pmf.users() != k {
        return Err(Error::Dimension(format!(
            "channel row {}, precoder {}x{}, {} constellations, {} PMF rows",
            h_k.len(),
            w.nrows(),
            w.ncols(),
            k,
            pmf.users()
        )));
    }
    if constellations.iter().any(|c| c.m() != pmf.m()) {
        return Err(Error::Dimension("alphabet size differs from PMF width".into()));
    }
    Ok(())
}

/// `h_k^T w_i` for every user i.
fn effective_gains(h_k: &[f64], w: &DMatrix<f64>) -> Vec<f64> {
    (0..w.ncols())
        .map(|i| h_k.iter().enumerate().map(|(n, h)| h * w[(n, i)]).sum())
        .collect()
}

/// Enumerates the symbol tuples of the users in `users`, the first one
/// varying slowest.
fn enumerate_mixture(
    gains: &[f64],
    constellations: &[Constellation],
    pmf: &PmfMatrix,
    users: impl Iterator<Item = usize> + Clone,
    sigma: f64,
) -> Result<GaussianMixture> {
    let count = users.clone().fold(1u128, |acc, i| acc * constellations[i].m() as u128);
    if count > COMPONENT_CAP as u128 {
        return Err(Error::ComponentCap { components: count, cap: COMPONENT_CAP });
    }
    let mut means = vec![0.0];
    let mut weights = vec![1.0];
    for i in users {
        let amps = constellations[i].amplitudes();
        let probs = pmf.as_matrix().row(i);
        let mut nm = Vec::with_capacity(means.len() * amps.len());
        let mut nw = Vec::with_capacity(means.len() * amps.len());
        for (mu, wt) in means.iter().zip(&weights) {
            for (j, a) in amps.iter().enumerate() {
                nm.push(mu + gains[i] * a);
                nw.push(wt * probs[j]);
            }
        }
        means = nm;
        weights = nw;
    }
    Ok(GaussianMixture::from_parts(means, weights, sigma))
}

/// Density of `y_k`: one component per tuple of all users' symbols.
pub fn mixture_signal(
    h_k: &[f64],
    w: &DMatrix<f64>,
    constellations: &[Constellation],
    pmf: &PmfMatrix,
    sigma: f64,
) -> Result<GaussianMixture> {
    check_dims(h_k, w, constellations, pmf)?;
    let gains = effective_gains(h_k, w);
    enumerate_mixture(&gains, constellations, pmf, 0..constellations.len(), sigma)
}

/// Density of the interference-plus-noise term seen by user `k`.
pub fn mixture_interference(
    h_k: &[f64],
    w: &DMatrix<f64>,
    constellations: &[Constellation],
    pmf: &PmfMatrix,
    sigma: f64,
    k: usize,
) -> Result<GaussianMixture> {
    check_dims(h_k, w, constellations, pmf)?;
    if k >= constellations.len() {
        return Err(Error::Dimension(format!("user {k} out of range")));
    }
    let gains = effective_gains(h_k, w);
    enumerate_mixture(
        &gains,
        constellations,
        pmf,
        (0..constellations.len()).filter(move |&i| i != k),
        sigma,
    )
}

fn entropy_with_policy(mix: &GaussianMixture, policy: GridPolicy) -> Result<f64> {
    let grid = policy.grid_for(mix)?;
    differential_entropy(mix, &grid)
}

/// Rate of user `k` with interference treated as part of the channel.
pub fn rate_general(
    h_k: &[f64],
    w: &DMatrix<f64>,
    constellations: &[Constellation],
    pmf: &PmfMatrix,
    noise: NoiseModel,
    policy: GridPolicy,
    k: usize,
) -> Result<f64> {
    Ok(rate_general_unclamped(h_k, w, constellations, pmf, noise, policy, k)?.max(0.0))
}

pub(crate) fn rate_general_unclamped(
    h_k: &[f64],
    w: &DMatrix<f64>,
    constellations: &[Constellation],
    pmf: &PmfMatrix,
    noise: NoiseModel,
    policy: GridPolicy,
    k: usize,
) -> Result<f64> {
    let sig = mixture_signal(h_k, w, constellations, pmf, noise.sigma)?;
    let int = mixture_interference(h_k, w, constellations, pmf, noise.sigma, k)?;
    Ok(entropy_with_policy(&sig, policy)? - entropy_with_policy(&int, policy)?)
}

/// Interference-free rate of a scalar channel with effective gain `gain`,
/// clamped to `[0, H(p)]`.
pub fn rate_zf(
    gain: f64,
    constellation: &Constellation,
    pmf_row: &[f64],
    noise: NoiseModel,
    policy: GridPolicy,
) -> Result<f64> {
    if !(gain.is_finite() && gain >= 0.0) {
        return Err(invalid("gain", format!("must be >= 0, got {gain}")));
    }
    if pmf_row.len() != constellation.m() {
        return Err(Error::Dimension("PMF row width differs from alphabet size".into()));
    }
    crate::constellation::check_pmf(pmf_row.iter().copied())?;
    let raw = zf_rate_unclamped(gain, constellation.amplitudes(), pmf_row, noise.sigma, policy)?;
    Ok(raw.clamp(0.0, entropy_bits(pmf_row)))
}

/// Grid used for the single-user objective at `gain`; depends only on the
/// means, never on the weights, so the objective is smooth in the PMF.
pub(crate) fn zf_grid(gain: f64, amps: &[f64], sigma: f64, policy: GridPolicy) -> Result<QuadratureGrid> {
    let (lo, hi) = amps
        .iter()
        .map(|a| gain * a)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), m| (l.min(m), h.max(m)));
    policy.grid_for_range(lo, hi, sigma)
}

pub(crate) fn zf_rate_unclamped(
    gain: f64,
    amps: &[f64],
    pmf_row: &[f64],
    sigma: f64,
    policy: GridPolicy,
) -> Result<f64> {
    let grid = zf_grid(gain, amps, sigma, policy)?;
    let means = amps.iter().map(|a| gain * a).collect();
    let mix = GaussianMixture::from_parts(means, pmf_row.to_vec(), sigma);
    Ok(differential_entropy(&mix, &grid)? - gaussian_entropy_bits(sigma))
}

/// Unclamped single-user rate and its gradient with respect to the PMF row.
///
/// `dR/dp_m = -sum_n phi_m(y_n) (log2 f(y_n) + 1/ln 2) delta`, where `phi_m`
/// is the m-th component density.
pub fn zf_rate_and_gradient(
    gain: f64,
    amps: &[f64],
    pmf_row: &[f64],
    sigma: f64,
    policy: GridPolicy,
) -> Result<(f64, Vec<f64>)> {
    let grid = zf_grid(gain, amps, sigma, policy)?;
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
    let inv2s2 = 0.5 / (sigma * sigma);
    let m = amps.len();
    let mut phi = vec![0.0; m];
    let mut grad = vec![0.0; m];
    let mut ent = 0.0;
    for y in grid.points() {
        let mut f = 0.0;
        for j in 0..m {
            let z = y - gain * amps[j];
            phi[j] = norm * (-z * z * inv2s2).exp();
            f += pmf_row[j] * phi[j];
        }
        if f < 1e-300 {
            continue;
        }
        let lf = f.ln();
        ent -= f * lf;
        let slope = lf / LN_2 + 1.0 / LN_2;
        for j in 0..m {
            grad[j] -= phi[j] * slope;
        }
    }
    let d = grid.delta();
    grad.iter_mut().for_each(|g| *g *= d);
    Ok((ent * d / LN_2 - gaussian_entropy_bits(sigma), grad))
}

/// Sum of per-user rates.
pub fn sum_rate(problem: &Problem, w: &DMatrix<f64>, p: &PmfMatrix, mode: RateMode) -> Result<SumRate> {
    let h = problem.channel().as_matrix();
    let k_users = problem.users();
    if w.nrows() != problem.leds() || w.ncols() != k_users || p.users() != k_users {
        return Err(Error::Dimension("precoder or PMF does not match the problem".into()));
    }
    let mut per_user = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let h_k: Vec<f64> = h.row(k).iter().copied().collect();
        let r = match mode {
            RateMode::General => rate_general(
                &h_k,
                w,
                problem.constellations(),
                p,
                problem.noise(),
                problem.grid(),
                k,
            )?,
            RateMode::Zf => {
                let gain = effective_gains(&h_k, w)[k];
                // a negative effective gain is the same channel up to a sign flip
                // of the alphabet; the symmetric PAM set makes the rate even in it
                let row = p.row(k);
                let c = &problem.constellations()[k];
                let mirrored: Vec<f64> = if gain < 0.0 { row.iter().rev().copied().collect() } else { row };
                rate_zf(gain.abs(), c, &mirrored, problem.noise(), problem.grid())?
            }
        };
        per_user.push(r);
    }
    Ok(SumRate { total: per_user.iter().sum(), per_user })
}

/// Weights of the four quadratic hinge penalties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

impl PenaltyWeights {
    pub fn uniform(lambda: f64) -> Self {
        Self { lambda1: lambda, lambda2: lambda, lambda3: lambda, lambda4: lambda }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
            ("lambda4", self.lambda4),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self::uniform(1e4)
    }
}

/// Quadratic hinge penalty on precoder row norms, PMF entry bounds and PMF
/// row sums.
pub fn penalty(p: &DMatrix<f64>, w: &DMatrix<f64>, weights: &PenaltyWeights) -> f64 {
    let sq = |x: f64| x * x;
    let rows_w: f64 = (0..w.nrows())
        .map(|n| sq((w.row(n).iter().map(|x| x.abs()).sum::<f64>() - 1.0).max(0.0)))
        .sum();
    let below: f64 = p.iter().map(|&x| sq(x.min(0.0))).sum();
    let above: f64 = p.iter().map(|&x| sq((x - 1.0).max(0.0))).sum();
    let rows_p: f64 = (0..p.nrows())
        .map(|k| sq((p.row(k).iter().map(|x| x.abs()).sum::<f64>() - 1.0).max(0.0)))
        .sum();
    weights.lambda1 * rows_w + weights.lambda2 * below + weights.lambda3 * above + weights.lambda4 * rows_p
}

/// Maps a raw matrix onto valid PMF rows: entries clamped to `[0, 1]`, rows
/// renormalized. Rows already valid are passed through untouched.
pub fn sanitize_pmf(p: &DMatrix<f64>) -> PmfMatrix {
    let mut out = p.clone();
    for k in 0..out.nrows() {
        let valid = out.row(k).iter().all(|&x| (0.0..=1.0).contains(&x))
            && (out.row(k).sum() - 1.0).abs() <= PMF_SUM_TOL;
        if valid {
            continue;
        }
        let mut row: Vec<f64> =
            out.row(k).iter().map(|&x| if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) }).collect();
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        } else {
            let u = 1.0 / row.len() as f64;
            row.iter_mut().for_each(|x| *x = u);
        }
        for (j, x) in row.into_iter().enumerate() {
            out[(k, j)] = x;
        }
    }
    PmfMatrix::new(out).expect("sanitized rows are stochastic")
}

/// Brightness of a candidate `(P, W)` and its two parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fitness {
    pub value: f64,
    pub sum_rate: f64,
    pub penalty: f64,
}

/// General-mode sum rate at the sanitized PMF minus the penalty at the raw
/// point.
pub fn fitness(
    problem: &Problem,
    p: &DMatrix<f64>,
    w: &DMatrix<f64>,
    weights: &PenaltyWeights,
) -> Result<Fitness> {
    let pen = penalty(p, w, weights);
    let sr = sum_rate(problem, w, &sanitize_pmf(p), RateMode::General)?.total;
    Ok(Fitness { value: sr - pen, sum_rate: sr, penalty: pen })
}
