//! Precoder subproblem solved by the convex-concave procedure.
//!
//! Over the ZF set `W = B diag(g)` the rate of user k depends on `g_k` only
//! through the Gaussian kernels `exp(-(y_n - c_k g_k a_m)^2 / 2 sigma^2)`.
//! Each CCP iteration replaces every kernel by its first-order expansion
//! around the previous iterate, which makes the received density affine in
//! `g_k` and the entropy objective concave. The surrogate is maximized by
//! projected gradient over `{g >= 0, |B| g <= 1}`; the step toward its
//! maximizer is then backtracked until the exact objective does not drop.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::basis::ZfBasis;
use crate::constellation::PmfMatrix;
use crate::error::{invalid, Error, Result};
use crate::precoder::PrecodingMatrix;
use crate::problem::Problem;
use crate::rate::{gaussian_entropy_bits, zf_grid, zf_rate_unclamped};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcpConfig {
    pub max_iters: usize,
    /// Relative Frobenius change that ends the procedure.
    pub tol: f64,
    /// Iteration cap of the inner surrogate solver.
    pub inner_iters: usize,
    pub inner_tol: f64,
}

impl Default for CcpConfig {
    fn default() -> Self {
        Self { max_iters: 50, tol: 1e-4, inner_iters: 500, inner_tol: 1e-10 }
    }
}

impl CcpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(invalid("max_iters", "must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be > 0"));
        }
        Ok(())
    }
}

/// First-order expansion of `exp(-z^2 / 2 sigma^2)`,
/// `z = y - h_k^T w a_m`, around `w_prev`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedKernel {
    pub w_prev: Vec<f64>,
    /// Kernel value at `w_prev`.
    pub base: f64,
    /// Gradient with respect to `w` at `w_prev`.
    pub slope: Vec<f64>,
}

impl LinearizedKernel {
    pub fn eval(&self, w: &[f64]) -> f64 {
        self.base
            + self
                .slope
                .iter()
                .zip(w.iter().zip(&self.w_prev))
                .map(|(s, (a, b))| s * (a - b))
                .sum::<f64>()
    }
}

pub fn ccp_linearize(w_prev: &[f64], h_k: &[f64], amplitude: f64, y: f64, sigma: f64) -> LinearizedKernel {
    let proj: f64 = h_k.iter().zip(w_prev).map(|(h, w)| h * w).sum();
    let z = y - proj * amplitude;
    let s2 = sigma * sigma;
    let base = (-z * z / (2.0 * s2)).exp();
    let coef = base * z / s2 * amplitude;
    LinearizedKernel { w_prev: w_prev.to_vec(), base, slope: h_k.iter().map(|h| coef * h).collect() }
}

/// Linearized density of one user on its grid, affine in `g_k`:
/// `F(g) = f0 + d (g - g_prev)`.
struct UserSurrogate {
    f0: Vec<f64>,
    d: Vec<f64>,
    delta: f64,
    g_prev: f64,
    noise_entropy: f64,
}

impl UserSurrogate {
    fn build(c: f64, g_max: f64, amps: &[f64], p: &[f64], sigma: f64, g_prev: f64, problem: &Problem) -> Result<Self> {
        let grid = zf_grid(c * g_max.max(g_prev), amps, sigma, problem.grid())?;
        let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
        let s2 = sigma * sigma;
        let mut f0 = Vec::with_capacity(grid.n_points());
        let mut d = Vec::with_capacity(grid.n_points());
        for y in grid.points() {
            let (mut a, mut b) = (0.0, 0.0);
            for (am, pm) in amps.iter().zip(p) {
                let z = y - c * g_prev * am;
                let e = (-z * z / (2.0 * s2)).exp();
                a += pm * e;
                b += pm * e * z / s2 * c * am;
            }
            f0.push(norm * a);
            d.push(norm * b);
        }
        Ok(Self { f0, d, delta: grid.delta(), g_prev, noise_entropy: gaussian_entropy_bits(sigma) })
    }

    fn value_and_slope(&self, g: f64) -> (f64, f64) {
        let dg = g - self.g_prev;
        let (mut v, mut s) = (0.0, 0.0);
        for (f0, d) in self.f0.iter().zip(&self.d) {
            let f = f0 + d * dg;
            if f < 1e-300 {
                continue;
            }
            let lf = f.ln();
            v -= f * lf;
            s -= d * (lf + 1.0);
        }
        (v * self.delta / LN_2 - self.noise_entropy, s * self.delta / LN_2)
    }
}

/// Sum of unclamped ZF rates at gains `g`.
pub fn zf_objective(problem: &Problem, basis: &ZfBasis, p: &PmfMatrix, g: &[f64]) -> Result<f64> {
    let sigma = problem.noise().sigma;
    let mut total = 0.0;
    for k in 0..basis.users() {
        let amps = problem.constellations()[k].amplitudes();
        total += zf_rate_unclamped(basis.gains()[k] * g[k], amps, &p.row(k), sigma, problem.grid())?;
    }
    Ok(total)
}

/// The concave CCP surrogate built at `g_prev`, evaluated at `g`.
pub fn surrogate_objective(problem: &Problem, basis: &ZfBasis, p: &PmfMatrix, g_prev: &[f64], g: &[f64]) -> Result<f64> {
    let parts = build_surrogates(problem, basis, p, g_prev)?;
    Ok(parts.iter().zip(g).map(|(s, &x)| s.value_and_slope(x).0).sum())
}

fn build_surrogates(problem: &Problem, basis: &ZfBasis, p: &PmfMatrix, g_prev: &[f64]) -> Result<Vec<UserSurrogate>> {
    (0..basis.users())
        .map(|k| {
            UserSurrogate::build(
                basis.gains()[k],
                basis.max_gain(k),
                problem.constellations()[k].amplitudes(),
                &p.row(k),
                problem.noise().sigma,
                g_prev[k],
                problem,
            )
        })
        .collect()
}

/// Projected gradient ascent on the surrogate. Returns the maximizer and
/// whether the inner solver met its tolerance.
fn maximize_surrogate(parts: &[UserSurrogate], basis: &ZfBasis, start: &[f64], cfg: &CcpConfig) -> (Vec<f64>, bool) {
    let eval = |x: &[f64]| -> (f64, Vec<f64>) {
        let mut v = 0.0;
        let mut grad = Vec::with_capacity(x.len());
        for (s, &xi) in parts.iter().zip(x) {
            let (a, b) = s.value_and_slope(xi);
            v += a;
            grad.push(b);
        }
        (v, grad)
    };
    let mut x = start.to_vec();
    let (mut v, mut grad) = eval(&x);
    let mut step = 1e-2;
    for _ in 0..cfg.inner_iters {
        let mut moved = None;
        while step > 1e-20 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            let y = basis.project(&trial);
            let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let dn2: f64 = d.iter().map(|t| t * t).sum();
            if dn2 == 0.0 {
                return (x, true);
            }
            let (vy, gy) = eval(&y);
            let lin: f64 = grad.iter().zip(&d).map(|(a, b)| a * b).sum();
            if vy >= v + lin - dn2 / (2.0 * step) {
                moved = Some((y, vy, gy, dn2.sqrt()));
                break;
            }
            step *= 0.5;
        }
        let Some((y, vy, gy, dn)) = moved else {
            return (x, true);
        };
        let scale = 1.0 + x.iter().map(|t| t * t).sum::<f64>().sqrt();
        x = y;
        v = vy;
        grad = gy;
        if dn <= cfg.inner_tol * scale {
            return (x, true);
        }
        step *= 2.0;
    }
    (x, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcpStep {
    pub iteration: usize,
    /// Exact (unclamped) ZF sum rate after the step, bits.
    pub objective: f64,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PrecoderSolution {
    pub w: PrecodingMatrix,
    pub g: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when some inner surrogate solve hit its iteration cap.
    pub inner_warning: bool,
    pub trace: Vec<CcpStep>,
}

/// Runs the CCP from the feasible gains `g_init` with the PMFs fixed.
pub fn solve_precoder_subproblem(
    problem: &Problem,
    basis: &ZfBasis,
    p: &PmfMatrix,
    g_init: &[f64],
    cfg: &CcpConfig,
) -> Result<PrecoderSolution> {
    cfg.validate()?;
    if g_init.len() != basis.users() {
        return Err(Error::Dimension("gain vector length differs from user count".into()));
    }
    if !basis.is_feasible(g_init, 1e-9) {
        return Err(invalid("g_init", "starting precoder is not feasible"));
    }
    let col_norms: Vec<f64> = (0..basis.users()).map(|k| basis.basis().column(k).norm()).collect();
    let frob = |a: &[f64]| a.iter().zip(&col_norms).map(|(x, n)| (x * n).powi(2)).sum::<f64>().sqrt();

    let mut g = g_init.to_vec();
    let mut obj = zf_objective(problem, basis, p, &g)?;
    let mut trace = vec![CcpStep { iteration: 0, objective: obj, g: g.clone() }];
    let mut converged = false;
    let mut inner_warning = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let parts = build_surrogates(problem, basis, p, &g)?;
        let (cand, ok) = maximize_surrogate(&parts, basis, &g, cfg);
        inner_warning |= !ok;

        let mut next = g.clone();
        let mut t = 1.0;
        for _ in 0..40 {
            let trial: Vec<f64> = g.iter().zip(&cand).map(|(a, b)| a + t * (b - a)).collect();
            let v = zf_objective(problem, basis, p, &trial)?;
            if v >= obj {
                next = trial;
                obj = v;
                break;
            }
            t *= 0.5;
        }
        let diff: Vec<f64> = next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let denom = frob(&next);
        let rel = if denom > 0.0 { frob(&diff) / denom } else { 0.0 };
        g = next;
        trace.push(CcpStep { iteration: iterations, objective: obj, g: g.clone() });
        if rel <= cfg.tol {
            converged = true;
            break;
        }
    }
    if inner_warning {
        log::warn!("CCP surrogate solver hit its iteration cap; returning best iterate");
    }
    Ok(PrecoderSolution { w: basis.precoder(&g)?, g, iterations, converged, inner_warning, trace })
}
