//! PMF subproblem: with the precoder fixed, each ZF user's rate is a concave
//! function of its own PMF row, maximized by projected gradient ascent.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constellation::PmfMatrix;
use crate::error::{invalid, Error, Result};
use crate::problem::Problem;
use crate::rate::{zf_rate_and_gradient, GridPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PmfSolverConfig {
    pub max_iters: usize,
    /// Stop once the gradient mapping norm drops below this.
    pub grad_tol: f64,
}

impl Default for PmfSolverConfig {
    fn default() -> Self {
        Self { max_iters: 2000, grad_tol: 1e-6 }
    }
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmfRowSolution {
    pub p: Vec<f64>,
    /// Unclamped rate at `p`, bits.
    pub rate: f64,
    /// Partial derivatives at `p`, bits.
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes the single-user rate over the simplex for effective gain
/// `gain`, starting from `p_init`.
pub fn solve_pmf_row(
    gain: f64,
    amps: &[f64],
    p_init: &[f64],
    sigma: f64,
    policy: GridPolicy,
    cfg: &PmfSolverConfig,
) -> Result<PmfRowSolution> {
    if p_init.len() != amps.len() {
        return Err(Error::Dimension("PMF start differs from alphabet size".into()));
    }
    let eval = |p: &[f64]| zf_rate_and_gradient(gain, amps, p, sigma, policy);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut p = p_init.to_vec();
    let (mut value, mut grad) = eval(&p)?;
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let mut accepted = None;
        while step > 1e-14 {
            let trial: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
            let q = project_simplex(&trial);
            let d: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
            let dn2 = dot(&d, &d);
            if dn2 == 0.0 {
                accepted = Some((q, value, grad.clone(), 0.0));
                break;
            }
            let (vq, gq) = eval(&q)?;
            if vq >= value + dot(&grad, &d) - dn2 / (2.0 * step) {
                accepted = Some((q, vq, gq, dn2.sqrt() / step));
                break;
            }
            step *= 0.5;
        }
        let Some((q, vq, gq, mapping)) = accepted else {
            converged = true;
            break;
        };
        p = q;
        value = vq;
        grad = gq;
        if mapping < cfg.grad_tol {
            converged = true;
            break;
        }
        step = (step * 2.0).min(1e6);
    }
    Ok(PmfRowSolution { p, rate: value, gradient: grad, iterations, converged })
}

/// Solves every user's PMF row independently under precoder `w`.
pub fn solve_pmf_subproblem(
    problem: &Problem,
    w: &DMatrix<f64>,
    p_init: &PmfMatrix,
    cfg: &PmfSolverConfig,
) -> Result<PmfMatrix> {
    if !p_init.is_interior() {
        return Err(invalid("p_init", "starting PMF must be strictly inside the simplex"));
    }
    let h = problem.channel().as_matrix();
    let mut out = p_init.clone();
    for k in 0..problem.users() {
        let gain = h.row(k).dot(&w.column(k).transpose());
        let amps = problem.constellations()[k].amplitudes();
        let sol = solve_pmf_row(gain.abs(), amps, &p_init.row(k), problem.noise().sigma, problem.grid(), cfg)?;
        let mut row = sol.p;
        if gain < 0.0 {
            row.reverse();
        }
        // exact renormalization guards the 1e-9 row-sum contract
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
        out.set_row(k, &row)?;
    }
    Ok(out)
}
