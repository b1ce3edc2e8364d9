use std::path::Path;

use serde::{Deserialize, Serialize};

use super::basis::{zf_basis, zf_residual, ZfBasis};
use super::ccp::{solve_precoder_subproblem, zf_objective, CcpConfig};
use super::pmf::{solve_pmf_subproblem, PmfSolverConfig};
use crate::constellation::{uniform_pmf, PmfMatrix};
use crate::error::{invalid, Result};
use crate::precoder::{max_row_l1, PrecodingMatrix};
use crate::problem::Problem;
use crate::rate::{RateMode, SumRate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoConfig {
    pub outer_iters: usize,
    /// Early exit once an outer iteration gains less than this, bits.
    pub min_improvement: f64,
    pub pmf: PmfSolverConfig,
    pub ccp: CcpConfig,
    /// When false the PMFs stay uniform and only the precoder is optimized.
    pub optimize_pmf: bool,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            outer_iters: 20,
            min_improvement: 1e-5,
            pmf: PmfSolverConfig::default(),
            ccp: CcpConfig::default(),
            optimize_pmf: true,
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_iters < 1 {
            return Err(invalid("outer_iters", "must be >= 1"));
        }
        self.ccp.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AoTraceRow {
    pub outer_iter: usize,
    pub inner_iter: usize,
    pub sum_rate_bits: f64,
    pub max_row_l1: f64,
    pub zf_residual: f64,
}

/// One row after initialization, one after each PMF step (`inner_iter` 0)
/// and one per CCP iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AoTrace {
    pub rows: Vec<AoTraceRow>,
}

impl AoTrace {
    /// Sum rate at the end of each outer iteration, starting with the
    /// initial point.
    pub fn outer_sum_rates(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        let mut last_outer = usize::MAX;
        for r in &self.rows {
            if r.outer_iter != last_outer {
                out.push(r.sum_rate_bits);
                last_outer = r.outer_iter;
            } else {
                *out.last_mut().unwrap() = r.sum_rate_bits;
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut out = csv::Writer::from_path(path)?;
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()
    }
}

#[derive(Debug, Clone)]
pub struct AoOutcome {
    pub w: PrecodingMatrix,
    pub p: PmfMatrix,
    pub g: Vec<f64>,
    pub basis: ZfBasis,
    pub sum_rate: SumRate,
    pub trace: AoTrace,
}

/// Alternates the PMF and precoder subproblems starting from the scaled
/// pseudo-inverse precoder and uniform PMFs.
pub fn run_ao(problem: &Problem, cfg: &AoConfig) -> Result<AoOutcome> {
    cfg.validate()?;
    let basis = zf_basis(problem.channel())?;
    let uniform = uniform_pmf(problem.users(), problem.m())?;
    let mut g = vec![1.0; problem.users()];
    let mut p = uniform.clone();
    let mut trace = AoTrace::default();

    let record = |trace: &mut AoTrace, outer, inner, p: &PmfMatrix, g: &[f64]| -> Result<f64> {
        let w = basis.precoder(g)?;
        let sr = problem.sum_rate(&w, p, RateMode::Zf)?.total;
        trace.rows.push(AoTraceRow {
            outer_iter: outer,
            inner_iter: inner,
            sum_rate_bits: sr,
            max_row_l1: max_row_l1(w.as_matrix()),
            zf_residual: zf_residual(problem.channel(), w.as_matrix()),
        });
        Ok(sr)
    };

    record(&mut trace, 0, 0, &p, &g)?;
    let mut prev = zf_objective(problem, &basis, &p, &g)?;
    for r in 1..=cfg.outer_iters {
        if cfg.optimize_pmf {
            let w = basis.precoder(&g)?;
            let cand = solve_pmf_subproblem(problem, w.as_matrix(), &uniform, &cfg.pmf)?;
            // keep the incumbent if the solver stopped short of it
            if zf_objective(problem, &basis, &cand, &g)? >= zf_objective(problem, &basis, &p, &g)? {
                p = cand;
            }
            record(&mut trace, r, 0, &p, &g)?;
        }
        let sol = solve_precoder_subproblem(problem, &basis, &p, &g, &cfg.ccp)?;
        for step in sol.trace.iter().skip(1) {
            record(&mut trace, r, step.iteration, &p, &step.g)?;
        }
        g = sol.g;
        let cur = zf_objective(problem, &basis, &p, &g)?;
        log::debug!("ao outer {r}: {cur:.6} bits");
        if cur - prev < cfg.min_improvement {
            break;
        }
        prev = cur;
    }
    let w = basis.precoder(&g)?;
    let sum_rate = problem.sum_rate(&w, &p, RateMode::Zf)?;
    Ok(AoOutcome { w, p, g, basis, sum_rate, trace })
}
