//! Low-complexity design: zero-forcing precoding with PMFs and precoder
//! optimized alternately.

mod ao;
mod basis;
mod ccp;
mod pmf;

pub use ao::{run_ao, AoConfig, AoOutcome, AoTrace, AoTraceRow};
pub use basis::{zf_basis, zf_residual, ZfBasis};
pub use ccp::{
    ccp_linearize, solve_precoder_subproblem, surrogate_objective, zf_objective, CcpConfig, CcpStep,
    LinearizedKernel, PrecoderSolution,
};
pub use pmf::{project_simplex, solve_pmf_row, solve_pmf_subproblem, PmfRowSolution, PmfSolverConfig};
