//! Numerical-optimization core: the unit-diagonal semidefinite relaxation
//! with Gaussian randomization, a revised-simplex LP, scalar root finding,
//! and adaptive quadrature.

mod lp;
mod quad;
mod root;
mod sdp;

pub use lp::{
    complementary_slackness_residual, solve_lp, solve_lp_with_basis, LpBuilder, LpColumns,
    LpProblem, LpSolution, LpStatus, SparseColumns, SparseLp,
};
pub use quad::{quadrature, quadrature_to_inf};
pub use root::find_root;
pub use sdp::{
    gaussian_randomize, solve_unit_diag_sdp, solve_unit_diag_sdp_dense, SdpSolution, SdpStatus,
    UnitDiagSdp,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no sign change on bracket [{lo}, {hi}]: f = ({f_lo}, {f_hi})")]
    BracketError { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}
