//! Attack designers matched to each detector: variance-target inversion
//! for the energy test, CUSUM hyperparameter inversion, MISO joint
//! beamforming, the randomized-policy LP over fading blocks, the
//! imperfect-CSI budgeted attack, and the random-phase baseline.

pub(crate) mod lp_policy;
mod phase;
mod sequential;
mod ump;

pub use lp_policy::{design_lp_attack, quantized_reference_rate, LpPolicy};
pub use phase::{
    design_csi_attack, design_miso_attack, design_phase_attack, estimate_sigma_min,
    random_phase_baseline,
};
pub use sequential::{a_from_threshold, design_cusum_attack, variance_floor_from_arld};
pub use ump::target_variance_ump;

use crate::channel::PhaseVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),
    #[error("domain guard: root a = {root:.6} exceeds {max} (monotone branch); {context}")]
    DomainGuard { root: f64, max: f64, context: String },
    #[error(transparent)]
    Solver(#[from] crate::solvers::SolverError),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Stat(#[from] crate::statdist::StatError),
}

/// A designed phase-shift attack with its achieved objective, the bound it
/// was designed against, and the detector-side prediction at the design
/// point (detection probability, run-length floor, or rate).
#[derive(Debug, Clone)]
pub struct AttackPlan {
    pub omega: PhaseVector,
    /// achieved |s^H Ψ|² (channel-gain units) or policy objective
    pub achieved_metric: f64,
    /// the governing bound: ν, ξ_glr, ν_jt, or the CSI energy budget
    pub target_bound: f64,
    pub predicted: f64,
    pub feasible: bool,
    /// achievable [min, max] of the objective seen by the design search
    pub achievable: Option<(f64, f64)>,
}
