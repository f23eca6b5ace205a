//! Closed-form distributions and special functions backing the detectors:
//! chi-squared machinery for the energy test, received-SNR moments under
//! continuous and quantized phase control, the KL divergence driving the
//! CUSUM bounds, and the received-energy law under imperfect CSI.

mod csi;
mod moments;
mod special;

pub use csi::{csi_energy_dist, CsiEnergyDist};
pub use moments::{
    quantization_cf, quantized_imag_variance, snr_moments_continuous, snr_moments_discrete,
    PhaseModel, SnrMomentSet,
};
pub use special::{chi2_cdf, chi2_inv, gamma_p, gamma_q, ln_gamma};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl From<crate::solvers::SolverError> for StatError {
    fn from(e: crate::solvers::SolverError) -> Self {
        StatError::NumericalFailure(e.to_string())
    }
}

/// KL divergence between zero-mean complex Gaussians with variances
/// `sigma2` (alternative) and `sigma02` (null):
/// `I(σ²) = ln(σ₀²/σ²) + σ²/σ₀² − 1`.
pub fn kl_divergence(sigma2: f64, sigma02: f64) -> Result<f64, StatError> {
    if !(sigma2 > 0.0) || !(sigma02 > 0.0) {
        return Err(StatError::InvalidArgument(format!(
            "variances must be positive: sigma2 = {sigma2}, sigma02 = {sigma02}"
        )));
    }
    Ok((sigma02 / sigma2).ln() + sigma2 / sigma02 - 1.0)
}
