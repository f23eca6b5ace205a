//! Receiver-side attack detectors: the fixed-sample energy test, the
//! GLR-CUSUM sequential test, the SNR-moment test over fading blocks, and
//! the per-sample double-threshold test under imperfect CSI.

mod cusum;
mod double_threshold;
mod energy;
mod moment;

pub use cusum::{cusum_threshold, GlrCusum};
pub use double_threshold::{
    double_threshold_detect, double_thresholds, ks_statistic, DoubleThresholdTest,
};
pub use energy::{detection_probability, energy_detect, energy_threshold, EnergyTest};
pub use moment::{moment_detect, snr_estimate_from_block, MomentDetector};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Stat(#[from] crate::statdist::StatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// H0: no attack
    NoAttack,
    /// H1: attack declared
    Attack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Energy,
    GlrCusum,
    Moment,
    DoubleThreshold,
}

/// Statistic, threshold(s), verdict and run-length bookkeeping shared by
/// the detector family; serializes into the harness result schema.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionOutcome {
    pub detector: DetectorKind,
    pub statistic: f64,
    pub threshold: f64,
    pub threshold_upper: Option<f64>,
    pub verdict: Verdict,
    pub run_length: Option<usize>,
}
