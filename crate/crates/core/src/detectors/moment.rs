//! SNR-moment detector over multiple fading blocks: compare the first two
//! empirical SNR moments with their no-attack references.

use super::{DetectError, DetectionOutcome, DetectorKind, Verdict};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct MomentDetector {
    /// reference moments under no attack
    pub ref_m1: f64,
    pub ref_m2: f64,
    /// deviation thresholds ζ̄₁, ζ̄₂
    pub zeta1: f64,
    pub zeta2: f64,
    /// number of fading blocks pooled per decision
    pub window: usize,
}

impl MomentDetector {
    pub fn new(
        ref_m1: f64,
        ref_m2: f64,
        zeta1: f64,
        zeta2: f64,
        window: usize,
    ) -> Result<Self, DetectError> {
        if !(zeta1 > 0.0) || !(zeta2 > 0.0) {
            return Err(DetectError::InvalidArgument("thresholds must be positive".into()));
        }
        if window == 0 {
            return Err(DetectError::InvalidArgument("window must be >= 1".into()));
        }
        Ok(Self { ref_m1, ref_m2, zeta1, zeta2, window })
    }
}

/// The receiver's per-block SNR observable: excess mean energy over the
/// noise floor, clamped at zero. Kept standalone so alternative estimators
/// can be swapped in.
pub fn snr_estimate_from_block(samples: &[Complex64], sigma_w2: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mean: f64 = samples.iter().map(|y| y.norm_sqr()).sum::<f64>() / samples.len() as f64;
    ((mean - sigma_w2) / sigma_w2).max(0.0)
}

/// Declare an attack iff the first or second empirical moment deviates from
/// its reference by at least its threshold. The reported statistic is the
/// worst deviation normalized by its threshold (alarm at >= 1).
pub fn moment_detect(
    snr_estimates: &[f64],
    det: &MomentDetector,
) -> Result<DetectionOutcome, DetectError> {
    if snr_estimates.len() != det.window {
        return Err(DetectError::InvalidArgument(format!(
            "{} estimates for window {}",
            snr_estimates.len(),
            det.window
        )));
    }
    let t = snr_estimates.len() as f64;
    let m1 = snr_estimates.iter().sum::<f64>() / t;
    let m2 = snr_estimates.iter().map(|s| s * s).sum::<f64>() / t;
    let d1 = (m1 - det.ref_m1).abs() / det.zeta1;
    let d2 = (m2 - det.ref_m2).abs() / det.zeta2;
    let statistic = d1.max(d2);
    Ok(DetectionOutcome {
        detector: DetectorKind::Moment,
        statistic,
        threshold: 1.0,
        threshold_upper: None,
        verdict: if statistic >= 1.0 { Verdict::Attack } else { Verdict::NoAttack },
        run_length: None,
    })
}
