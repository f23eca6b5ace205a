//! Per-sample double-threshold test under imperfect CSI.
//!
//! The per-sample Kolmogorov–Smirnov deviation has high variance for
//! mid-range energies and is tamed by a Chebyshev bound, which certifies a
//! small alarm probability only when the sample energy is below r_l or
//! above r_u. The detector therefore alarms exactly when a sample leaves
//! the open interval (r_l, r_u).

use super::{DetectError, DetectionOutcome, DetectorKind, Verdict};
use crate::statdist::CsiEnergyDist;

#[derive(Debug, Clone)]
pub struct DoubleThresholdTest {
    pub r_l: f64,
    pub r_u: f64,
    /// KS critical value ι̅ (configuration input, e.g. 0.230 at α̂ = 0.01, K = 100)
    pub iota: f64,
    /// per-sample alarm-probability budget ε̄
    pub eps_ks: f64,
    pub k: usize,
    pub f0: CsiEnergyDist,
}

impl DoubleThresholdTest {
    pub fn new(k: usize, iota: f64, eps_ks: f64, f0: CsiEnergyDist) -> Result<Self, DetectError> {
        let (r_l, r_u) = double_thresholds(k, iota, eps_ks, &f0)?;
        Ok(Self { r_l, r_u, iota, eps_ks, k, f0 })
    }
}

/// KS statistic D̄ = max_n |F̂₁(r_n) − F₀(r_n)| with the right-continuous
/// empirical CDF evaluated at the samples themselves.
pub fn ks_statistic(energies: &[f64], f0: &CsiEnergyDist) -> f64 {
    if energies.is_empty() {
        return 0.0;
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < n {
        // advance over ties so F̂₁ carries the full count at the value
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let emp = (j + 1) as f64 / n as f64;
        sup = sup.max((emp - f0.cdf(sorted[i])).abs());
        i = j + 1;
    }
    sup
}

/// Energy thresholds from the Chebyshev certificate: the roots of
/// z² − z + (K−1) ε̄ ι̅² = 0 mapped through F₀⁻¹.
pub fn double_thresholds(
    k: usize,
    iota: f64,
    eps_ks: f64,
    f0: &CsiEnergyDist,
) -> Result<(f64, f64), DetectError> {
    if k == 0 || !(iota > 0.0) || !(eps_ks > 0.0) {
        return Err(DetectError::InvalidArgument(format!(
            "double_thresholds(k={k}, iota={iota}, eps_ks={eps_ks})"
        )));
    }
    let c = 4.0 * (k as f64 - 1.0) * eps_ks * iota * iota;
    if c > 1.0 {
        let max_eps = 1.0 / (4.0 * (k as f64 - 1.0) * iota * iota);
        return Err(DetectError::InvalidArgument(format!(
            "discriminant negative: eps_ks = {eps_ks} exceeds the max admissible {max_eps}"
        )));
    }
    let root = (1.0 - c).sqrt();
    // clamp away from the exact endpoints where the quantile diverges
    let z_lo = ((1.0 - root) / 2.0).max(1e-12);
    let z_hi = ((1.0 + root) / 2.0).min(1.0 - 1e-12);
    let r_l = f0.inv_cdf(z_lo)?;
    let r_u = f0.inv_cdf(z_hi)?;
    Ok((r_l, r_u))
}

/// Alarm iff any sample energy satisfies r ≤ r_l or r ≥ r_u. The statistic
/// is the worst signed excursion outside the interval (positive = outside);
/// run_length is the 1-based index of the first offending sample.
pub fn double_threshold_detect(
    energies: &[f64],
    test: &DoubleThresholdTest,
) -> Result<DetectionOutcome, DetectError> {
    if energies.is_empty() {
        return Err(DetectError::InvalidArgument("empty sample".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut first_hit = None;
    for (i, &r) in energies.iter().enumerate() {
        let excursion = (test.r_l - r).max(r - test.r_u);
        worst = worst.max(excursion);
        if first_hit.is_none() && (r <= test.r_l || r >= test.r_u) {
            first_hit = Some(i + 1);
        }
    }
    Ok(DetectionOutcome {
        detector: DetectorKind::DoubleThreshold,
        statistic: worst,
        threshold: test.r_l,
        threshold_upper: Some(test.r_u),
        verdict: if first_hit.is_some() { Verdict::Attack } else { Verdict::NoAttack },
        run_length: first_hit,
    })
}
