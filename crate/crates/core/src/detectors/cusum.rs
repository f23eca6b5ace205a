//! GLR-CUSUM sequential detector for a variance drop of unknown size.
//!
//! The post-change variance is only known to lie in [σ_min², σ₀²], so each
//! step maximizes the window log-likelihood over that interval; the
//! maximizing variance is the clamped window mean energy. No one-step
//! recursion exists for the composite statistic, so the exact max over
//! change points is evaluated with the window capped at the fading-block
//! length.

use super::{DetectError, DetectionOutcome, DetectorKind, Verdict};
use crate::statdist::kl_divergence;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct GlrCusum {
    pub sigma02: f64,
    pub sigma_min2: f64,
    /// alarm threshold ε
    pub epsilon: f64,
    /// change-point window cap (fading-block length); None = full history
    pub window: Option<usize>,
    /// prefix sums of |y|², prefix[t] = Σ_{i≤t}
    prefix: Vec<f64>,
    alarm_time: Option<usize>,
    statistic: f64,
}

impl GlrCusum {
    pub fn new(
        sigma02: f64,
        sigma_min2: f64,
        epsilon: f64,
        window: Option<usize>,
    ) -> Result<Self, DetectError> {
        if !(sigma02 > 0.0) || !(sigma_min2 > 0.0) || sigma_min2 > sigma02 {
            return Err(DetectError::InvalidArgument(format!(
                "need 0 < sigma_min2 <= sigma02, got {sigma_min2}, {sigma02}"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(DetectError::InvalidArgument(format!("epsilon = {epsilon} must be > 0")));
        }
        Ok(Self {
            sigma02,
            sigma_min2,
            epsilon,
            window,
            prefix: vec![0.0],
            alarm_time: None,
            statistic: 0.0,
        })
    }

    pub fn alarm_time(&self) -> Option<usize> {
        self.alarm_time
    }

    pub fn samples_seen(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn reset(&mut self) {
        self.prefix.clear();
        self.prefix.push(0.0);
        self.alarm_time = None;
        self.statistic = 0.0;
    }

    fn window_stat(&self, w: usize, t: usize) -> f64 {
        let energy = self.prefix[t] - self.prefix[t - w];
        let n = w as f64;
        // likelihood-maximizing variance, clamped to the composite range
        let sigma_star = (energy / n).clamp(self.sigma_min2, self.sigma02);
        n * (self.sigma02 / sigma_star).ln() - (1.0 / sigma_star - 1.0 / self.sigma02) * energy
    }

    /// Feed one sample; the outcome's statistic is Υ_g(t) and run_length
    /// the number of samples consumed so far.
    pub fn step(&mut self, y: Complex64) -> DetectionOutcome {
        let last = *self.prefix.last().unwrap();
        self.prefix.push(last + y.norm_sqr());
        let t = self.prefix.len() - 1;
        let max_w = self.window.map_or(t, |cap| cap.min(t));
        let mut stat: f64 = 0.0;
        for w in 1..=max_w {
            stat = stat.max(self.window_stat(w, t));
        }
        self.statistic = stat;
        if stat >= self.epsilon && self.alarm_time.is_none() {
            self.alarm_time = Some(t);
        }
        DetectionOutcome {
            detector: DetectorKind::GlrCusum,
            statistic: stat,
            threshold: self.epsilon,
            threshold_upper: None,
            verdict: if stat >= self.epsilon { Verdict::Attack } else { Verdict::NoAttack },
            run_length: Some(t),
        }
    }

    /// Likelihood-maximizing window variance for the last `w` samples;
    /// exposed for the clamp cross-checks.
    pub fn clamped_mle(&self, w: usize) -> Option<f64> {
        let t = self.prefix.len() - 1;
        if w == 0 || w > t {
            return None;
        }
        let energy = self.prefix[t] - self.prefix[t - w];
        Some((energy / w as f64).clamp(self.sigma_min2, self.sigma02))
    }
}

/// Threshold ε = −ln(a/b) with b = 3 ln(1/a) (1 + 1/I(σ_min²))²; `a` is the
/// inverse of the required mean run length to false alarm. Guarded to
/// a ∈ (0, 0.5] where b and ε stay positive and the later inversion is
/// single-branched.
pub fn cusum_threshold(a: f64, sigma_min2: f64, sigma02: f64) -> Result<f64, DetectError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(DetectError::InvalidArgument(format!("a = {a} outside (0, 1)")));
    }
    if a > 0.5 {
        return Err(DetectError::InvalidArgument(format!(
            "a = {a} outside the guarded range (0, 0.5]"
        )));
    }
    if !(sigma_min2 < sigma02) {
        return Err(DetectError::InvalidArgument(
            "sigma_min2 must be strictly below sigma02".into(),
        ));
    }
    let i_min = kl_divergence(sigma_min2, sigma02)?;
    let b = 3.0 * (1.0 / a).ln() * (1.0 + 1.0 / i_min).powi(2);
    Ok((b / a).ln())
}
