//! Fixed-sample energy detector. Under attack the received variance can
//! only shrink, so low block energy is the alarm side, and its false-alarm
//! level is set exactly through the chi-squared law of 2W/σ₀².

use super::{DetectError, DetectionOutcome, DetectorKind, Verdict};
use crate::statdist::{chi2_cdf, chi2_inv};
use num_complex::Complex64;

/// Energy test over one fading block of K symbols.
#[derive(Debug, Clone)]
pub struct EnergyTest {
    /// samples per block
    pub k: usize,
    /// target probability of false alarm
    pub rho: f64,
    /// no-attack received variance σ₀²
    pub sigma02: f64,
    /// alarm threshold η′ on W = Σ|y_i|²
    pub threshold: f64,
}

impl EnergyTest {
    pub fn new(k: usize, rho: f64, sigma02: f64) -> Result<Self, DetectError> {
        let threshold = energy_threshold(k, rho, sigma02)?;
        Ok(Self { k, rho, sigma02, threshold })
    }
}

/// η′ with P(W ≤ η′ | H0) = ρ exactly: η′ = R_{2K,ρ} σ₀² / 2.
pub fn energy_threshold(k: usize, rho: f64, sigma02: f64) -> Result<f64, DetectError> {
    if k == 0 {
        return Err(DetectError::InvalidArgument("K must be >= 1".into()));
    }
    if !(sigma02 > 0.0) {
        return Err(DetectError::InvalidArgument(format!("sigma02 = {sigma02} must be > 0")));
    }
    Ok(chi2_inv(rho, 2 * k as u32)? * sigma02 / 2.0)
}

/// Apply the test to one block. Alarm when W ≤ η′, boundary inclusive.
pub fn energy_detect(samples: &[Complex64], test: &EnergyTest) -> Result<DetectionOutcome, DetectError> {
    if samples.len() != test.k {
        return Err(DetectError::InvalidArgument(format!(
            "{} samples for K = {}",
            samples.len(),
            test.k
        )));
    }
    let w: f64 = samples.iter().map(|y| y.norm_sqr()).sum();
    Ok(DetectionOutcome {
        detector: DetectorKind::Energy,
        statistic: w,
        threshold: test.threshold,
        threshold_upper: None,
        verdict: if w <= test.threshold { Verdict::Attack } else { Verdict::NoAttack },
        run_length: None,
    })
}

/// P(W ≤ η′) when the block variance is `sigma2`: F_{χ²_{2K}}(2η′/σ²).
pub fn detection_probability(sigma2: f64, test: &EnergyTest) -> Result<f64, DetectError> {
    if !(sigma2 > 0.0) {
        return Err(DetectError::InvalidArgument(format!("sigma2 = {sigma2} must be > 0")));
    }
    Ok(chi2_cdf(2.0 * test.threshold / sigma2, 2 * test.k as u32)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn dof2_threshold_closed_form() {
        // K = 1, ρ = 0.5: η′ = R_{2,0.5}/2 = ln 2
        let t = energy_threshold(1, 0.5, 1.0).unwrap();
        assert!((t - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn threshold_vanishes_with_rho() {
        let mut prev = f64::INFINITY;
        for &rho in &[0.2, 0.05, 1e-3, 1e-6, 1e-9, 1e-15, 1e-24] {
            let t = energy_threshold(10, rho, 1.0).unwrap();
            assert!(t < prev);
            prev = t;
        }
        assert!(prev < 0.05, "threshold {prev} should shrink toward 0");
    }

    #[test]
    fn empirical_false_alarm_rate() {
        // K = 50, ρ = 0.05 over no-attack blocks
        let k = 50;
        let sigma02 = 1.7;
        let test = EnergyTest::new(k, 0.05, sigma02).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let mut alarms = 0usize;
        let s = (sigma02 / 2.0).sqrt();
        for _ in 0..trials {
            let block: Vec<Complex64> = (0..k)
                .map(|_| {
                    let re: f64 = rng.sample(rand_distr::StandardNormal);
                    let im: f64 = rng.sample(rand_distr::StandardNormal);
                    Complex64::new(s * re, s * im)
                })
                .collect();
            if energy_detect(&block, &test).unwrap().verdict == Verdict::Attack {
                alarms += 1;
            }
        }
        let pfa = alarms as f64 / trials as f64;
        assert!((pfa - 0.05).abs() < 0.005, "pfa {pfa}");
    }

    #[test]
    fn zero_energy_always_alarms_and_tie_is_alarm() {
        let test = EnergyTest::new(3, 0.1, 1.0).unwrap();
        let zeros = vec![Complex64::default(); 3];
        assert_eq!(energy_detect(&zeros, &test).unwrap().verdict, Verdict::Attack);

        // W exactly at the threshold resolves to attack
        let mut block = vec![Complex64::default(); 3];
        block[0] = Complex64::new(test.threshold.sqrt(), 0.0);
        let out = energy_detect(&block, &test).unwrap();
        assert!((out.statistic - test.threshold).abs() < 1e-12);
        assert_eq!(out.verdict, Verdict::Attack);

        assert!(energy_detect(&zeros[..2], &test).is_err());
    }

    #[test]
    fn detection_probability_identities() {
        let test = EnergyTest::new(20, 0.07, 2.3).unwrap();
        // σ² = σ₀² collapses to the false-alarm level
        let p = detection_probability(test.sigma02, &test).unwrap();
        assert!((p - test.rho).abs() < 1e-10);
        // σ² → 0 detects surely
        let p = detection_probability(1e-9, &test).unwrap();
        assert!(p > 1.0 - 1e-12);
        assert!(detection_probability(0.0, &test).is_err());
    }
}
