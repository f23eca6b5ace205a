//! Inversions against the GLR-CUSUM detector: recover the design parameter
//! `a` from a published threshold, turn a run-length floor into a variance
//! floor, and compose both with the phase design.

use super::phase::design_phase_attack;
use super::{AttackError, AttackPlan};
use crate::channel::CompositeChannel;
use crate::solvers::find_root;
use crate::statdist::kl_divergence;
use rand::Rng;

const A_MAX: f64 = 0.5;

/// Solve ln(a)/a = −e^ε / (3 (1 + 1/I_min)²) for the detector's design
/// parameter. The map a ↦ ln(a)/a is increasing on (0, 1); roots beyond
/// the guarded branch (0, 0.5] are rejected, carrying the root found.
pub fn a_from_threshold(epsilon: f64, kl_min: f64) -> Result<f64, AttackError> {
    if !(epsilon > 0.0) || !(kl_min > 0.0) {
        return Err(AttackError::InvalidArgument(format!(
            "epsilon = {epsilon}, kl_min = {kl_min} must be positive"
        )));
    }
    let rhs = -epsilon.exp() / (3.0 * (1.0 + 1.0 / kl_min).powi(2));
    if rhs >= 0.0 {
        return Err(AttackError::InvalidArgument("right-hand side must be negative".into()));
    }
    let f = |a: f64| a.ln() / a - rhs;
    let root = find_root(f, 1e-300, 1.0 - 1e-12, 1e-13)?;
    if root > A_MAX {
        return Err(AttackError::DomainGuard {
            root,
            max: A_MAX,
            context: format!("rhs {rhs} outside the range of ln(a)/a on (0, {A_MAX}]"),
        });
    }
    Ok(root)
}

/// The variance floor Q′ with KL divergence I(Q′) = −ln(a)/τ on the branch
/// Q′ ≤ σ₀², equivalently the root of σ² − σ₀² ln σ² = L′. Both forms are
/// evaluated and must agree.
pub fn variance_floor_from_arld(a: f64, tau_arld: f64, sigma02: f64) -> Result<f64, AttackError> {
    if !(a > 0.0 && a < 1.0) || !(tau_arld > 0.0) || !(sigma02 > 0.0) {
        return Err(AttackError::InvalidArgument(format!(
            "a = {a}, tau_arld = {tau_arld}, sigma02 = {sigma02}"
        )));
    }
    let target = -a.ln() / tau_arld; // > 0
    let lo = sigma02 * 1e-14;
    let i_lo = kl_divergence(lo, sigma02)?;
    if target > i_lo {
        return Err(AttackError::InfeasibleTarget(format!(
            "required divergence {target} exceeds {i_lo}, the value at the variance floor"
        )));
    }
    let f = |s2: f64| kl_divergence(s2, sigma02).unwrap() - target;
    let q = find_root(f, lo, sigma02, 1e-12 * sigma02)?;

    // cross-check against the g(σ²) = σ² − σ₀² ln σ² <= L′ form
    let l_prime = sigma02 * (1.0 - sigma02.ln() - a.ln() / tau_arld);
    let g = q - sigma02 * q.ln();
    if (g - l_prime).abs() > 1e-6 * l_prime.abs().max(sigma02) {
        return Err(AttackError::InvalidArgument(format!(
            "variance-floor forms disagree: g(Q') = {g} vs L' = {l_prime}"
        )));
    }
    Ok(q)
}

/// Full sequential-detector attack: invert the threshold to `a`, convert
/// the run-length floor to a variance floor, then design phases with
/// ν = (Q′ − σ_w²)/P. `predicted` carries the run-length floor.
#[allow(clippy::too_many_arguments)]
pub fn design_cusum_attack<R: Rng + ?Sized>(
    psi: &CompositeChannel,
    epsilon: f64,
    sigma_min2: f64,
    sigma02: f64,
    tau_arld: f64,
    trials: usize,
    rng: &mut R,
) -> Result<AttackPlan, AttackError> {
    if !(sigma_min2 > 0.0 && sigma_min2 < sigma02) {
        return Err(AttackError::InvalidArgument(format!(
            "need 0 < sigma_min2 < sigma02, got {sigma_min2}, {sigma02}"
        )));
    }
    let kl_min = kl_divergence(sigma_min2, sigma02)?;
    let a = a_from_threshold(epsilon, kl_min)?;
    let q = variance_floor_from_arld(a, tau_arld, sigma02)?;
    let nu = ((q - psi.noise_var) / psi.p_tx()).max(0.0);
    let mut plan = design_phase_attack(psi, nu, trials, rng, None)?;
    plan.predicted = tau_arld;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_rayleigh;
    use crate::detectors::cusum_threshold;
    use crate::rng::Substreams;

    #[test]
    fn rejected_roots_carry_the_bisection_value() {
        // rhs = −1 has root 0.5671 (above the guard); rhs = −0.25 has 0.8156
        let kl: f64 = 1.0;
        // ε with e^ε/(3·(1+1/I)²) = 1  ->  ε = ln(12)
        let eps = (3.0 * (1.0 + 1.0 / kl).powi(2)).ln();
        match a_from_threshold(eps, kl) {
            Err(AttackError::DomainGuard { root, .. }) => {
                assert!((root - 0.567_143_290_409_783_8).abs() < 1e-9, "root {root}")
            }
            other => panic!("expected domain guard, got {other:?}"),
        }
        let eps = (0.25 * 3.0 * (1.0 + 1.0 / kl).powi(2)).ln();
        match a_from_threshold(eps, kl) {
            Err(AttackError::DomainGuard { root, .. }) => {
                assert!((root - 0.815_553_418_808_960_7).abs() < 1e-8, "root {root}")
            }
            other => panic!("expected domain guard, got {other:?}"),
        }
    }

    #[test]
    fn threshold_roundtrip() {
        // cusum_threshold(a) -> ε -> a_from_threshold recovers a
        let (smin2, s02) = (0.2, 1.0);
        let kl = kl_divergence(smin2, s02).unwrap();
        for &a in &[0.01, 0.015, 0.02, 0.2, 0.49] {
            let eps = cusum_threshold(a, smin2, s02).unwrap();
            let back = a_from_threshold(eps, kl).unwrap();
            assert!((back - a).abs() < 1e-8, "a = {a} -> {back}");
        }
    }

    #[test]
    fn variance_floor_identities() {
        let s02 = 2.3;
        let (a, tau) = (0.01, 185.0);
        let q = variance_floor_from_arld(a, tau, s02).unwrap();
        assert!(q > 0.0 && q <= s02);
        let i = kl_divergence(q, s02).unwrap();
        assert!((i - (-a.ln() / tau)).abs() < 1e-8, "I(Q') = {i}");

        // τ → ∞ forces Q′ → σ₀²
        let q = variance_floor_from_arld(0.01, 1e12, s02).unwrap();
        assert!((q - s02).abs() < 1e-4 * s02, "q = {q}");
    }

    #[test]
    fn composed_attack_collapses_to_noop_for_large_tau() {
        let mut r = Substreams::new(20).stream(0);
        let ch = sample_rayleigh(8, 1.0, 1.0, &mut r).unwrap();
        let comp = CompositeChannel::from_siso(&ch, 1.0, 0.1).unwrap();
        let opt = crate::channel::optimal_phases(&ch);
        let s02 = comp.received_variance(&opt).unwrap();
        let smin2 = 0.11;
        let eps = cusum_threshold(0.01, smin2, s02).unwrap();
        let plan =
            design_cusum_attack(&comp, eps, smin2, s02, 1e10, 400, &mut r).unwrap();
        assert!(plan.feasible);
        let gain_opt = comp.signal_gain(&opt).unwrap();
        assert!(
            plan.achieved_metric > 0.98 * gain_opt,
            "{} vs optimal {gain_opt}",
            plan.achieved_metric
        );
    }

    #[test]
    fn composed_attack_meets_the_variance_floor() {
        let mut r = Substreams::new(21).stream(0);
        let ch = sample_rayleigh(16, 1.0, 1.0, &mut r).unwrap();
        let comp = CompositeChannel::from_siso(&ch, 1.0, 0.1).unwrap();
        let opt = crate::channel::optimal_phases(&ch);
        let s02 = comp.received_variance(&opt).unwrap();
        let smin2 = crate::attacks::estimate_sigma_min(&comp, 300, &mut r).unwrap();
        let eps = cusum_threshold(0.01, smin2, s02).unwrap();
        let tau = 150.0;
        let plan = design_cusum_attack(&comp, eps, smin2, s02, tau, 600, &mut r).unwrap();
        assert!(plan.feasible);
        let a = a_from_threshold(eps, kl_divergence(smin2, s02).unwrap()).unwrap();
        let q = variance_floor_from_arld(a, tau, s02).unwrap();
        let achieved_var = comp.noise_var + comp.p_tx() * plan.achieved_metric;
        assert!(
            achieved_var >= q * (1.0 - 1e-6),
            "variance {achieved_var} below floor {q}"
        );
    }
}
