//! Target-variance inversion against the energy detector: pick the block
//! variance whose detection probability is exactly the allowed level.

use super::AttackError;
use crate::statdist::chi2_inv;

/// σ² = R_{2K,ρ} σ₀² / R_{2K,ξ}. Requires ξ ≥ ρ; anything below the false
/// alarm level would need σ² > σ₀², which no phase choice can reach.
pub fn target_variance_ump(rho: f64, xi: f64, k: usize, sigma02: f64) -> Result<f64, AttackError> {
    if !(rho > 0.0 && rho < 1.0) || !(xi > 0.0 && xi < 1.0) {
        return Err(AttackError::InvalidArgument(format!(
            "rho = {rho}, xi = {xi} must lie in (0, 1)"
        )));
    }
    if k == 0 || !(sigma02 > 0.0) {
        return Err(AttackError::InvalidArgument(format!("k = {k}, sigma02 = {sigma02}")));
    }
    if xi < rho {
        return Err(AttackError::InfeasibleTarget(format!(
            "detection target xi = {xi} below the false-alarm level rho = {rho}"
        )));
    }
    let dof = 2 * k as u32;
    Ok(chi2_inv(rho, dof)? * sigma02 / chi2_inv(xi, dof)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{detection_probability, EnergyTest};

    #[test]
    fn equal_levels_leave_variance_untouched() {
        let s = target_variance_ump(0.1, 0.1, 7, 2.5).unwrap();
        assert!((s - 2.5).abs() < 1e-12);
    }

    #[test]
    fn single_sample_closed_form() {
        // R_{2,0.05}/R_{2,0.5} = 0.102587/1.386294
        let s = target_variance_ump(0.05, 0.5, 1, 1.0).unwrap();
        assert!((s - 0.074_000_581_443_776_83).abs() < 1e-9, "{s}");
    }

    #[test]
    fn below_false_alarm_level_is_infeasible() {
        assert!(matches!(
            target_variance_ump(0.2, 0.1, 5, 1.0),
            Err(AttackError::InfeasibleTarget(_))
        ));
    }

    #[test]
    fn inversion_is_exact_on_a_grid() {
        // feeding σ² back into the detector recovers ξ to 1e-10
        for &k in &[1usize, 10, 50] {
            for &rho in &[0.05, 0.10, 0.15] {
                for &xi in &[0.3, 0.5, 0.7, 0.95] {
                    let sigma02 = 3.7;
                    let s2 = target_variance_ump(rho, xi, k, sigma02).unwrap();
                    assert!(s2 <= sigma02);
                    let test = EnergyTest::new(k, rho, sigma02).unwrap();
                    let pd = detection_probability(s2, &test).unwrap();
                    assert!((pd - xi).abs() < 1e-10, "k={k} rho={rho} xi={xi}: pd={pd}");
                }
            }
        }
    }
}
