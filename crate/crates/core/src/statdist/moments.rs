//! Large-N moments of the received SNR under optimal phase control.
//!
//! The continuous model treats the coherent amplitude sum as Gaussian and
//! the SNR as a scaled noncentral chi-square with one degree of freedom;
//! the quantized model folds the phase-rounding error in through its
//! characteristic function and lands on a Gamma law.

use super::StatError;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseModel {
    Continuous,
    Discrete { bits: u8 },
}

/// First/second SNR moments with the matching MGF and density.
#[derive(Debug, Clone)]
pub struct SnrMomentSet {
    /// E[Γ*], linear.
    pub m1: f64,
    /// E[Γ*²].
    pub m2: f64,
    pub model: PhaseModel,
    kind: MgfKind,
}

#[derive(Debug, Clone)]
enum MgfKind {
    /// κ̄·Z² with Z ~ N(mu_z, var_z).
    NoncentralChi2 { mu_z: f64, var_z: f64, kappa: f64 },
    /// Gamma(shape, scale).
    Gamma { shape: f64, scale: f64 },
}

impl SnrMomentSet {
    /// Moment generating function t ↦ E e^{tΓ*}; defined left of the
    /// singularity at 1/(2κ̄σ_z²) resp. 1/scale.
    pub fn mgf(&self, t: f64) -> f64 {
        match self.kind {
            MgfKind::NoncentralChi2 { mu_z, var_z, kappa } => {
                let d = 1.0 - 2.0 * kappa * t * var_z;
                (mu_z * mu_z * kappa * t / d).exp() / d.sqrt()
            }
            MgfKind::Gamma { shape, scale } => (1.0 - t * scale).powf(-shape),
        }
    }

    /// Probability density of Γ* at `gamma`.
    pub fn pdf(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        match self.kind {
            MgfKind::NoncentralChi2 { mu_z, var_z, kappa } => {
                let root = (gamma / kappa).sqrt();
                let norm = 1.0 / (2.0 * (2.0 * PI * kappa * var_z * gamma).sqrt());
                let em = (-(root - mu_z).powi(2) / (2.0 * var_z)).exp();
                let ep = (-(root + mu_z).powi(2) / (2.0 * var_z)).exp();
                norm * (em + ep)
            }
            MgfKind::Gamma { shape, scale } => {
                ((shape - 1.0) * gamma.ln()
                    - gamma / scale
                    - shape * scale.ln()
                    - super::ln_gamma(shape))
                .exp()
            }
        }
    }

    /// Gamma parameters (shape, scale) when the discrete model applies.
    pub fn gamma_params(&self) -> Option<(f64, f64)> {
        match self.kind {
            MgfKind::Gamma { shape, scale } => Some((shape, scale)),
            _ => None,
        }
    }

    /// Build a moment set from empirically measured m1, m2, represented
    /// by the method-of-moments Gamma fit so the MGF stays well defined.
    pub fn from_empirical(m1: f64, m2: f64, model: PhaseModel) -> Result<Self, StatError> {
        if !(m1 > 0.0) || !(m2 >= m1 * m1) {
            return Err(StatError::InvalidArgument(format!(
                "need m1 > 0 and m2 >= m1^2, got m1 = {m1}, m2 = {m2}"
            )));
        }
        let var = (m2 - m1 * m1).max(m1 * m1 * 1e-12);
        let shape = m1 * m1 / var;
        let scale = var / m1;
        Ok(Self { m1, m2, model, kind: MgfKind::Gamma { shape, scale } })
    }
}

/// SNR moments for the continuous (unquantized) phase model.
pub fn snr_moments_continuous(
    n: usize,
    kappa: f64,
    eps_h: f64,
    eps_g: f64,
) -> Result<SnrMomentSet, StatError> {
    if n == 0 || !(kappa > 0.0) || !(eps_h > 0.0) || !(eps_g > 0.0) {
        return Err(StatError::InvalidArgument(format!(
            "snr_moments_continuous(n={n}, kappa={kappa}, eps_h={eps_h}, eps_g={eps_g})"
        )));
    }
    let nf = n as f64;
    let ee = eps_h * eps_g;
    let mu_z = nf * ee.sqrt() * PI / 4.0;
    let var_z = nf * ee * (1.0 - PI * PI / 16.0);
    let m1 = kappa * (mu_z * mu_z + var_z);
    let m2 = kappa
        * kappa
        * (mu_z.powi(4) + 6.0 * mu_z * mu_z * var_z + 3.0 * var_z * var_z);
    Ok(SnrMomentSet {
        m1,
        m2,
        model: PhaseModel::Continuous,
        kind: MgfKind::NoncentralChi2 { mu_z, var_z, kappa },
    })
}

/// Characteristic function of the b-bit phase-quantization error at
/// frequency `omega_arg`: sin(ωτ)/(ωτ) with τ = π/2^b.
pub fn quantization_cf(omega_arg: f64, b: u8) -> Result<f64, StatError> {
    if b == 0 {
        return Err(StatError::InvalidArgument("b must be >= 1".into()));
    }
    let tau = PI / 2f64.powi(b as i32);
    let x = omega_arg * tau;
    Ok(if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x })
}

/// SNR moments for the b-bit quantized phase model (Gamma approximation).
pub fn snr_moments_discrete(
    n: usize,
    kappa: f64,
    eps_h: f64,
    eps_g: f64,
    b: u8,
) -> Result<SnrMomentSet, StatError> {
    if n == 0 || b == 0 || !(kappa > 0.0) || !(eps_h > 0.0) || !(eps_g > 0.0) {
        return Err(StatError::InvalidArgument(format!(
            "snr_moments_discrete(n={n}, kappa={kappa}, eps_h={eps_h}, eps_g={eps_g}, b={b})"
        )));
    }
    let nf = n as f64;
    let ee = eps_h * eps_g;
    let phi1 = quantization_cf(1.0, b)?;
    let phi2 = quantization_cf(2.0, b)?;
    let mu = PI / 4.0 * ee.sqrt() * phi1;
    let var_re = ee / (2.0 * nf) * (1.0 + phi2 - PI * PI / 8.0 * phi1 * phi1);
    let shape = mu * mu / (4.0 * var_re);
    let scale = kappa * nf * nf * 4.0 * var_re;
    let m1 = kappa * nf * nf * mu * mu;
    let m2 = kappa * kappa * nf.powi(4) * mu * mu * (mu * mu + 4.0 * var_re);
    Ok(SnrMomentSet {
        m1,
        m2,
        model: PhaseModel::Discrete { bits: b },
        kind: MgfKind::Gamma { shape, scale },
    })
}

/// Variance of the imaginary part of the quantized coherent sum; exposed
/// for completeness of the Gaussian surrogate.
pub fn quantized_imag_variance(n: usize, eps_h: f64, eps_g: f64, b: u8) -> Result<f64, StatError> {
    let phi2 = quantization_cf(2.0, b)?;
    Ok(eps_h * eps_g / (2.0 * n as f64) * (1.0 - phi2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::quadrature_to_inf;

    #[test]
    fn continuous_n1_collapses() {
        let m = snr_moments_continuous(1, 1.0, 1.0, 1.0).unwrap();
        assert!((m.m1 - 1.0).abs() < 1e-12); // κ̄ ε_h ε_g
        assert!(m.m2 >= m.m1 * m.m1);
        assert!((m.mgf(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn continuous_m1_closed_form() {
        // m1 = Nκ̄εhεg(1 + π²(N−1)/16)
        for &n in &[2usize, 8, 64] {
            let m = snr_moments_continuous(n, 2.5, 0.9, 1.1).unwrap();
            let nf = n as f64;
            let want = nf * 2.5 * 0.9 * 1.1 * (1.0 + PI * PI / 16.0 * (nf - 1.0));
            assert!((m.m1 - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn continuous_m2_matches_expanded_bracket() {
        // the expanded polynomial-in-N form of the second moment
        for &n in &[1usize, 2, 16, 64] {
            let (kappa, eh, eg) = (3.0, 0.7, 1.3);
            let m = snr_moments_continuous(n, kappa, eh, eg).unwrap();
            let nf = n as f64;
            let ee = eh * eg;
            let br = 1.0
                + PI.powi(4) / 256.0 * (nf - 1.0).powi(2)
                + PI * PI / 8.0 * (nf - 1.0)
                + (16.0 - PI * PI) / 8.0
                + PI * PI * (2.0 * nf - 1.0) * (16.0 - PI * PI) / 128.0;
            let want = nf * nf * kappa * kappa * ee * ee * br;
            assert!(
                (m.m2 - want).abs() < 1e-9 * want,
                "n = {n}: {} vs {want}",
                m.m2
            );
        }
    }

    #[test]
    fn mgf_finite_differences_recover_moments() {
        for m in [
            snr_moments_continuous(16, 2.0, 1.0, 1.0).unwrap(),
            snr_moments_discrete(64, 2.0, 1.0, 1.0, 2).unwrap(),
        ] {
            // central differences at 0; h balances truncation against
            // cancellation in the second difference
            let h = 2e-4 / m.m1;
            let d1 = (m.mgf(h) - m.mgf(-h)) / (2.0 * h);
            let d2 = (m.mgf(h) - 2.0 * m.mgf(0.0) + m.mgf(-h)) / (h * h);
            assert!((d1 - m.m1).abs() < 1e-4 * m.m1, "{d1} vs {}", m.m1);
            assert!((d2 - m.m2).abs() < 1e-4 * m.m2, "{d2} vs {}", m.m2);
        }
    }

    #[test]
    fn quantization_cf_values() {
        assert_eq!(quantization_cf(0.0, 3).unwrap(), 1.0);
        assert!((quantization_cf(1.0, 2).unwrap() - 0.900_316_316_157_106_1).abs() < 1e-12);
        assert!(quantization_cf(2.0, 1).unwrap().abs() < 1e-15); // sin(π)/π
        assert!(quantization_cf(1.0, 0).is_err());
    }

    #[test]
    fn quantization_cf_matches_quadrature_oracle() {
        // E e^{jωδ} over uniform(−τ, τ] by quadrature (real part; odd part 0)
        let b = 2u8;
        let tau = PI / 4.0;
        for &w in &[0.5, 1.0, 2.0, 3.7] {
            let oracle = crate::solvers::quadrature(
                |d: f64| (w * d).cos() / (2.0 * tau),
                -tau,
                tau,
                1e-12,
            )
            .unwrap();
            let cf = quantization_cf(w, b).unwrap();
            assert!((cf - oracle).abs() < 1e-10, "w = {w}: {cf} vs {oracle}");
        }
    }

    #[test]
    fn discrete_limit_consistency() {
        // large b: φ→1 and m1 → N²κ̄π²εε/16, the dominant continuous term
        let n = 256;
        let m = snr_moments_discrete(n, 1.0, 1.0, 1.0, 16).unwrap();
        let want = (n * n) as f64 * PI * PI / 16.0;
        assert!((m.m1 - want).abs() < 1e-3 * want);
    }

    #[test]
    fn pdfs_normalize_and_match_moments_by_quadrature() {
        let cases = [
            snr_moments_continuous(64, 1.0, 1.0, 1.0).unwrap(),
            snr_moments_discrete(64, 1.0, 1.0, 1.0, 2).unwrap(),
        ];
        for m in cases {
            // substitute γ = m1 z² to kill the 1/√γ endpoint singularity
            // and bring the decay scale to O(1)
            let sub = |p: u32| {
                crate::solvers::quadrature(
                    |z: f64| {
                        let g = m.m1 * z * z;
                        g.powi(p as i32) * m.pdf(g) * 2.0 * m.m1 * z
                    },
                    0.0,
                    12.0,
                    1e-10,
                )
                .unwrap()
            };
            let mass = sub(0);
            assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
            let mom1 = sub(1);
            let mom2 = sub(2);
            assert!((mom1 - m.m1).abs() < 1e-4 * m.m1, "{mom1} vs {}", m.m1);
            assert!((mom2 - m.m2).abs() < 1e-4 * m.m2, "{mom2} vs {}", m.m2);
        }
    }
}
