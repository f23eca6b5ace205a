//! Received-energy distribution under imperfect cascaded CSI.
//!
//! Model: y = u + Z̄·x with u ~ CN(0, σ²), Z̄ ~ CN(0, σ_s²), x ~ CN(0, 1)
//! all independent, and r = |y|². Conditioned on the error power
//! T = |Z̄|² ~ Exp(σ_s²), the energy is exponential with mean σ² + T, so
//!
//!     F(r) = 1 − E_T[ exp(−r / (σ² + T)) ]
//!
//! which is evaluated by one-dimensional quadrature. A closed form that
//! floats around for this law evaluates to 1 − e^{−2σ²/σ_s²} at r = 0 and
//! cannot be a CDF of a continuous nonnegative variable; it is kept here
//! only as `printed_cdf` for comparison, never used numerically.

use super::StatError;
use crate::solvers::{quadrature, quadrature_to_inf};

/// Conditional-mass cutoff for the mixing integral: e^{-35} < 1e-15.
const U_CUT: f64 = 35.0;
const TABLE_LEN: usize = 2048;

/// CDF of the received sample energy under CSI error, with a precomputed
/// monotone interpolation table (immutable after construction).
#[derive(Debug, Clone)]
pub struct CsiEnergyDist {
    pub sigma2: f64,
    pub sigma_s2: f64,
    /// grid abscissae (energies), increasing, grid[0] = 0
    grid: Vec<f64>,
    /// CDF values at the grid
    cdf_vals: Vec<f64>,
    /// PCHIP slopes at the grid
    slopes: Vec<f64>,
    r_max: f64,
}

fn cdf_direct(sigma2: f64, sigma_s2: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    // 1 − ∫_0^∞ e^{−u} e^{−r/(σ² + u σ_s²)} du, truncated at U_CUT
    let integrand = |u: f64| (-u - r / (sigma2 + u * sigma_s2)).exp();
    let body = quadrature(integrand, 0.0, U_CUT, 1e-13).unwrap_or(0.0);
    let tail = (-U_CUT - r / (sigma2 + U_CUT * sigma_s2)).exp();
    (1.0 - body - tail).clamp(0.0, 1.0)
}

// Fritsch–Carlson monotone cubic slopes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    let mut delta = vec![0.0; n - 1];
    for i in 0..n - 1 {
        delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    }
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
            let w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d
}

impl CsiEnergyDist {
    pub fn new(sigma2: f64, sigma_s2: f64) -> Result<Self, StatError> {
        if !(sigma2 > 0.0) || !(sigma_s2 > 0.0) {
            return Err(StatError::InvalidArgument(format!(
                "CsiEnergyDist needs positive variances, got sigma2 = {sigma2}, sigma_s2 = {sigma_s2}"
            )));
        }
        // locate an upper grid end with negligible upper-tail mass
        let mut r_max = 20.0 * (sigma2 + sigma_s2);
        while 1.0 - cdf_direct(sigma2, sigma_s2, r_max) > 1e-10 {
            r_max *= 2.0;
            if !r_max.is_finite() {
                return Err(StatError::NumericalFailure("csi cdf tail does not close".into()));
            }
        }
        // log-dense grid near zero: r = c(e^x − 1)
        let c = (sigma2 + sigma_s2) / 8.0;
        let x_max = (r_max / c + 1.0).ln();
        let mut grid = Vec::with_capacity(TABLE_LEN);
        let mut cdf_vals = Vec::with_capacity(TABLE_LEN);
        for i in 0..TABLE_LEN {
            let x = x_max * i as f64 / (TABLE_LEN - 1) as f64;
            let r = c * x.exp_m1();
            grid.push(r);
            cdf_vals.push(cdf_direct(sigma2, sigma_s2, r));
        }
        let slopes = pchip_slopes(&grid, &cdf_vals);
        Ok(Self { sigma2, sigma_s2, grid, cdf_vals, slopes, r_max })
    }

    /// CDF of the sample energy.
    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.r_max {
            return cdf_direct(self.sigma2, self.sigma_s2, r);
        }
        // binary search + cubic Hermite
        let idx = match self.grid.binary_search_by(|g| g.partial_cmp(&r).unwrap()) {
            Ok(i) => return self.cdf_vals[i],
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.grid[idx], self.grid[idx + 1]);
        let (y0, y1) = (self.cdf_vals[idx], self.cdf_vals[idx + 1]);
        let (d0, d1) = (self.slopes[idx], self.slopes[idx + 1]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let v = y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + h * d1 * (t3 - t2);
        v.clamp(0.0, 1.0)
    }

    /// Quantile by bisection on `cdf`, to 1e-8 relative.
    pub fn inv_cdf(&self, p: f64) -> Result<f64, StatError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(StatError::InvalidArgument(format!("p = {p} outside (0, 1)")));
        }
        let mut lo = 0.0;
        let mut hi = self.r_max;
        while self.cdf(hi) < p {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(StatError::NumericalFailure("inv_cdf bracket blew up".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-9 * hi.max(1e-300) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The closed form as printed elsewhere for this law. Kept behind this
    /// method purely for diagnostics; see `printed_form_discrepancy`.
    pub fn printed_cdf(&self, r: f64) -> f64 {
        let ratio = self.sigma2 / self.sigma_s2;
        let integral = quadrature_to_inf(
            |t: f64| (-ratio * t - r / (self.sigma2 * t)).exp(),
            1.0,
            1e-12,
        )
        .unwrap_or(f64::NAN);
        1.0 - ratio * (-ratio).exp() * integral
    }

    /// Where and how badly the printed closed form disagrees with the
    /// generative law: (value of printed CDF at 0, sup gap on a grid).
    pub fn printed_form_discrepancy(&self) -> (f64, f64) {
        let at_zero = self.printed_cdf(0.0);
        let mut sup = 0.0f64;
        for i in 1..200 {
            let r = self.r_max * i as f64 / 200.0;
            sup = sup.max((self.printed_cdf(r) - self.cdf(r)).abs());
        }
        (at_zero, sup)
    }
}

/// Constructor matching the operation-style API.
pub fn csi_energy_dist(sigma2: f64, sigma_s2: f64) -> Result<CsiEnergyDist, StatError> {
    CsiEnergyDist::new(sigma2, sigma_s2)
}
