//! Scalar root finding on a bracketing interval.

use super::SolverError;

/// Find a root of `f` in `[lo, hi]` by Brent's method.
///
/// `f(lo)` and `f(hi)` must bracket a sign change. Stops when the bracket
/// or |f| shrinks below `tol`.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, SolverError> {
    if !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(SolverError::InvalidArgument(format!(
            "bad bracket [{lo}, {hi}] or tol {tol}"
        )));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SolverError::BracketError { lo, hi, f_lo: fa, f_hi: fb });
    }

    // Brent: inverse quadratic / secant with bisection fallback.
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min(e * q / 2.0 * 2.0).max(f64::MIN_POSITIVE)
                && 2.0 * p < (e * q).abs()
            {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Plain bisection, the independent oracle for the frozen values below.
    fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = f(lo);
        assert!(flo.signum() != f(hi).signum());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn linear_root() {
        let r = find_root(|x| x - 2.0, 0.0, 10.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-10);
    }

    #[test]
    fn omega_constant_relation() {
        // ln(a)/a + 1 = 0 on (0,1); bisection oracle gives 0.5671432904097838.
        let f = |a: f64| a.ln() / a + 1.0;
        let oracle = bisect(f, 1e-9, 0.999);
        assert!((oracle - 0.567_143_290_409_783_8).abs() < 1e-12);
        let r = find_root(f, 1e-9, 0.999, 1e-13).unwrap();
        assert!((r - oracle).abs() < 1e-10, "brent {r} vs bisect {oracle}");
    }

    #[test]
    fn shifted_log_relation() {
        // ln(a)/a + 0.25 = 0; bisection oracle gives 0.8155534188089607.
        let f = |a: f64| a.ln() / a + 0.25;
        let oracle = bisect(f, 1e-9, 0.999);
        assert!((oracle - 0.815_553_418_808_960_7).abs() < 1e-11);
        let r = find_root(f, 1e-9, 0.999, 1e-13).unwrap();
        assert!((r - oracle).abs() < 1e-10);
    }

    #[test]
    fn no_sign_change_is_error() {
        let err = find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, SolverError::BracketError { .. }));
    }
}
