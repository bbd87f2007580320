//! Bracketing one-dimensional solvers: bisection and golden-section search.
//!
//! Bisection is used everywhere a root of a smooth, monotone function is
//! needed; it is derivative free and immune to the logarithmic singularities
//! that appear near the edges of the entropy expressions.

use crate::error::{Error, Result};

/// Root of `f` inside `[lo, hi]`, where `f(lo)` and `f(hi)` have opposite
/// signs. Iterates until `|f| <= residual_tol` or the interval is exhausted
/// in floating point, and returns the abscissa with the smallest residual
/// seen.
pub(crate) fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    residual_tol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok((lo, 0.0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0.0));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot(format!(
            "bracket [{lo:e}, {hi:e}] is sign definite (f(lo)={flo:e}, f(hi)={fhi:e})"
        )));
    }

    let (mut best_x, mut best_f) = if flo.abs() <= fhi.abs() { (lo, flo) } else { (hi, fhi) };
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best_f.abs() {
            best_x = mid;
            best_f = fm;
        }
        if fm == 0.0 || fm.abs() <= residual_tol {
            return Ok((mid, fm));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((best_x, best_f))
}

/// Minimum of a unimodal `f` on `[a, b]` by golden-section search, to an
/// abscissa tolerance of `x_tol`. Returns `(x, f(x))`.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let (x, fx) = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(fx.abs() <= 1e-14);
    }

    #[test]
    fn bisect_rejects_sign_definite_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn golden_min_quadratic() {
        let (x, _) = golden_min(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }
}
