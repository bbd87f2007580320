//! Asymptotic restricted-isometry bounds for Gaussian matrices.
//!
//! For a matrix with i.i.d. `N(0, 1/n)` entries and proportional growth
//! `n/N -> delta`, `k/n -> rho`, the deviations of the extreme Wishart
//! eigenvalues concentrate. The bounds `L(delta, rho)` and `U(delta, rho)`
//! are obtained from the zero level sets of two entropy-weighted exponents:
//!
//! ```text
//!   delta * psi_min(lambda_min, rho) + H(rho * delta) = 0,  lambda_min <= 1 - rho
//!   delta * psi_max(lambda_max, rho) + H(rho * delta) = 0,  lambda_max >= 1 + rho
//! ```
//!
//! with `L = 1 - lambda_min` and `U = min over nu in [rho, 1] of
//! lambda_max(delta, nu) - 1`. The minimisation over `nu` is required
//! because `lambda_max` need not be increasing in `rho` when `delta` is
//! large; any bound valid for a larger support size is also valid for a
//! smaller one.

use crate::error::{Error, Result};
use crate::roots::{bisect, golden_min};

/// Lower bracket endpoint for the `lambda_min` solve.
const LAMBDA_MIN_BRACKET_EPS: f64 = 1e-14;
/// Multiplicative step when expanding the lower bracket toward zero.
const BRACKET_SHRINK: f64 = 1e-4;
/// Hard floor for the lower bracket expansion.
const BRACKET_FLOOR: f64 = 1e-300;
/// Hard cap for the upward bracket expansion of the `lambda_max` solve.
const LAMBDA_MAX_BRACKET_CAP: f64 = 1e9;
/// Residual the bisection aims for.
const ROOT_TARGET_TOL: f64 = 1e-12;
/// Residual every returned root must satisfy.
const ROOT_RESIDUAL_TOL: f64 = 1e-10;
/// Default number of coarse samples for the `nu` minimisation.
pub const U_SCAN_POINTS: usize = 256;
/// Default abscissa tolerance for the golden-section refinement in `nu`.
pub const U_NU_TOL: f64 = 1e-8;

/// A point `(delta, rho)` of the phase plane: `delta = n/N` is the
/// undersampling ratio and `rho = k/n` the oversampling ratio.
///
/// `delta = 1` (square systems) is admitted; it is the regime in which the
/// minimal oversampling constants are read off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    delta: f64,
    rho: f64,
}

impl PhasePoint {
    pub fn new(delta: f64, rho: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Domain(format!("delta = {delta} outside (0, 1]")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain(format!("rho = {rho} outside (0, 1)")));
        }
        Ok(Self { delta, rho })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Asymptotic deviation bounds at a phase point: `(1 - L) ||x||^2 <=
/// ||Ax||^2 <= (1 + U) ||x||^2` holds for all sparse `x` with overwhelming
/// probability. `L` lies in `(0, 1)`; beyond `L = 1` sparse vectors are
/// mapped to zero and unrecoverable.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticBounds {
    pub l: f64,
    pub u: f64,
    pub at: PhasePoint,
}

fn xlog(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Shannon entropy `H(p) = p log(1/p) + (1-p) log(1/(1-p))` with natural
/// logarithms; the endpoints return 0 by continuous extension.
pub fn shannon_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("entropy argument {p} outside [0, 1]")));
    }
    Ok(-(xlog(p) + xlog(1.0 - p)))
}

fn check_lambda_rho(lambda: f64, rho: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("rho = {rho} outside (0, 1]")));
    }
    Ok(())
}

/// Large-deviation exponent for the smallest Wishart eigenvalue:
/// `H(rho) + [(1 - rho) log(lambda) + 1 - rho + rho log(rho) - lambda] / 2`.
pub fn psi_min(lambda: f64, rho: f64) -> Result<f64> {
    check_lambda_rho(lambda, rho)?;
    let h = shannon_entropy(rho)?;
    Ok(h + 0.5 * ((1.0 - rho) * lambda.ln() + 1.0 - rho + xlog(rho) - lambda))
}

/// Large-deviation exponent for the largest Wishart eigenvalue:
/// `[(1 + rho) log(lambda) + 1 + rho - rho log(rho) - lambda] / 2`.
pub fn psi_max(lambda: f64, rho: f64) -> Result<f64> {
    check_lambda_rho(lambda, rho)?;
    Ok(0.5 * ((1.0 + rho) * lambda.ln() + 1.0 + rho - xlog(rho) - lambda))
}

/// Inner `lambda_min` solve. `Ok(None)` means the exponent stayed positive
/// all the way down to the bracket floor: the root exists mathematically
/// but sits below the representable range, i.e. `L` rounds to 1 in double
/// precision (this happens as `rho` approaches 1).
pub(crate) fn lambda_min_checked(delta: f64, rho: f64) -> Result<Option<f64>> {
    let offset = shannon_entropy(rho * delta)?;
    let f = |lambda: f64| delta * psi_min(lambda, rho).expect("lambda > 0 inside bracket") + offset;

    let hi = 1.0 - rho;
    let fhi = f(hi);
    if fhi < 0.0 {
        return Err(Error::NoRoot(format!(
            "lambda_min: f(1 - rho) = {fhi:e} < 0 at delta = {delta}, rho = {rho}"
        )));
    }
    let mut lo = LAMBDA_MIN_BRACKET_EPS;
    while f(lo) >= 0.0 {
        lo *= BRACKET_SHRINK;
        if lo < BRACKET_FLOOR {
            return Ok(None);
        }
    }

    // Bisect in log(lambda): the exponent is smooth there and the root can
    // sit many orders of magnitude below 1.
    let g = |t: f64| f(t.exp());
    let (t, _) = bisect(g, lo.ln(), hi.ln(), ROOT_TARGET_TOL, 300)?;
    let lambda = t.exp();
    let residual = f(lambda);
    if residual.abs() > ROOT_RESIDUAL_TOL {
        return Err(Error::NoRoot(format!(
            "lambda_min residual {residual:e} exceeds {ROOT_RESIDUAL_TOL:e} at delta = {delta}, rho = {rho}"
        )));
    }
    Ok(Some(lambda))
}

/// `lambda_min(delta, rho)`: the root of
/// `delta * psi_min(lambda, rho) + H(rho * delta) = 0` in `(0, 1 - rho]`.
///
/// `psi_min` is strictly increasing in `lambda` on that interval and tends
/// to `-inf` as `lambda -> 0`, so the root is unique once bracketed. The
/// lower bracket endpoint starts at `1e-14` and expands toward zero until
/// the sign changes; if no sign change is found above the bracket floor
/// the solve reports the bracket as sign definite.
pub fn solve_lambda_min(at: PhasePoint) -> Result<f64> {
    lambda_min_checked(at.delta, at.rho)?.ok_or_else(|| {
        Error::NoRoot(format!(
            "lambda_min: bracket ({BRACKET_FLOOR:e}, {:e}] is sign definite at delta = {}, rho = {} (root underflows; L is numerically 1)",
            1.0 - at.rho,
            at.delta,
            at.rho
        ))
    })
}

/// `lambda_max` for a raw `(delta, nu)` pair with `nu` allowed to reach 1;
/// the `nu` scan in [`bound_u`] needs the right endpoint.
fn solve_lambda_max_raw(delta: f64, nu: f64) -> Result<f64> {
    let offset = shannon_entropy(nu * delta)?;
    let f = |lambda: f64| delta * psi_max(lambda, nu).expect("lambda > 0 inside bracket") + offset;

    let lo = 1.0 + nu;
    let flo = f(lo);
    if flo < 0.0 {
        return Err(Error::NoRoot(format!(
            "lambda_max: f(1 + rho) = {flo:e} < 0 at delta = {delta}, rho = {nu}"
        )));
    }
    let mut hi = 2.0 * lo;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > LAMBDA_MAX_BRACKET_CAP {
            return Err(Error::NoRoot(format!(
                "lambda_max: no sign change below bracket cap {LAMBDA_MAX_BRACKET_CAP:e} at delta = {delta}, rho = {nu}"
            )));
        }
    }

    let (lambda, _) = bisect(f, lo, hi, ROOT_TARGET_TOL, 300)?;
    let residual = f(lambda);
    if residual.abs() > ROOT_RESIDUAL_TOL {
        return Err(Error::NoRoot(format!(
            "lambda_max residual {residual:e} exceeds {ROOT_RESIDUAL_TOL:e} at delta = {delta}, rho = {nu}"
        )));
    }
    Ok(lambda.max(lo))
}

/// `lambda_max(delta, rho)`: the root of
/// `delta * psi_max(lambda, rho) + H(rho * delta) = 0` with
/// `lambda >= 1 + rho`, found with an upward-doubling bracket.
pub fn solve_lambda_max(at: PhasePoint) -> Result<f64> {
    solve_lambda_max_raw(at.delta, at.rho)
}

/// Lower deviation bound `L(delta, rho) = 1 - lambda_min(delta, rho)`.
pub fn bound_l(at: PhasePoint) -> Result<f64> {
    Ok(1.0 - solve_lambda_min(at)?)
}

/// Upper deviation bound `U(delta, rho) = min over nu in [rho, 1] of
/// lambda_max(delta, nu) - 1`, using the default scan resolution.
pub fn bound_u(at: PhasePoint) -> Result<f64> {
    bound_u_with(at, U_SCAN_POINTS, U_NU_TOL)
}

/// [`bound_u`] with an explicit coarse-grid size and golden-section
/// tolerance, for refinement studies.
pub fn bound_u_with(at: PhasePoint, scan_points: usize, nu_tol: f64) -> Result<f64> {
    let (delta, rho) = (at.delta, at.rho);
    let points = scan_points.max(2);
    let step = (1.0 - rho) / (points - 1) as f64;

    let mut best_idx = 0usize;
    let mut best_val = f64::INFINITY;
    let mut nus = Vec::with_capacity(points);
    for i in 0..points {
        let nu = if i + 1 == points { 1.0 } else { rho + step * i as f64 };
        nus.push(nu);
        let val = solve_lambda_max_raw(delta, nu)?;
        if val < best_val {
            best_val = val;
            best_idx = i;
        }
    }

    // Refine inside the cell pair around the coarse argmin; the coarse scan
    // guards against non-unimodality, the refinement sharpens the winner.
    let lo = nus[best_idx.saturating_sub(1)];
    let hi = nus[(best_idx + 1).min(points - 1)];
    let mut refined = best_val;
    if hi > lo {
        let (_, val) = golden_min(
            |nu| solve_lambda_max_raw(delta, nu).unwrap_or(f64::INFINITY),
            lo,
            hi,
            nu_tol,
        );
        refined = refined.min(val);
    }
    Ok(refined - 1.0)
}

/// Both deviation bounds at a phase point.
pub fn bounds(at: PhasePoint) -> Result<AsymptoticBounds> {
    Ok(AsymptoticBounds {
        l: bound_l(at)?,
        u: bound_u(at)?,
        at,
    })
}
