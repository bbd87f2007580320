//! Recovery phase-transition curves.
//!
//! For each algorithm the convergence factor `mu(delta, rho)` is strictly
//! increasing in `rho` (each factor formula is componentwise nondecreasing
//! in the deviations, `L` is strictly increasing and `U` nondecreasing in
//! `rho`), so the level set `mu = target` is the graph of a function
//! `rho_star(delta)` and bisection over `rho` is exact. The default target
//! 1 gives the transition curve itself; `1 / rho_star(delta)` is the
//! oversampling constant, the number of measurements per unit sparsity
//! that provably suffices.
//!
//! Level curves of the stability ratio `xi / (1 - mu)` are found the same
//! way: the ratio increases in `rho` (numerator grows, denominator decays
//! toward zero) and is treated as `+inf` once `mu >= 1`.

use crate::asymptotic::{PhasePoint, U_SCAN_POINTS};
use crate::error::{Error, Result};
use crate::exec::{Auto, MapStrategy, Seq};
use crate::factors::{factors_for, stability_ratio, AlgorithmId, GaussianBounds};

/// Tolerances and resolutions of the level-set solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    /// Accepted deviation of the level value at the returned root.
    pub level_tol: f64,
    /// Coarse-grid size of the inner `nu` minimisation.
    pub u_scan_points: usize,
    /// Bisection iteration cap.
    pub max_bisections: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { level_tol: 1e-6, u_scan_points: U_SCAN_POINTS, max_bisections: 240 }
    }
}

/// Which level set a table samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    /// `mu(delta, rho) = target`.
    MuLevel,
    /// `xi / (1 - mu) (delta, rho) = target`.
    StabilityLevel,
}

/// One solved point of a level curve.
#[derive(Debug, Clone, Copy)]
pub struct TransitionPoint {
    pub delta: f64,
    pub rho_star: f64,
    /// `level(delta, rho_star) - target` at acceptance.
    pub residual: f64,
    /// `1 / rho_star`, measurements per unit sparsity.
    pub oversampling: f64,
}

/// A sampled level curve `delta -> rho_star(delta)` with per-point
/// diagnostics; points that failed to solve are recorded, not fatal.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    pub algorithm: AlgorithmId,
    pub kind: LevelKind,
    pub target: f64,
    pub points: Vec<TransitionPoint>,
    pub failures: Vec<(f64, String)>,
}

/// `count` log-spaced points spanning `[lo, hi]`, the default sampling of
/// transition curves (they vary fastest at small `delta`).
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

fn check_algorithm(alg: AlgorithmId) -> Result<()> {
    if alg == AlgorithmId::Romp {
        return Err(Error::Domain(
            "romp has no convergence factor; its guarantee threshold depends on n".into(),
        ));
    }
    Ok(())
}

/// Level value at `(delta, rho)`, or `None` when the point is outside the
/// factor domain (which, for bisection purposes, counts as above any
/// finite target).
fn level_value(
    alg: AlgorithmId,
    kind: LevelKind,
    delta: f64,
    rho: f64,
    settings: &SolverSettings,
) -> Result<Option<f64>> {
    let at = match PhasePoint::new(delta, rho) {
        Ok(at) => at,
        Err(_) => return Ok(None),
    };
    let provider = GaussianBounds::new(at).with_u_scan_points(settings.u_scan_points);
    let factors = match factors_for(alg, &provider) {
        Ok(f) => f,
        Err(Error::Undefined(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    match kind {
        LevelKind::MuLevel => Ok(Some(factors.mu)),
        LevelKind::StabilityLevel => match stability_ratio(&factors) {
            Ok(r) => Ok(Some(r)),
            Err(Error::Undefined(_)) => Ok(None),
            Err(e) => Err(e),
        },
    }
}

fn solve_level(
    alg: AlgorithmId,
    kind: LevelKind,
    delta: f64,
    target: f64,
    settings: &SolverSettings,
) -> Result<TransitionPoint> {
    check_algorithm(alg)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta = {delta} outside (0, 1]")));
    }
    if !(target > 0.0) {
        return Err(Error::Domain(format!("target = {target} must be positive")));
    }

    let eval = |rho: f64| level_value(alg, kind, delta, rho, settings);

    // The admissible rho interval is bounded by the largest sparsity
    // multiple the factor formula reads.
    let edge = 1.0 / alg.max_multiple() as f64;
    let mut hi = edge * (1.0 - 1e-9);
    let mut hi_val = None;
    for _ in 0..200 {
        match eval(hi)? {
            Some(v) => {
                hi_val = Some(v);
                break;
            }
            None => hi *= 0.97,
        }
    }
    let hi_val = hi_val.ok_or_else(|| {
        Error::Undefined(format!("no admissible rho found below {edge:.4} at delta = {delta}"))
    })?;
    if hi_val <= target {
        return Err(Error::Undefined(format!(
            "level reaches only {hi_val:.6} <= target {target} on the admissible interval at delta = {delta}"
        )));
    }

    let mut lo = 1e-12;
    let lo_val = eval(lo)?.ok_or_else(|| {
        Error::Undefined(format!("level undefined at rho = {lo:e}, delta = {delta}"))
    })?;
    if lo_val >= target {
        return Err(Error::Undefined(format!(
            "level is already {lo_val:.6} >= target {target} at rho = {lo:e}; the target sits below the achievable range"
        )));
    }

    // Bracket established: lo is below target, hi above (or undefined,
    // which only happens beyond the domain edge and also counts as above).
    let mut best: Option<(f64, f64)> = None;
    for _ in 0..settings.max_bisections {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match eval(mid)? {
            None => hi = mid,
            Some(v) => {
                let residual = v - target;
                if best.map_or(true, |(_, r)| residual.abs() < r.abs()) {
                    best = Some((mid, residual));
                }
                if residual.abs() <= settings.level_tol {
                    return Ok(TransitionPoint {
                        delta,
                        rho_star: mid,
                        residual,
                        oversampling: 1.0 / mid,
                    });
                }
                if v < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
    match best {
        Some((rho, residual)) if residual.abs() <= settings.level_tol => Ok(TransitionPoint {
            delta,
            rho_star: rho,
            residual,
            oversampling: 1.0 / rho,
        }),
        _ => Err(Error::NoRoot(format!(
            "level bisection did not reach |level - target| <= {:e} at delta = {delta}",
            settings.level_tol
        ))),
    }
}

/// The `rho` at which the algorithm's convergence factor reaches `target`
/// (default 1: the phase-transition boundary) at undersampling `delta`.
pub fn rho_star(alg: AlgorithmId, delta: f64, target: f64) -> Result<TransitionPoint> {
    solve_level(alg, LevelKind::MuLevel, delta, target, &SolverSettings::default())
}

/// [`rho_star`] with explicit solver settings.
pub fn rho_star_with(
    alg: AlgorithmId,
    delta: f64,
    target: f64,
    settings: &SolverSettings,
) -> Result<TransitionPoint> {
    solve_level(alg, LevelKind::MuLevel, delta, target, settings)
}

fn curve<M: MapStrategy>(
    alg: AlgorithmId,
    kind: LevelKind,
    deltas: &[f64],
    target: f64,
    settings: &SolverSettings,
) -> Result<TransitionTable> {
    check_algorithm(alg)?;
    if deltas.is_empty() {
        return Err(Error::Domain("empty delta grid".into()));
    }
    if deltas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("delta grid must be strictly increasing".into()));
    }

    // Points are solved independently (and in parallel when enabled); the
    // assembly below preserves grid order regardless of schedule.
    let settings = *settings;
    let solved = M::map(deltas.len(), |i| {
        solve_level(alg, kind, deltas[i], target, &settings)
    });

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (delta, outcome) in deltas.iter().zip(solved) {
        match outcome {
            Ok(p) => points.push(p),
            Err(e) => failures.push((*delta, e.to_string())),
        }
    }
    Ok(TransitionTable { algorithm: alg, kind, target, points, failures })
}

/// Sample `rho_star(delta)` over a strictly increasing `delta` grid.
pub fn transition_curve(alg: AlgorithmId, deltas: &[f64], target: f64) -> Result<TransitionTable> {
    curve::<Auto>(alg, LevelKind::MuLevel, deltas, target, &SolverSettings::default())
}

/// Sequential variant of [`transition_curve`]; grid points are solved
/// independently, so the two paths return identical tables.
pub fn transition_curve_sequential(
    alg: AlgorithmId,
    deltas: &[f64],
    target: f64,
) -> Result<TransitionTable> {
    curve::<Seq>(alg, LevelKind::MuLevel, deltas, target, &SolverSettings::default())
}

/// [`transition_curve`] with explicit solver settings.
pub fn transition_curve_with(
    alg: AlgorithmId,
    deltas: &[f64],
    target: f64,
    settings: &SolverSettings,
) -> Result<TransitionTable> {
    curve::<Auto>(alg, LevelKind::MuLevel, deltas, target, settings)
}

/// Sample the level curve `xi / (1 - mu) = level` over a `delta` grid.
/// Such curves lie strictly below the transition curve of the same
/// algorithm: a finite ratio requires `mu < 1`.
pub fn stability_level_curve(
    alg: AlgorithmId,
    deltas: &[f64],
    level: f64,
) -> Result<TransitionTable> {
    curve::<Auto>(alg, LevelKind::StabilityLevel, deltas, level, &SolverSettings::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spaced_grid_shape() {
        let g = log_spaced(1e-3, 1.0, 50);
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[49], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rho_star_meets_residual_invariant() {
        let p = rho_star(AlgorithmId::L1, 0.5, 1.0).unwrap();
        assert!(p.rho_star > 0.0 && p.rho_star < 1.0);
        assert!(p.residual.abs() <= 1e-6);
        assert_eq!(p.oversampling, 1.0 / p.rho_star);

        // Recompute the level at the root through the public factor path.
        let at = PhasePoint::new(0.5, p.rho_star).unwrap();
        let f = factors_for(AlgorithmId::L1, &GaussianBounds::new(at)).unwrap();
        assert!((f.mu - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn rho_star_shrinks_with_delta() {
        let mut prev = f64::INFINITY;
        for &delta in &[1.0, 0.5, 0.25, 0.1] {
            let p = rho_star(AlgorithmId::L1, delta, 1.0).unwrap();
            assert!(p.rho_star < prev, "rho_star grew as delta shrank at {delta}");
            prev = p.rho_star;
        }
    }

    #[test]
    fn lower_target_gives_lower_curve() {
        let strict = rho_star(AlgorithmId::Iht, 0.5, 0.5).unwrap();
        let loose = rho_star(AlgorithmId::Iht, 0.5, 1.0).unwrap();
        assert!(strict.rho_star < loose.rho_star);
    }

    #[test]
    fn transition_curve_assembles_in_order() {
        let deltas = [0.25, 0.5, 1.0];
        let t = transition_curve(AlgorithmId::L1, &deltas, 1.0).unwrap();
        assert_eq!(t.points.len(), 3);
        assert!(t.failures.is_empty());
        for (p, d) in t.points.iter().zip(deltas) {
            assert_eq!(p.delta, d);
            assert!(p.residual.abs() <= 1e-6);
        }
        assert!(t.points.windows(2).all(|w| w[0].rho_star < w[1].rho_star));
    }

    #[test]
    fn curve_rejects_bad_grids() {
        assert!(transition_curve(AlgorithmId::L1, &[], 1.0).is_err());
        assert!(transition_curve(AlgorithmId::L1, &[0.5, 0.5], 1.0).is_err());
        assert!(transition_curve(AlgorithmId::L1, &[0.5, 0.2], 1.0).is_err());
        assert!(transition_curve(AlgorithmId::Romp, &[0.5], 1.0).is_err());
    }

    #[test]
    fn stability_curve_sits_below_transition() {
        let delta = [0.5];
        let trans = transition_curve(AlgorithmId::Iht, &delta, 1.0).unwrap();
        let stab = stability_level_curve(AlgorithmId::Iht, &delta, 20.0).unwrap();
        assert_eq!(stab.points.len(), 1);
        assert!(stab.points[0].rho_star < trans.points[0].rho_star);
        assert!(stab.points[0].residual.abs() <= 1e-6);
    }

    #[test]
    fn higher_stability_level_means_higher_rho() {
        let lo = stability_level_curve(AlgorithmId::Iht, &[0.5], 10.0).unwrap();
        let hi = stability_level_curve(AlgorithmId::Iht, &[0.5], 40.0).unwrap();
        assert!(lo.points[0].rho_star < hi.points[0].rho_star);
    }

    #[test]
    fn unachievable_stability_level_is_detected() {
        // The ratio tends to the zero-deviation value 2 for IHT as
        // rho -> 0, so level 1.5 is below the achievable range.
        let t = stability_level_curve(AlgorithmId::Iht, &[0.5], 1.5).unwrap();
        assert!(t.points.is_empty());
        assert_eq!(t.failures.len(), 1);
    }
}
