//! Seeded Gaussian problem generation and empirical success-rate grids.
//!
//! Everything is deterministic from a base seed: per-trial generators are
//! derived with a counter-based (splitmix-style) scheme from `(base seed,
//! cell index, trial index)`, so grids are reproducible across runs and
//! across parallel schedules.
//!
//! The grids measure average-case behaviour over random signals; the
//! analytic transition curves bound worst-case (uniform over all sparse
//! signals) recovery, which no random sampling can certify.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec::{Auto, MapStrategy, Seq};
use crate::factors::AlgorithmId;
use crate::finite::ProblemSize;
use crate::greedy::{cosamp, iht, subspace_pursuit, RecoveryOptions, RecoveryResult};

/// Relative error below which a trial counts as exact recovery.
pub const EXACT_RECOVERY_TOL: f64 = 1e-6;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stateless seed derivation: mixes `base` with a path of tags (e.g.
/// `[cell, trial]`). Identical inputs give identical seeds on every
/// platform and schedule.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix(base);
    for &t in tags {
        state = splitmix(state ^ splitmix(t));
    }
    state
}

/// Nonzero-value distribution of synthetic sparse signals. `Sign` (unit
/// magnitudes) is the default: it is the hard case for thresholding and
/// maximises `nu_min` for a given sparsity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Sign,
    Gaussian,
}

/// An `n x N` matrix with i.i.d. `N(0, 1/n)` entries, filled row-major
/// from a seeded generator.
pub fn gaussian_matrix(n: usize, ambient_dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_row_iterator(
        n,
        ambient_dim,
        std::iter::repeat_with(|| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g * scale
        })
        .take(n * ambient_dim),
    )
}

/// A length-`N` vector with a uniformly random `k`-subset support and
/// nonzeros drawn per `kind`.
pub fn sparse_signal(ambient_dim: usize, k: usize, kind: SignalKind, seed: u64) -> Result<DVector<f64>> {
    if k > ambient_dim {
        return Err(Error::Dimension(format!(
            "sparsity {k} exceeds ambient dimension {ambient_dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support = rand::seq::index::sample(&mut rng, ambient_dim, k).into_vec();
    support.sort_unstable();
    let mut x = DVector::zeros(ambient_dim);
    for &i in &support {
        x[i] = match kind {
            SignalKind::Sign => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            SignalKind::Gaussian => StandardNormal.sample(&mut rng),
        };
    }
    Ok(x)
}

/// One fully specified trial; identical specs produce identical outcomes.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub size: ProblemSize,
    pub signal_kind: SignalKind,
    /// Noise norm as a fraction of `||Ax||`.
    pub noise_level: f64,
    pub seed: u64,
    /// One of the three implemented solvers.
    pub algorithm: AlgorithmId,
    pub options: RecoveryOptions,
}

/// Outcome of one trial. Solver errors become failed-trial records, not
/// panics, so sweeps keep going.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    /// Exact recovery under the `1e-6` relative-error criterion.
    pub success: bool,
    pub rel_error: f64,
    pub result: Option<RecoveryResult>,
    /// Solver error message when the trial failed outright.
    pub failure: Option<String>,
}

/// Build the instance described by `spec` (matrix, signal, noise of norm
/// `noise_level * ||Ax||` in a random direction), run the solver, and
/// report the relative recovery error.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialOutcome> {
    if !(spec.noise_level >= 0.0) {
        return Err(Error::Domain(format!("noise level {} negative", spec.noise_level)));
    }
    let (k, n, big_n) =
        (spec.size.sparsity, spec.size.measurements, spec.size.ambient_dim);

    let a = gaussian_matrix(n, big_n, derive_seed(spec.seed, &[1]));
    let x = sparse_signal(big_n, k, spec.signal_kind, derive_seed(spec.seed, &[2]))?;
    let mut y = &a * &x;
    if spec.noise_level > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[3]));
        let direction = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let noise = direction.scale(spec.noise_level * y.norm() / direction.norm());
        y += noise;
    }

    let solved = match spec.algorithm {
        AlgorithmId::Cosamp => cosamp(&a, &y, k, &spec.options),
        AlgorithmId::Sp => subspace_pursuit(&a, &y, k, &spec.options),
        AlgorithmId::Iht => iht(&a, &y, k, &spec.options),
        other => {
            return Err(Error::Domain(format!("no solver for algorithm '{other}'")))
        }
    };
    Ok(match solved {
        Ok(result) => {
            let rel_error = (&result.estimate - &x).norm() / x.norm();
            TrialOutcome {
                success: rel_error <= EXACT_RECOVERY_TOL,
                rel_error,
                result: Some(result),
                failure: None,
            }
        }
        Err(e) => TrialOutcome {
            success: false,
            rel_error: f64::INFINITY,
            result: None,
            failure: Some(e.to_string()),
        },
    })
}

/// One cell of a success grid.
#[derive(Debug, Clone, Copy)]
pub struct GridCell {
    pub delta: f64,
    pub rho: f64,
    pub sparsity: usize,
    pub measurements: usize,
    pub ambient_dim: usize,
    pub trials: usize,
    pub successes: usize,
}

/// A cell whose `(delta, rho, n)` rounding produced an infeasible size.
#[derive(Debug, Clone)]
pub struct SkippedCell {
    pub delta: f64,
    pub rho: f64,
    pub reason: String,
}

/// Empirical success counts over a `(delta, rho)` grid.
#[derive(Debug, Clone)]
pub struct SuccessGrid {
    pub algorithm: AlgorithmId,
    pub cells: Vec<GridCell>,
    pub skipped: Vec<SkippedCell>,
}

/// Map a `(delta, rho)` cell to a concrete size at `n` measurements:
/// `k = round(rho * n)`, `N = round(n / delta)`, requiring
/// `1 <= k < n < N`.
fn cell_size(delta: f64, rho: f64, n: usize) -> std::result::Result<ProblemSize, String> {
    if !(delta > 0.0 && delta <= 1.0) || !(rho > 0.0 && rho < 1.0) {
        return Err(format!("cell (delta = {delta}, rho = {rho}) outside the unit square"));
    }
    let k = (rho * n as f64).round() as usize;
    let big_n = (n as f64 / delta).round() as usize;
    if k == 0 {
        return Err(format!("rho = {rho} rounds to sparsity 0 at n = {n}"));
    }
    if k >= n {
        return Err(format!("rho = {rho} rounds to k = {k} >= n = {n}"));
    }
    if big_n <= n {
        return Err(format!("delta = {delta} rounds to N = {big_n} <= n = {n}"));
    }
    ProblemSize::new(k, n, big_n).map_err(|e| e.to_string())
}

/// Run `trials` independent recovery trials per grid cell. Per-trial seeds
/// come from `(base_seed, cell index, trial index)`, so the counts are
/// independent of the execution schedule. `success_threshold` overrides
/// the exact-recovery tolerance (noisy sweeps need a looser one).
pub fn success_grid(
    algorithm: AlgorithmId,
    deltas: &[f64],
    rhos: &[f64],
    n: usize,
    trials: usize,
    base_seed: u64,
    signal_kind: SignalKind,
    noise_level: f64,
    options: &RecoveryOptions,
    success_threshold: Option<f64>,
) -> Result<SuccessGrid> {
    success_grid_impl::<Auto>(
        algorithm, deltas, rhos, n, trials, base_seed, signal_kind, noise_level, options,
        success_threshold,
    )
}

/// Sequential variant of [`success_grid`]; the seed-derivation contract
/// makes the two paths identical.
#[allow(clippy::too_many_arguments)]
pub fn success_grid_sequential(
    algorithm: AlgorithmId,
    deltas: &[f64],
    rhos: &[f64],
    n: usize,
    trials: usize,
    base_seed: u64,
    signal_kind: SignalKind,
    noise_level: f64,
    options: &RecoveryOptions,
    success_threshold: Option<f64>,
) -> Result<SuccessGrid> {
    success_grid_impl::<Seq>(
        algorithm, deltas, rhos, n, trials, base_seed, signal_kind, noise_level, options,
        success_threshold,
    )
}

#[allow(clippy::too_many_arguments)]
fn success_grid_impl<M: MapStrategy>(
    algorithm: AlgorithmId,
    deltas: &[f64],
    rhos: &[f64],
    n: usize,
    trials: usize,
    base_seed: u64,
    signal_kind: SignalKind,
    noise_level: f64,
    options: &RecoveryOptions,
    success_threshold: Option<f64>,
) -> Result<SuccessGrid> {
    if deltas.is_empty() || rhos.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    if !matches!(algorithm, AlgorithmId::Cosamp | AlgorithmId::Sp | AlgorithmId::Iht) {
        return Err(Error::Domain(format!("no solver for algorithm '{algorithm}'")));
    }
    let threshold = success_threshold.unwrap_or(EXACT_RECOVERY_TOL);

    let mut feasible = Vec::new();
    let mut skipped = Vec::new();
    for (di, &delta) in deltas.iter().enumerate() {
        for (ri, &rho) in rhos.iter().enumerate() {
            let cell_index = (di * rhos.len() + ri) as u64;
            match cell_size(delta, rho, n) {
                Ok(size) => feasible.push((cell_index, delta, rho, size)),
                Err(reason) => skipped.push(SkippedCell { delta, rho, reason }),
            }
        }
    }

    // Flatten (cell, trial) into one index space for even load balancing;
    // aggregation below is order-fixed.
    let total = feasible.len() * trials;
    let options = *options;
    let outcomes = M::map(total, |i| {
        let (cell_index, _, _, size) = feasible[i / trials];
        let trial_index = (i % trials) as u64;
        let spec = TrialSpec {
            size,
            signal_kind,
            noise_level,
            seed: derive_seed(base_seed, &[cell_index, trial_index]),
            algorithm,
            options,
        };
        match run_trial(&spec) {
            Ok(outcome) => outcome.rel_error <= threshold,
            Err(_) => false,
        }
    });

    let cells = feasible
        .iter()
        .enumerate()
        .map(|(j, &(_, delta, rho, size))| GridCell {
            delta,
            rho,
            sparsity: size.sparsity,
            measurements: size.measurements,
            ambient_dim: size.ambient_dim,
            trials,
            successes: outcomes[j * trials..(j + 1) * trials].iter().filter(|s| **s).count(),
        })
        .collect();

    Ok(SuccessGrid { algorithm, cells, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn seed_derivation_is_stable_and_spreads() {
        assert_eq!(derive_seed(42, &[1, 2]), derive_seed(42, &[1, 2]));
        assert_ne!(derive_seed(42, &[1, 2]), derive_seed(42, &[2, 1]));
        assert_ne!(derive_seed(42, &[1]), derive_seed(43, &[1]));
        assert_ne!(derive_seed(0, &[0, 0]), derive_seed(0, &[0, 1]));
    }

    #[test]
    fn gaussian_matrix_column_energy_concentrates() {
        let a = gaussian_matrix(100, 200, 7);
        let mean_sq: f64 =
            (0..200).map(|j| a.column(j).norm_squared()).sum::<f64>() / 200.0;
        assert!((0.9..=1.1).contains(&mean_sq), "mean squared column norm {mean_sq}");
    }

    #[test]
    fn gaussian_matrix_is_deterministic() {
        let a = gaussian_matrix(10, 20, 5);
        let b = gaussian_matrix(10, 20, 5);
        assert_eq!(a, b);
        let c = gaussian_matrix(10, 20, 6);
        assert_ne!(a, c);
    }

    #[test]
    fn sparse_signal_shape_and_kinds() {
        let x = sparse_signal(50, 7, SignalKind::Sign, 3).unwrap();
        let nonzeros: Vec<f64> = x.iter().cloned().filter(|v| *v != 0.0).collect();
        assert_eq!(nonzeros.len(), 7);
        assert!(nonzeros.iter().all(|v| v.abs() == 1.0));

        let g = sparse_signal(50, 7, SignalKind::Gaussian, 3).unwrap();
        assert_eq!(g.iter().filter(|v| **v != 0.0).count(), 7);

        assert!(sparse_signal(5, 6, SignalKind::Sign, 0).is_err());
    }

    #[test]
    fn sparse_signal_support_is_uniform() {
        let mut counts = [0usize; 10];
        for seed in 0..10_000u64 {
            let x = sparse_signal(10, 1, SignalKind::Sign, seed).unwrap();
            let idx = (0..10).find(|&i| x[i] != 0.0).unwrap();
            counts[idx] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / 10_000.0;
            assert!((0.08..=0.12).contains(&freq), "index {i} frequency {freq}");
        }
    }

    #[test]
    fn noise_norm_is_exact() {
        let size = ProblemSize::new(3, 30, 60).unwrap();
        let spec = TrialSpec {
            size,
            signal_kind: SignalKind::Sign,
            noise_level: 0.01,
            seed: 11,
            algorithm: AlgorithmId::Cosamp,
            options: RecoveryOptions::for_sparsity(3),
        };
        // Rebuild the instance exactly as run_trial does and check the
        // noise normalisation.
        let a = gaussian_matrix(30, 60, derive_seed(11, &[1]));
        let x = sparse_signal(60, 3, SignalKind::Sign, derive_seed(11, &[2])).unwrap();
        let clean = &a * &x;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(11, &[3]));
        let direction = DVector::<f64>::from_fn(30, |_, _| StandardNormal.sample(&mut rng));
        let noise = direction.scale(0.01 * clean.norm() / direction.norm());
        assert_abs_diff_eq!(noise.norm(), 0.01 * clean.norm(), epsilon = 1e-12 * clean.norm());

        // And the noisy trial cannot count as exact recovery.
        let outcome = run_trial(&spec).unwrap();
        assert!(outcome.rel_error > 0.0);
        if outcome.rel_error > EXACT_RECOVERY_TOL {
            assert!(!outcome.success);
        }
    }

    #[test]
    fn trial_is_deterministic() {
        let size = ProblemSize::new(2, 20, 40).unwrap();
        let spec = TrialSpec {
            size,
            signal_kind: SignalKind::Gaussian,
            noise_level: 0.0,
            seed: 99,
            algorithm: AlgorithmId::Sp,
            options: RecoveryOptions::for_sparsity(2),
        };
        let a = run_trial(&spec).unwrap();
        let b = run_trial(&spec).unwrap();
        assert_eq!(a.success, b.success);
        assert_eq!(a.rel_error.to_bits(), b.rel_error.to_bits());
    }

    #[test]
    fn trial_rejects_factor_only_algorithms() {
        let size = ProblemSize::new(2, 20, 40).unwrap();
        let spec = TrialSpec {
            size,
            signal_kind: SignalKind::Sign,
            noise_level: 0.0,
            seed: 1,
            algorithm: AlgorithmId::L1,
            options: RecoveryOptions::for_sparsity(2),
        };
        assert!(run_trial(&spec).is_err());
    }

    #[test]
    fn easy_trials_succeed() {
        let size = ProblemSize::new(2, 30, 60).unwrap();
        let mut successes = 0;
        for seed in 0..20 {
            let spec = TrialSpec {
                size,
                signal_kind: SignalKind::Sign,
                noise_level: 0.0,
                seed,
                algorithm: AlgorithmId::Cosamp,
                options: RecoveryOptions::for_sparsity(2),
            };
            if run_trial(&spec).unwrap().success {
                successes += 1;
            }
        }
        assert!(successes >= 19, "only {successes}/20 easy trials succeeded");
    }

    #[test]
    fn grid_counts_are_reproducible_and_schedule_independent() {
        let deltas = [0.4, 0.6];
        let rhos = [0.1, 0.25];
        let opts = RecoveryOptions::for_sparsity(4);
        let g1 = success_grid(
            AlgorithmId::Cosamp, &deltas, &rhos, 24, 6, 77, SignalKind::Sign, 0.0, &opts, None,
        )
        .unwrap();
        let g2 = success_grid(
            AlgorithmId::Cosamp, &deltas, &rhos, 24, 6, 77, SignalKind::Sign, 0.0, &opts, None,
        )
        .unwrap();
        let g3 = success_grid_sequential(
            AlgorithmId::Cosamp, &deltas, &rhos, 24, 6, 77, SignalKind::Sign, 0.0, &opts, None,
        )
        .unwrap();
        assert_eq!(g1.cells.len(), 4);
        for ((c1, c2), c3) in g1.cells.iter().zip(&g2.cells).zip(&g3.cells) {
            assert_eq!(c1.successes, c2.successes);
            assert_eq!(c1.successes, c3.successes);
            assert_eq!(c1.trials, 6);
        }
    }

    #[test]
    fn grid_skips_infeasible_cells() {
        let g = success_grid(
            AlgorithmId::Iht,
            &[0.9],
            &[0.005, 0.5],
            10,
            2,
            3,
            SignalKind::Sign,
            0.0,
            &RecoveryOptions::for_sparsity(1),
            None,
        )
        .unwrap();
        // rho = 0.005 rounds to k = 0 at n = 10; delta = 0.9 gives
        // N = 11 > n so the rho = 0.5 cell stays.
        assert_eq!(g.cells.len(), 1);
        assert_eq!(g.skipped.len(), 1);
        assert!(g.skipped[0].reason.contains("sparsity 0"));
    }

    #[test]
    fn success_rate_trends_down_in_rho() {
        let rhos = [0.08, 0.2, 0.45, 0.7];
        let trials = 24;
        let g = success_grid(
            AlgorithmId::Cosamp,
            &[0.5],
            &rhos,
            40,
            trials,
            5,
            SignalKind::Sign,
            0.0,
            &RecoveryOptions::for_sparsity(8),
            None,
        )
        .unwrap();
        let slack = 2.0 / (trials as f64).sqrt();
        let rates: Vec<f64> =
            g.cells.iter().map(|c| c.successes as f64 / c.trials as f64).collect();
        for w in rates.windows(2) {
            assert!(
                w[1] <= w[0] + slack,
                "success rate rose beyond sampling slack: {rates:?}"
            );
        }
        // Deep inside the easy region the rate is high.
        assert!(rates[0] >= 0.9, "easy-cell rate {}", rates[0]);
    }
}
