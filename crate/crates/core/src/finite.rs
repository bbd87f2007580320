//! Exact and Monte-Carlo-estimated aRIP constants for concrete matrices.
//!
//! The asymmetric restricted isometry constants of an `n x N` matrix `A`
//! at sparsity `order` are
//!
//! ```text
//!   L = max(0, max over |I| = order of 1 - smin(A_I)^2)
//!   U = max(0, max over |I| = order of smax(A_I)^2 - 1)
//! ```
//!
//! Exact values come from exhaustive subset enumeration (guarded against
//! combinatorial blowup); lower estimates come from random subset sampling
//! followed by greedy single-column-swap ascent. Certified upper bounds for
//! arbitrary matrices are out of reach (the problem is NP-hard in general).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::exec::{Auto, MapStrategy, Seq};

/// Largest number of subsets `exact_arip` is willing to enumerate.
pub const ENUMERATION_GUARD: u128 = 10_000_000;
/// Maximum number of sweeps for the greedy swap ascent.
const MAX_ASCENT_SWEEPS: usize = 50;
/// Subsets per work item in the parallel enumeration.
const ENUMERATION_CHUNK: usize = 2048;

/// One finite problem instance: sparsity `k`, `n` measurements, ambient
/// dimension `N`, with `1 <= k < n <= N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSize {
    pub sparsity: usize,
    pub measurements: usize,
    pub ambient_dim: usize,
}

impl ProblemSize {
    pub fn new(sparsity: usize, measurements: usize, ambient_dim: usize) -> Result<Self> {
        if sparsity == 0 || sparsity >= measurements || measurements > ambient_dim {
            return Err(Error::Domain(format!(
                "problem size (k = {sparsity}, n = {measurements}, N = {ambient_dim}) violates 1 <= k < n <= N"
            )));
        }
        Ok(Self { sparsity, measurements, ambient_dim })
    }

    pub fn delta(&self) -> f64 {
        self.measurements as f64 / self.ambient_dim as f64
    }

    pub fn rho(&self) -> f64 {
        self.sparsity as f64 / self.measurements as f64
    }
}

/// How a pair of finite aRIP constants was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// True extrema over all column subsets of the stated order.
    Exact,
    /// Lower bounds from random sampling plus greedy ascent.
    MonteCarloLower,
}

/// aRIP constants of one matrix at one sparsity order.
#[derive(Debug, Clone, Copy)]
pub struct FiniteAripBounds {
    pub l: f64,
    pub u: f64,
    pub order: usize,
    pub provenance: Provenance,
}

/// Number of `k`-subsets of an `n`-set, saturating at `u128::MAX`.
pub(crate) fn combination_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        let num = (n - k + i + 1) as u128;
        c = match c.checked_mul(num) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    c
}

/// Subset of `{0..n}` with `k` elements at lexicographic `rank`.
pub(crate) fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut subset = Vec::with_capacity(k);
    let mut x = 0usize;
    for i in 0..k {
        loop {
            let c = combination_count(n - x - 1, k - i - 1);
            if rank < c {
                break;
            }
            rank -= c;
            x += 1;
        }
        subset.push(x);
        x += 1;
    }
    subset
}

/// Advance `subset` to its lexicographic successor; returns false at the end.
pub(crate) fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn validate_index_set(a: &DMatrix<f64>, idx: &[usize]) -> Result<()> {
    let (n, cols) = (a.nrows(), a.ncols());
    if idx.len() > n {
        return Err(Error::Dimension(format!(
            "index set of size {} exceeds row count {n}",
            idx.len()
        )));
    }
    if idx.is_empty() {
        return Err(Error::Dimension("index set is empty".into()));
    }
    let mut seen = vec![false; cols];
    for &i in idx {
        if i >= cols {
            return Err(Error::Dimension(format!("column index {i} out of range 0..{cols}")));
        }
        if seen[i] {
            return Err(Error::Dimension(format!("duplicate column index {i}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Extreme squared singular values of `A_I`, i.e. the extreme eigenvalues
/// of the Wishart matrix `A_I^T A_I`. Uses the order-sized Gram matrix when
/// the subset is small relative to `n`, the direct SVD otherwise.
fn extreme_gram_eigs(a: &DMatrix<f64>, idx: &[usize]) -> (f64, f64) {
    let sub = a.select_columns(idx.iter());
    if idx.len() * 2 <= a.nrows() {
        let gram = sub.transpose() * &sub;
        let eigs = gram.symmetric_eigenvalues();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &e in eigs.iter() {
            lo = lo.min(e);
            hi = hi.max(e);
        }
        (lo.max(0.0), hi.max(0.0))
    } else {
        let svals = sub.singular_values();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for &s in svals.iter() {
            lo = lo.min(s);
            hi = hi.max(s);
        }
        // An n x m map with m > n has a nontrivial kernel.
        if idx.len() > a.nrows() {
            lo = 0.0;
        }
        (lo * lo, hi * hi)
    }
}

/// Smallest and largest singular values of the column submatrix `A_I`.
pub fn submatrix_extreme_singvals(a: &DMatrix<f64>, idx: &[usize]) -> Result<(f64, f64)> {
    validate_index_set(a, idx)?;
    let (lo, hi) = extreme_gram_eigs(a, idx);
    Ok((lo.sqrt(), hi.sqrt()))
}

/// Exact aRIP constants of `a` at the given sparsity order, by exhaustive
/// enumeration of all column subsets. Errors with
/// [`Error::CombinatorialBlowup`] when more than [`ENUMERATION_GUARD`]
/// subsets would be visited; use [`estimate_arip_lower`] in that regime.
pub fn exact_arip(a: &DMatrix<f64>, order: usize) -> Result<FiniteAripBounds> {
    exact_arip_impl::<Auto>(a, order)
}

/// Sequential variant of [`exact_arip`]; the enumeration extrema are exact
/// maxima, so the two paths return identical values.
pub fn exact_arip_sequential(a: &DMatrix<f64>, order: usize) -> Result<FiniteAripBounds> {
    exact_arip_impl::<Seq>(a, order)
}

fn exact_arip_impl<M: MapStrategy>(a: &DMatrix<f64>, order: usize) -> Result<FiniteAripBounds> {
    let (n, cols) = (a.nrows(), a.ncols());
    if order == 0 || order > n || order > cols {
        return Err(Error::Dimension(format!(
            "order {order} outside 1..=min(n = {n}, N = {cols})"
        )));
    }
    let total = combination_count(cols, order);
    if total > ENUMERATION_GUARD {
        return Err(Error::CombinatorialBlowup { subsets: total, guard: ENUMERATION_GUARD });
    }

    let total = total as usize;
    let chunks = total.div_ceil(ENUMERATION_CHUNK);
    let extrema = M::map(chunks, |chunk| {
        let start = chunk * ENUMERATION_CHUNK;
        let len = ENUMERATION_CHUNK.min(total - start);
        let mut subset = unrank_combination(cols, order, start as u128);
        let mut min_eig = f64::INFINITY;
        let mut max_eig = f64::NEG_INFINITY;
        for i in 0..len {
            let (lo, hi) = extreme_gram_eigs(a, &subset);
            min_eig = min_eig.min(lo);
            max_eig = max_eig.max(hi);
            if i + 1 < len {
                next_combination(&mut subset, cols);
            }
        }
        (min_eig, max_eig)
    });

    let (min_eig, max_eig) = extrema
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (l, h)| (lo.min(l), hi.max(h)));
    Ok(FiniteAripBounds {
        l: (1.0 - min_eig).max(0.0),
        u: (max_eig - 1.0).max(0.0),
        order,
        provenance: Provenance::Exact,
    })
}

fn sample_subset(rng: &mut ChaCha8Rng, cols: usize, order: usize) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, cols, order).into_vec();
    idx.sort_unstable();
    idx
}

/// One sweep of best-improvement single-column swaps. `better(candidate,
/// incumbent)` decides strict improvement of the tracked eigenvalue.
fn swap_ascent(
    a: &DMatrix<f64>,
    subset: &mut Vec<usize>,
    eig_of: impl Fn(&DMatrix<f64>, &[usize]) -> f64,
    better: impl Fn(f64, f64) -> bool,
) -> f64 {
    let cols = a.ncols();
    let mut best = eig_of(a, subset);
    for _ in 0..MAX_ASCENT_SWEEPS {
        let mut improved = false;
        let mut best_swap = None;
        for pos in 0..subset.len() {
            for col in 0..cols {
                if subset.contains(&col) {
                    continue;
                }
                let old = subset[pos];
                subset[pos] = col;
                let val = eig_of(a, subset);
                subset[pos] = old;
                if better(val, best) {
                    best = val;
                    best_swap = Some((pos, col));
                    improved = true;
                }
            }
        }
        match best_swap {
            Some((pos, col)) => {
                subset[pos] = col;
                subset.sort_unstable();
            }
            None => break,
        }
        if !improved {
            break;
        }
    }
    best
}

/// Monte-Carlo lower bounds on the aRIP constants: sample random subsets,
/// then sharpen the best candidate for each constant by greedy
/// single-column-swap ascent. Deterministic given `seed`, independent of
/// the parallel schedule.
pub fn estimate_arip_lower(
    a: &DMatrix<f64>,
    order: usize,
    trials: usize,
    seed: u64,
) -> Result<FiniteAripBounds> {
    estimate_arip_lower_impl::<Auto>(a, order, trials, seed)
}

/// Sequential variant of [`estimate_arip_lower`]; per-trial seeding makes
/// the outcome identical to the parallel path.
pub fn estimate_arip_lower_sequential(
    a: &DMatrix<f64>,
    order: usize,
    trials: usize,
    seed: u64,
) -> Result<FiniteAripBounds> {
    estimate_arip_lower_impl::<Seq>(a, order, trials, seed)
}

fn estimate_arip_lower_impl<M: MapStrategy>(
    a: &DMatrix<f64>,
    order: usize,
    trials: usize,
    seed: u64,
) -> Result<FiniteAripBounds> {
    let (n, cols) = (a.nrows(), a.ncols());
    if order == 0 || order > n || order > cols {
        return Err(Error::Dimension(format!(
            "order {order} outside 1..=min(n = {n}, N = {cols})"
        )));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }

    // (eigenvalue, trial) pairs; the trial index is the deterministic
    // tie-break so parallel and sequential reductions agree.
    let evals = M::map(trials, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let subset = sample_subset(&mut rng, cols, order);
        let (lo, hi) = extreme_gram_eigs(a, &subset);
        (lo, hi)
    });

    let mut best_min = (f64::INFINITY, 0usize);
    let mut best_max = (f64::NEG_INFINITY, 0usize);
    for (trial, &(lo, hi)) in evals.iter().enumerate() {
        if lo < best_min.0 {
            best_min = (lo, trial);
        }
        if hi > best_max.0 {
            best_max = (hi, trial);
        }
    }

    let subset_for = |trial: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        sample_subset(&mut rng, cols, order)
    };

    let mut min_subset = subset_for(best_min.1);
    let min_eig = swap_ascent(
        a,
        &mut min_subset,
        |a, s| extreme_gram_eigs(a, s).0,
        |cand, best| cand < best,
    );
    let mut max_subset = subset_for(best_max.1);
    let max_eig = swap_ascent(
        a,
        &mut max_subset,
        |a, s| extreme_gram_eigs(a, s).1,
        |cand, best| cand > best,
    );

    Ok(FiniteAripBounds {
        l: (1.0 - min_eig).max(0.0),
        u: (max_eig - 1.0).max(0.0),
        order,
        provenance: Provenance::MonteCarloLower,
    })
}

/// Names of the six isometry implications checked by
/// [`verify_arip_implications`], in report order.
pub const IMPLICATION_NAMES: [&str; 6] = [
    "adjoint_contraction",      // ||A_I^T y||   <= sqrt(1 + U(|I|)) ||y||
    "wishart_spectrum",         // (1 - L)||u||  <= ||A_I^T A_I u|| <= (1 + U)||u||
    "pseudoinverse_norm",       // ||A_I^+ y||   <= (1 - L(|I|))^{-1/2} ||y||
    "disjoint_inner_product",   // |<A_I u, A_J v>| <= (L + U)/2 ||u|| ||v||
    "cross_gram_norm",          // ||A_I^T A_J v||  <= max{L, U}(|I|+|J|) ||v||
    "damped_gram_contraction",  // ||(I - w A_I^T A_I) u|| <= max{w(1+U)-1, 1-w(1-L)} ||u||
];

/// Outcome of one inequality across all random draws.
#[derive(Debug, Clone, Copy)]
pub struct ImplicationCheck {
    pub violations: usize,
    /// Smallest observed `rhs - lhs`; nonnegative when the inequality held
    /// on every draw.
    pub worst_slack: f64,
}

/// Numerical audit of the standard aRIP implications.
#[derive(Debug, Clone)]
pub struct ImplicationReport {
    pub draws: usize,
    pub checks: [ImplicationCheck; 6],
}

impl ImplicationReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }
}

/// Checks, on `draws` random configurations, the six inequalities implied
/// by the aRIP constants of `a` (computed exactly for every order up to
/// `2k`): adjoint and pseudoinverse contractions, the Wishart spectrum
/// bracket, the disjoint inner-product and cross-Gram bounds, and the
/// damped Gram contraction for a random relaxation weight in `(0, 1)`.
/// The cross-Gram bound is checked with the constant `max{L, U}` at the
/// union order, the form its submatrix-spectrum argument proves.
///
/// Inequalities are counted as violated only beyond a `1e-10` roundoff
/// allowance; equality cases (e.g. the identity matrix) are legitimate.
pub fn verify_arip_implications(
    a: &DMatrix<f64>,
    k: usize,
    draws: usize,
    seed: u64,
) -> Result<ImplicationReport> {
    let (n, cols) = (a.nrows(), a.ncols());
    if k == 0 || 2 * k > n || 2 * k > cols {
        return Err(Error::Dimension(format!(
            "need 1 <= 2k <= min(n, N); got k = {k}, n = {n}, N = {cols}"
        )));
    }

    let mut constants = vec![(0.0f64, 0.0f64); 2 * k + 1];
    for order in 1..=2 * k {
        let b = exact_arip(a, order)?;
        constants[order] = (b.l, b.u);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size_dist = Uniform::new_inclusive(1, k).map_err(|e| Error::Domain(e.to_string()))?;
    let omega_dist = Uniform::new(0.0f64, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let tol = 1e-10;

    let mut checks = [ImplicationCheck { violations: 0, worst_slack: f64::INFINITY }; 6];
    let record = |slot: usize, lhs: f64, rhs: f64, checks: &mut [ImplicationCheck; 6]| {
        let slack = rhs - lhs;
        if slack < checks[slot].worst_slack {
            checks[slot].worst_slack = slack;
        }
        if lhs > rhs + tol * rhs.abs().max(1.0) {
            checks[slot].violations += 1;
        }
    };

    for _ in 0..draws {
        let i_size = size_dist.sample(&mut rng);
        let j_size = size_dist.sample(&mut rng);
        let union = sample_subset(&mut rng, cols, i_size + j_size);
        let (set_i, set_j) = union.split_at(i_size);

        let gauss = |rng: &mut ChaCha8Rng, len: usize| {
            DVector::<f64>::from_fn(len, |_, _| StandardNormal.sample(rng))
        };
        let u = gauss(&mut rng, i_size);
        let v = gauss(&mut rng, j_size);
        let y = gauss(&mut rng, n);
        let omega = omega_dist.sample(&mut rng);

        let a_i = a.select_columns(set_i.iter());
        let a_j = a.select_columns(set_j.iter());
        let (l_i, u_i) = constants[i_size];
        let (l_ij, u_ij) = constants[i_size + j_size];

        // (1) adjoint contraction
        record(0, (a_i.transpose() * &y).norm(), (1.0 + u_i).sqrt() * y.norm(), &mut checks);

        // (2) Wishart spectrum bracket, both sides
        let gram_u = a_i.transpose() * (&a_i * &u);
        let lhs2 = gram_u.norm();
        record(1, (1.0 - l_i) * u.norm(), lhs2, &mut checks);
        record(1, lhs2, (1.0 + u_i) * u.norm(), &mut checks);

        // (3) pseudoinverse contraction; the bound degenerates to +inf when
        // the order admits singular submatrices.
        let svd = a_i.clone().svd(true, true);
        if let Ok(pinv_y) = svd.solve(&y, 1e-13) {
            let rhs = if l_i < 1.0 { (1.0 - l_i).powf(-0.5) * y.norm() } else { f64::INFINITY };
            record(2, pinv_y.norm(), rhs, &mut checks);
        }

        // (4) disjoint inner product
        record(
            3,
            ((&a_i * &u).transpose() * (&a_j * &v))[(0, 0)].abs(),
            0.5 * (l_ij + u_ij) * u.norm() * v.norm(),
            &mut checks,
        );

        // (5) cross-Gram norm. The constant is max{L, U}: the cross block
        // is a submatrix of the shifted Gram matrix of the union support,
        // whose spectrum sits inside [-U, L]. (The upper constant alone is
        // falsified by draws with a short column, where L > U.)
        record(
            4,
            (a_i.transpose() * (&a_j * &v)).norm(),
            l_ij.max(u_ij) * v.norm(),
            &mut checks,
        );

        // (6) damped Gram contraction
        let damped = &u - omega * &gram_u;
        let bound6 = (omega * (1.0 + u_i) - 1.0).max(1.0 - omega * (1.0 - l_i));
        record(5, damped.norm(), bound6 * u.norm(), &mut checks);
    }

    Ok(ImplicationReport { draws, checks })
}
