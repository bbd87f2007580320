//! Greedy sparse recovery: CoSaMP, Subspace Pursuit, and Iterative Hard
//! Thresholding.
//!
//! All three are support-identification iterations built from two
//! primitives: hard thresholding (keep the `m` largest-magnitude entries)
//! and least squares restricted to a candidate support. They differ in how
//! the candidate support is grown and how coefficients are re-estimated:
//!
//! * CoSaMP merges the previous support with the top `2k` entries of the
//!   correlation `A^T r`, solves least squares on the merged set, prunes to
//!   `k`, and forms the residual with a matrix-vector product.
//! * Subspace Pursuit merges only the top `k` correlations but re-solves
//!   least squares after pruning, so its residual is a true projection.
//! * IHT avoids least squares entirely inside the loop: a gradient step of
//!   size `omega` followed by thresholding (an optional final debias solve
//!   re-fits coefficients on the recovered support).
//!
//! The exact stopping rule "residual equals zero" is unattainable in
//! floating point and never attained with noisy data, so the solvers stop
//! on a small residual threshold, on a stalled residual, or at an
//! iteration cap.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default residual threshold, as a fraction of `||y||`.
const RELATIVE_RESIDUAL_TOL: f64 = 1e-10;
/// Default stall factor: stop once the residual fails to shrink by this.
const DEFAULT_STALL_FACTOR: f64 = 0.999;
/// Default IHT step size when no bounds context supplies a balanced one.
const DEFAULT_OMEGA: f64 = 0.65;
/// Default iteration cap: `100 k`, but never more than this.
const MAX_ITERATION_CEILING: usize = 3000;
/// Relative rank tolerance of the restricted least-squares solve.
const RANK_TOL: f64 = 1e-12;

/// Why a solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Residual norm fell below the tolerance.
    ResidualZero,
    /// Residual stopped improving.
    Stalled,
    /// Iteration cap reached.
    MaxIterations,
}

/// Knobs shared by the three solvers. Options are immutable per run.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryOptions {
    /// Hard cap on the number of iterations (>= 1).
    pub max_iterations: usize,
    /// Absolute threshold on the residual norm; `None` uses
    /// `1e-10 * ||y||`.
    pub residual_tolerance: Option<f64>,
    /// Stop when `||r_l|| > stall_factor * ||r_{l-1}||`; in `(0, 1]`.
    pub stall_factor: f64,
    /// IHT step size, in `(0, 2)`. The balanced step from a bounds context
    /// can exceed 1, so the range is wider than the conventional `(0, 1)`.
    pub omega: f64,
    /// IHT only: re-fit coefficients on the final support by least
    /// squares.
    pub debias: bool,
}

impl RecoveryOptions {
    /// Defaults for sparsity `k`: iteration cap `min(100 k, 3000)`,
    /// relative residual tolerance, stall factor 0.999, `omega = 0.65`,
    /// debias on.
    pub fn for_sparsity(k: usize) -> Self {
        Self {
            max_iterations: (100 * k.max(1)).min(MAX_ITERATION_CEILING),
            residual_tolerance: None,
            stall_factor: DEFAULT_STALL_FACTOR,
            omega: DEFAULT_OMEGA,
            debias: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be >= 1".into()));
        }
        if !(self.stall_factor > 0.0 && self.stall_factor <= 1.0) {
            return Err(Error::Domain(format!(
                "stall_factor = {} outside (0, 1]",
                self.stall_factor
            )));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::Domain(format!("omega = {} outside (0, 2)", self.omega)));
        }
        if let Some(tol) = self.residual_tolerance {
            if !(tol >= 0.0) {
                return Err(Error::Domain(format!("residual_tolerance = {tol} negative")));
            }
        }
        Ok(())
    }
}

/// Output of a greedy solver.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// Length-`N` estimate with at most `k` nonzeros, supported exactly on
    /// `support`.
    pub estimate: DVector<f64>,
    /// Sorted support indices, at most `k` of them.
    pub support: Vec<usize>,
    /// Completed iterations; equals `residual_trace.len()`. For Subspace
    /// Pursuit the initialization (threshold + projection) counts as the
    /// first iteration.
    pub iterations: usize,
    /// Residual norm after each completed iteration.
    pub residual_trace: Vec<f64>,
    pub termination: Termination,
}

/// Indices of the `m` largest-magnitude entries of `v`, ties broken by
/// lowest index; returned sorted ascending.
pub fn hard_threshold_support(v: &DVector<f64>, m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > v.len() {
        return Err(Error::Domain(format!(
            "threshold magnitude {m} outside 1..={}",
            v.len()
        )));
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    let mut keep = order[..m].to_vec();
    keep.sort_unstable();
    Ok(keep)
}

/// Least-squares coefficients of `y` against the columns `support` of `a`
/// (aligned with the order of `support`). The solve is rejected as rank
/// deficient when the smallest singular value of the submatrix falls below
/// `1e-12` times the largest.
pub fn least_squares_on_support(
    a: &DMatrix<f64>,
    support: &[usize],
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    if support.is_empty() {
        return Err(Error::Dimension("empty support".into()));
    }
    if support.len() > a.nrows() {
        return Err(Error::Dimension(format!(
            "support of size {} exceeds row count {}",
            support.len(),
            a.nrows()
        )));
    }
    if y.len() != a.nrows() {
        return Err(Error::Dimension(format!(
            "y has length {} but the matrix has {} rows",
            y.len(),
            a.nrows()
        )));
    }
    let mut seen = vec![false; a.ncols()];
    for &i in support {
        if i >= a.ncols() {
            return Err(Error::Dimension(format!(
                "column index {i} out of range 0..{}",
                a.ncols()
            )));
        }
        if seen[i] {
            return Err(Error::Dimension(format!("duplicate column index {i}")));
        }
        seen[i] = true;
    }

    let sub = a.select_columns(support.iter());
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > RANK_TOL * smax) {
        return Err(Error::RankDeficient(format!(
            "restricted system has sigma_min = {smin:e} <= {RANK_TOL:e} * sigma_max ({smax:e})"
        )));
    }
    svd.solve(y, 0.0).map_err(|e| Error::RankDeficient(e.to_string()))
}

fn scatter(coeffs: &DVector<f64>, support: &[usize], len: usize) -> DVector<f64> {
    let mut out = DVector::zeros(len);
    for (pos, &idx) in support.iter().enumerate() {
        out[idx] = coeffs[pos];
    }
    out
}

fn gather(v: &DVector<f64>, support: &[usize]) -> DVector<f64> {
    DVector::from_iterator(support.len(), support.iter().map(|&i| v[i]))
}

/// Sorted union of the current support with fresh candidate indices,
/// clamped to at most `cap` columns so the restricted least-squares system
/// stays overdetermined. Clamping keeps all previous-support indices and
/// then the candidates in their given (magnitude) order.
fn merge_supports(previous: &[usize], candidates: &[usize], cap: usize) -> Vec<usize> {
    let mut merged = previous.to_vec();
    for &c in candidates {
        if !merged.contains(&c) {
            merged.push(c);
        }
    }
    if merged.len() > cap {
        log::warn!(
            "merged support of {} columns clamped to {} (the restricted solve cannot exceed the row count)",
            merged.len(),
            cap
        );
        merged.truncate(cap);
    }
    merged.sort_unstable();
    merged
}

fn check_shapes(a: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<()> {
    if y.len() != a.nrows() {
        return Err(Error::Dimension(format!(
            "y has length {} but the matrix has {} rows",
            y.len(),
            a.nrows()
        )));
    }
    if k == 0 || k > a.ncols() {
        return Err(Error::Dimension(format!(
            "sparsity {k} outside 1..=N ({})",
            a.ncols()
        )));
    }
    Ok(())
}

/// Candidate-magnitude order (descending, ties by lowest index) without
/// the final ascending sort of [`hard_threshold_support`]; used where the
/// clamping priority matters.
fn top_magnitude_order(v: &DVector<f64>, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    order.truncate(m);
    order
}

/// Iterations the solvers are allowed to go without improving the best
/// residual before the stall stop fires. The residual of all three
/// algorithms is legitimately non-monotone step to step, so "no longer
/// improving" is judged over a window, not a single iteration.
const STALL_PATIENCE: usize = 10;

struct Stopper {
    tol: f64,
    stall_factor: f64,
    max_iterations: usize,
    best: f64,
    since_improvement: usize,
}

impl Stopper {
    fn new(y_norm: f64, opts: &RecoveryOptions) -> Self {
        Self {
            tol: opts.residual_tolerance.unwrap_or(RELATIVE_RESIDUAL_TOL * y_norm),
            stall_factor: opts.stall_factor,
            max_iterations: opts.max_iterations,
            best: f64::INFINITY,
            since_improvement: 0,
        }
    }

    fn check(&mut self, trace: &[f64]) -> Option<Termination> {
        let last = *trace.last().expect("trace has the current residual");
        if last <= self.tol {
            return Some(Termination::ResidualZero);
        }
        // A residual counts as improving only when it beats the best seen
        // so far by the stall factor.
        if last <= self.stall_factor * self.best {
            self.best = last;
            self.since_improvement = 0;
        } else {
            self.best = self.best.min(last);
            self.since_improvement += 1;
            if self.since_improvement >= STALL_PATIENCE {
                return Some(Termination::Stalled);
            }
        }
        if trace.len() >= self.max_iterations {
            return Some(Termination::MaxIterations);
        }
        None
    }
}

fn finish(
    estimate: DVector<f64>,
    support: Vec<usize>,
    trace: Vec<f64>,
    termination: Termination,
) -> RecoveryResult {
    RecoveryResult {
        estimate,
        support,
        iterations: trace.len(),
        residual_trace: trace,
        termination,
    }
}

pub(crate) struct Traced {
    pub result: RecoveryResult,
    /// Estimate after each completed iteration (same indexing as
    /// `residual_trace`); recorded only when requested (the contraction
    /// audits read it).
    #[allow(dead_code)]
    pub estimates: Vec<DVector<f64>>,
}

pub(crate) fn cosamp_traced(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    k: usize,
    opts: &RecoveryOptions,
    record: bool,
) -> Result<Traced> {
    check_shapes(a, y, k)?;
    opts.validate()?;
    let (n, cols) = (a.nrows(), a.ncols());
    if 4 * k > n {
        log::warn!("cosamp: 4k = {} exceeds n = {n}; the guarantees assume 4k <= n", 4 * k);
    }

    let mut stopper = Stopper::new(y.norm(), opts);
    let mut support: Vec<usize> = Vec::new();
    let mut residual = y.clone();
    let mut trace = Vec::new();
    let mut estimates = Vec::new();

    loop {
        // Identify: top 2k correlations, merged with the previous support.
        let correlation = a.transpose() * &residual;
        let candidates = top_magnitude_order(&correlation, (2 * k).min(cols));
        let merged = merge_supports(&support, &candidates, n);

        // Estimate on the merged support against the original data.
        let coeffs = least_squares_on_support(a, &merged, y)?;
        let full = scatter(&coeffs, &merged, cols);

        // Prune to k and form the residual by direct multiplication.
        support = hard_threshold_support(&full, k)?;
        let kept = gather(&full, &support);
        let estimate = scatter(&kept, &support, cols);
        residual = y - a.select_columns(support.iter()) * kept;

        trace.push(residual.norm());
        if record {
            estimates.push(estimate.clone());
        }
        if let Some(termination) = stopper.check(&trace) {
            return Ok(Traced { result: finish(estimate, support, trace, termination), estimates });
        }
    }
}

/// CoSaMP: support recovery with magnitude-`2k` candidate identification
/// and a single least-squares solve per iteration.
pub fn cosamp(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    k: usize,
    opts: &RecoveryOptions,
) -> Result<RecoveryResult> {
    Ok(cosamp_traced(a, y, k, opts, false)?.result)
}

pub(crate) fn subspace_pursuit_traced(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    k: usize,
    opts: &RecoveryOptions,
    record: bool,
) -> Result<Traced> {
    check_shapes(a, y, k)?;
    opts.validate()?;
    let (n, cols) = (a.nrows(), a.ncols());
    if 3 * k > n {
        log::warn!("subspace pursuit: 3k = {} exceeds n = {n}; the guarantees assume 3k <= n", 3 * k);
    }

    let mut stopper = Stopper::new(y.norm(), opts);
    let mut trace = Vec::new();
    let mut estimates = Vec::new();

    // Initialization: threshold the correlations, project out the chosen
    // columns. This counts as the first iteration of the trace.
    let mut support = hard_threshold_support(&(a.transpose() * y), k)?;
    let mut coeffs = least_squares_on_support(a, &support, y)?;
    let mut residual = y - a.select_columns(support.iter()) * &coeffs;
    trace.push(residual.norm());
    if record {
        estimates.push(scatter(&coeffs, &support, cols));
    }
    if let Some(termination) = stopper.check(&trace) {
        let estimate = scatter(&coeffs, &support, cols);
        return Ok(Traced { result: finish(estimate, support, trace, termination), estimates });
    }

    loop {
        // Merge top-k fresh correlations into the support.
        let correlation = a.transpose() * &residual;
        let candidates = top_magnitude_order(&correlation, k.min(cols));
        let merged = merge_supports(&support, &candidates, n);

        // Solve on the merged set, prune to k, and re-project.
        let merged_coeffs = least_squares_on_support(a, &merged, y)?;
        let full = scatter(&merged_coeffs, &merged, cols);
        support = hard_threshold_support(&full, k)?;
        coeffs = least_squares_on_support(a, &support, y)?;
        residual = y - a.select_columns(support.iter()) * &coeffs;

        trace.push(residual.norm());
        if record {
            estimates.push(scatter(&coeffs, &support, cols));
        }
        if let Some(termination) = stopper.check(&trace) {
            let estimate = scatter(&coeffs, &support, cols);
            return Ok(Traced { result: finish(estimate, support, trace, termination), estimates });
        }
    }
}

/// Subspace Pursuit: magnitude-`k` candidate identification with
/// projection residuals. The initialization (threshold + projection)
/// counts as the first iteration in the result.
pub fn subspace_pursuit(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    k: usize,
    opts: &RecoveryOptions,
) -> Result<RecoveryResult> {
    Ok(subspace_pursuit_traced(a, y, k, opts, false)?.result)
}

pub(crate) fn iht_traced(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    k: usize,
    opts: &RecoveryOptions,
    record: bool,
) -> Result<Traced> {
    check_shapes(a, y, k)?;
    opts.validate()?;
    let cols = a.ncols();

    let mut stopper = Stopper::new(y.norm(), opts);
    let mut iterate = DVector::<f64>::zeros(cols);
    let mut support: Vec<usize> = Vec::new();
    let mut residual = y.clone();
    let mut trace = Vec::new();
    let mut estimates = Vec::new();

    loop {
        // Gradient step from the thresholded iterate, then prune.
        let stepped = &iterate + opts.omega * (a.transpose() * &residual);
        support = hard_threshold_support(&stepped, k)?;
        let kept = gather(&stepped, &support);
        iterate = scatter(&kept, &support, cols);
        residual = y - a.select_columns(support.iter()) * kept;

        trace.push(residual.norm());
        if record {
            estimates.push(iterate.clone());
        }
        if let Some(termination) = stopper.check(&trace) {
            let estimate = if opts.debias {
                // Re-fit coefficients on the recovered support; the raw
                // iterate only converges geometrically to them.
                let coeffs = least_squares_on_support(a, &support, y)?;
                scatter(&coeffs, &support, cols)
            } else {
                iterate
            };
            return Ok(Traced { result: finish(estimate, support, trace, termination), estimates });
        }
    }
}

/// Iterative Hard Thresholding: gradient steps of size `opts.omega`
/// followed by top-`k` pruning; no least squares inside the loop. With
/// `opts.debias` the final coefficients are re-fit on the recovered
/// support.
pub fn iht(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    k: usize,
    opts: &RecoveryOptions,
) -> Result<RecoveryResult> {
    Ok(iht_traced(a, y, k, opts, false)?.result)
}
