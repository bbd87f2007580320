//! Shared oracles for the integration suites. Everything here is an
//! independent route: the eigensolver is a hand-rolled Jacobi iteration
//! (the library uses nalgebra's symmetric eigen / SVD), subset
//! enumeration is recursive (the library unranks lexicographically), and
//! the sparse search solves normal equations by Cholesky (the solvers use
//! SVD least squares).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
pub fn jacobi_eigenvalues(sym: &DMatrix<f64>) -> Vec<f64> {
    let n = sym.nrows();
    assert_eq!(n, sym.ncols());
    let mut a = sym.clone();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / a[(p, q)];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = c * api - s * aqi;
                    a[(q, i)] = s * api + c * aqi;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Visit every `k`-subset of `0..n` (recursive; order irrelevant for the
/// extrema it feeds).
pub fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        let remaining = k - cur.len();
        for i in start..=n - remaining {
            cur.push(i);
            rec(n, k, i + 1, cur, visit);
            cur.pop();
        }
    }
    if k == 0 || k > n {
        return;
    }
    rec(n, k, 0, &mut Vec::new(), &mut visit);
}

/// Exhaustive sparse search: the `k`-support least-squares fit of `y`
/// with the smallest residual, solved through normal equations.
pub fn l0_oracle(a: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> DVector<f64> {
    let cols = a.ncols();
    let mut best_residual = f64::INFINITY;
    let mut best = DVector::zeros(cols);
    for_each_subset(cols, k, |subset| {
        let sub = a.select_columns(subset.iter());
        let gram = sub.transpose() * &sub;
        let rhs = sub.transpose() * y;
        if let Some(chol) = gram.cholesky() {
            let coeffs = chol.solve(&rhs);
            let residual = (y - &sub * &coeffs).norm();
            if residual < best_residual {
                best_residual = residual;
                best.fill(0.0);
                for (pos, &i) in subset.iter().enumerate() {
                    best[i] = coeffs[pos];
                }
            }
        }
    });
    best
}

/// The variance-`1/n` Gaussian test ensemble, deterministic per seed.
pub fn gaussian(n: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_row_iterator(
        n,
        cols,
        (0..n * cols).map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g * scale
        }),
    )
}
