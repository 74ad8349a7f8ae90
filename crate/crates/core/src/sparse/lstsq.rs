use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

thread_local! {
    static CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Least-squares solves performed on the current thread.
pub fn lstsq_calls() -> u64 {
    CALLS.with(Cell::get)
}

/// Minimum-norm least squares via the SVD. Singular values at or below
/// `ε · max(rows, cols) · σ_max` are treated as zero.
pub fn lstsq(g: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    CALLS.with(|c| c.set(c.get() + 1));
    let n = g.ncols();
    if g.nrows() == 0 || n == 0 {
        return DVector::zeros(n);
    }
    let svd = g.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return DVector::zeros(n);
    }
    let tol = f64::EPSILON * g.nrows().max(n) as f64 * smax;
    svd.solve(b, tol).unwrap_or_else(|_| DVector::zeros(n))
}

/// Least squares over the columns in `support`, zero elsewhere.
pub fn restricted_lstsq(g: &DMatrix<f64>, b: &DVector<f64>, support: &[usize]) -> DVector<f64> {
    let mut w = DVector::zeros(g.ncols());
    if support.is_empty() {
        return w;
    }
    let sub = g.select_columns(support);
    let ws = lstsq(&sub, b);
    for (&k, v) in support.iter().zip(ws.iter()) {
        w[k] = *v;
    }
    w
}

/// The one least-squares solve of a streaming run.
pub fn initial_guess(g: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    lstsq(g, b)
}
