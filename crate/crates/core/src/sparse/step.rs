use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sparse::{hard_threshold, Lambda, ScaledSystem};

// 20 iterations leave ~1e-5 error when the top two singular values are close.
pub const POWER_ITERATIONS: usize = 500;
pub const POWER_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StepMode {
    /// `1 / ‖Gᵀ G_S‖₂` by power iteration.
    Exact,
    /// `1 / √(|S| n)`, valid for unit-norm columns.
    #[default]
    Estimate,
}

/// Largest singular value of `a` by power iteration on `aᵀa`.
pub fn spectral_norm(a: &DMatrix<f64>, max_iter: usize, tol: f64) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * (i as f64 + 1.0).sqrt());
    v /= v.norm();
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let av = a * &v;
        let next = a.tr_mul(&av);
        let nn = next.norm();
        if nn == 0.0 {
            return 0.0;
        }
        let est = nn.sqrt();
        v = next / nn;
        if (est - sigma).abs() <= tol * est {
            sigma = est;
            break;
        }
        sigma = est;
    }
    // Rayleigh quotient of aᵀa at the final unit vector
    let rayleigh = (a * &v).norm();
    if rayleigh.is_finite() {
        rayleigh
    } else {
        sigma
    }
}

/// Gradient step size for the support `support` of a system with `g` columns.
pub fn step_size(g: &DMatrix<f64>, support: &[usize], mode: StepMode) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::Degenerate("step size undefined for an empty support".into()));
    }
    match mode {
        StepMode::Estimate => Ok(1.0 / ((support.len() * g.ncols()) as f64).sqrt()),
        StepMode::Exact => {
            let gs = g.select_columns(support);
            let gtg = g.tr_mul(&gs);
            let norm = spectral_norm(&gtg, POWER_ITERATIONS, POWER_TOLERANCE);
            if norm == 0.0 {
                return Err(Error::Degenerate("zero Gram block".into()));
            }
            Ok(1.0 / norm)
        }
    }
}

/// `H_{α λ}( w − α M² Gᵀ (G w − b) )`, pinning excluded columns to zero.
pub fn prox_grad_step(
    w: &DVector<f64>,
    sys: &ScaledSystem,
    alpha: f64,
    thresholds: Lambda<'_>,
) -> Result<DVector<f64>> {
    let r = &sys.g * w - &sys.b;
    let grad = sys.g.tr_mul(&r);
    let m = sys.scale();
    let z = DVector::from_iterator(
        w.len(),
        (0..w.len()).map(|k| w[k] - alpha * m[k] * m[k] * grad[k]),
    );
    if let Some(k) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::Diverged(format!("non-finite gradient step at coordinate {k}")));
    }
    let scaled: Vec<f64> = (0..w.len()).map(|k| alpha * thresholds.at(k)).collect();
    let mut out = hard_threshold(&z, Lambda::PerCoord(&scaled));
    for (k, &x) in sys.excluded().iter().enumerate() {
        if x {
            out[k] = 0.0;
        }
    }
    Ok(out)
}
