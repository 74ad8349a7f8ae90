use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sparse::{lstsq, restricted_lstsq};

/// Result of the sequential thresholding loop at one threshold.
#[derive(Clone, Debug)]
pub struct Mstls {
    pub weights: DVector<f64>,
    pub iterations: usize,
    /// The admissible band emptied and the zero vector was returned.
    pub emptied: bool,
}

/// Lower and upper magnitude bounds `(L_k, U_k)` for each column.
pub fn mstls_bounds(g: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Vec<(f64, f64)> {
    let bn = b.norm();
    g.column_iter()
        .map(|c| {
            let gn = c.norm();
            if gn == 0.0 {
                return (f64::INFINITY, 0.0);
            }
            let ratio = bn / gn;
            (lambda * ratio.max(1.0), ratio.min(1.0) / lambda)
        })
        .collect()
}

/// Sequential thresholded least squares with dominant-balance bounds.
pub fn mstls(g: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Mstls {
    let mut w = lstsq(g, b);
    if lambda <= 0.0 {
        return Mstls {
            weights: w,
            iterations: 0,
            emptied: false,
        };
    }
    let bounds = mstls_bounds(g, b, lambda);
    let n = g.ncols();
    let mut prev: Option<Vec<usize>> = None;
    let mut iterations = 0;
    for _ in 0..n {
        let band: Vec<usize> = (0..n)
            .filter(|&k| {
                let (lo, hi) = bounds[k];
                let a = w[k].abs();
                lo <= a && a <= hi
            })
            .collect();
        if band.is_empty() {
            return Mstls {
                weights: DVector::zeros(n),
                iterations,
                emptied: true,
            };
        }
        if prev.as_ref() == Some(&band) {
            break;
        }
        w = restricted_lstsq(g, b, &band);
        iterations += 1;
        prev = Some(band);
    }
    Mstls {
        weights: w,
        iterations,
        emptied: false,
    }
}

/// 50 logarithmically spaced thresholds on `[1e-4, 1]`.
pub fn default_lambda_grid() -> Vec<f64> {
    let n = 50;
    (0..n)
        .map(|i| 10f64.powf(-4.0 + 4.0 * i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Clone, Debug)]
pub struct GridSearch {
    pub lambda: f64,
    pub weights: DVector<f64>,
    /// `ℒ(λ)` for every grid point.
    pub losses: Vec<f64>,
}

/// Picks the smallest threshold minimising
/// `‖G(w(λ) − w(0))‖ / ‖G w(0)‖ + ‖w(λ)‖₀ / n`.
pub fn mstls_grid_search(g: &DMatrix<f64>, b: &DVector<f64>, grid: &[f64]) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::Config("empty λ grid".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("λ grid must be sorted ascending".into()));
    }
    let w0 = lstsq(g, b);
    let fit0 = g * &w0;
    let denom = fit0.norm();
    if denom == 0.0 {
        return Err(Error::Degenerate("least-squares fit is identically zero".into()));
    }
    let n = g.ncols() as f64;
    let mut best: Option<(usize, f64, DVector<f64>)> = None;
    let mut losses = Vec::with_capacity(grid.len());
    for (i, &lambda) in grid.iter().enumerate() {
        let w = mstls(g, b, lambda).weights;
        let nnz = w.iter().filter(|&&x| x != 0.0).count() as f64;
        let loss = (g * &w - &fit0).norm() / denom + nnz / n;
        losses.push(loss);
        if best.as_ref().is_none_or(|(_, l, _)| loss < *l) {
            best = Some((i, loss, w));
        }
    }
    let (i, _, weights) = best.unwrap();
    Ok(GridSearch {
        lambda: grid[i],
        weights,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn bounds_example() {
        // ‖b‖ = 4, ‖G_k‖ = 2
        let g = DMatrix::from_column_slice(2, 1, &[2.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 4.0]);
        let (lo, hi) = mstls_bounds(&g, &b, 0.1)[0];
        assert!((lo - 0.2).abs() < 1e-15);
        assert!((hi - 10.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_threshold_is_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = DMatrix::from_fn(15, 4, |_, _| StandardNormal.sample(&mut rng));
        let b = DVector::from_fn(15, |_, _| StandardNormal.sample(&mut rng));
        let ls = lstsq(&g, &b);
        assert!((mstls(&g, &b, 0.0).weights - &ls).amax() < 1e-14);
        assert!((mstls(&g, &b, 1e-12).weights - &ls).amax() < 1e-12);
    }

    #[test]
    fn empty_band_returns_zero() {
        let g = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![0.01, 0.01, 0.01]);
        let r = mstls(&g, &b, 0.9);
        assert!(r.emptied);
        assert_eq!(r.weights, DVector::zeros(3));
    }

    #[test]
    fn grid_search_errors_and_single_point() {
        let g = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            mstls_grid_search(&g, &DVector::zeros(3), &[0.1]),
            Err(Error::Degenerate(_))
        ));
        assert!(mstls_grid_search(&g, &DVector::zeros(3), &[]).is_err());
        let b = DVector::from_vec(vec![1.0, 0.5, 0.001]);
        let r = mstls_grid_search(&g, &b, &[0.1]).unwrap();
        assert_eq!(r.lambda, 0.1);
        assert_eq!(r.weights, mstls(&g, &b, 0.1).weights);
        assert!(mstls_grid_search(&g, &b, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn grid_is_log_spaced() {
        let grid = default_lambda_grid();
        assert_eq!(grid.len(), 50);
        assert!((grid[0] - 1e-4).abs() < 1e-18);
        assert!((grid[49] - 1.0).abs() < 1e-12);
        let r = grid[1] / grid[0];
        assert!(grid.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-9));
    }
}
