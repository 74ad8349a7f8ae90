use nalgebra::{DMatrix, DVector};

/// `(G, b)` with the diagonal column scaling `M_kk = 1/‖G_k‖`.
///
/// Numerically zero columns get `M_kk = 0` and are pinned to zero weight.
#[derive(Clone, Debug)]
pub struct ScaledSystem {
    pub g: DMatrix<f64>,
    pub b: DVector<f64>,
    scale: DVector<f64>,
    excluded: Vec<bool>,
    b_norm: f64,
}

/// Columns with norm below this fraction of the largest norm count as zero.
const ZERO_COLUMN_RTOL: f64 = 1e-14;

impl ScaledSystem {
    pub fn new(g: DMatrix<f64>, b: DVector<f64>) -> Self {
        let norms: Vec<f64> = g.column_iter().map(|c| c.norm()).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let excluded: Vec<bool> = norms
            .iter()
            .map(|&n| !(n > ZERO_COLUMN_RTOL * max && n.is_finite()))
            .collect();
        let scale = DVector::from_iterator(
            norms.len(),
            norms.iter().zip(&excluded).map(|(&n, &x)| if x { 0.0 } else { 1.0 / n }),
        );
        let b_norm = b.norm();
        Self {
            g,
            b,
            scale,
            excluded,
            b_norm,
        }
    }

    /// No scaling: `M = I`.
    pub fn unscaled(g: DMatrix<f64>, b: DVector<f64>) -> Self {
        let n = g.ncols();
        let b_norm = b.norm();
        Self {
            g,
            b,
            scale: DVector::from_element(n, 1.0),
            excluded: vec![false; n],
            b_norm,
        }
    }

    pub fn cols(&self) -> usize {
        self.g.ncols()
    }

    /// Diagonal of `M`.
    pub fn scale(&self) -> &DVector<f64> {
        &self.scale
    }

    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    /// `G̃ = G M`.
    pub fn scaled_matrix(&self) -> DMatrix<f64> {
        let mut gs = self.g.clone();
        for (mut c, &s) in gs.column_iter_mut().zip(self.scale.iter()) {
            c *= s;
        }
        gs
    }

    /// Dominant-balance thresholds `λ_k = λ · max(1, ‖b‖ M_kk)`.
    pub fn thresholds(&self, lambda: f64) -> Vec<f64> {
        self.scale
            .iter()
            .map(|&m| lambda * (self.b_norm * m).max(1.0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_columns_and_thresholds() {
        let g = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 4.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let s = ScaledSystem::new(g, b);
        let gs = s.scaled_matrix();
        assert!((gs.column(0).norm() - 1.0).abs() < 1e-15);
        assert!((gs.column(1).norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.excluded(), &[false, false, true]);
        assert_eq!(s.scale()[2], 0.0);
        let t = s.thresholds(0.1);
        // ‖b‖ = 2: column 0 has norm 5 → max(1, 0.4) = 1; column 1 norm 0.5 → 4
        assert!((t[0] - 0.1).abs() < 1e-15);
        assert!((t[1] - 0.4).abs() < 1e-15);
        assert!((t[2] - 0.1).abs() < 1e-15);
    }
}
