use nalgebra::{DMatrix, DVector};

/// Scalar or per-coordinate threshold.
#[derive(Clone, Copy, Debug)]
pub enum Lambda<'a> {
    Uniform(f64),
    PerCoord(&'a [f64]),
}

impl Lambda<'_> {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Lambda::Uniform(l) => *l,
            Lambda::PerCoord(v) => v[k],
        }
    }
}

/// Keeps coordinate `k` iff `|w_k| ≥ λ_k`.
pub fn hard_threshold(w: &DVector<f64>, lambda: Lambda<'_>) -> DVector<f64> {
    DVector::from_iterator(
        w.len(),
        w.iter()
            .enumerate()
            .map(|(k, &x)| if x.abs() >= lambda.at(k) { x } else { 0.0 }),
    )
}

/// `½ Σ_{w_k ≠ 0} λ_k²`.
pub fn penalty(w: &DVector<f64>, lambda: Lambda<'_>) -> f64 {
    0.5 * w
        .iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(k, _)| lambda.at(k).powi(2))
        .sum::<f64>()
}

/// `½‖G w − b‖² + ½ Σ_{w_k ≠ 0} λ_k²`.
pub fn objective(g: &DMatrix<f64>, b: &DVector<f64>, w: &DVector<f64>, lambda: Lambda<'_>) -> f64 {
    0.5 * (g * w - b).norm_squared() + penalty(w, lambda)
}

pub fn support_of(w: &DVector<f64>) -> Vec<usize> {
    w.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_examples() {
        let w = DVector::from_vec(vec![0.4, -0.6, 0.0]);
        assert_eq!(
            hard_threshold(&w, Lambda::Uniform(0.5)).as_slice(),
            &[0.0, -0.6, 0.0]
        );
        let w = DVector::from_vec(vec![0.5]);
        assert_eq!(hard_threshold(&w, Lambda::Uniform(0.5)).as_slice(), &[0.5]);
    }

    #[test]
    fn per_coordinate_example() {
        let w = DVector::from_vec(vec![0.5, 0.5]);
        let l = [1.0, 0.1];
        assert_eq!(hard_threshold(&w, Lambda::PerCoord(&l)).as_slice(), &[0.0, 0.5]);
    }

    #[test]
    fn objective_examples() {
        let g = DMatrix::<f64>::identity(2, 2);
        let zero = DVector::zeros(2);
        assert_eq!(objective(&g, &zero, &zero, Lambda::Uniform(0.3)), 0.0);
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let w = DVector::from_vec(vec![1.0, 0.0]);
        assert!((objective(&g, &b, &w, Lambda::Uniform(0.2)) - 0.02).abs() < 1e-15);
        let lv = [0.2, 0.2];
        assert_eq!(
            objective(&g, &b, &w, Lambda::Uniform(0.2)),
            objective(&g, &b, &w, Lambda::PerCoord(&lv))
        );
    }

    #[test]
    fn prox_matches_brute_force() {
        // argmin over v ∈ {0, z} of ½(v − z)² + ½λ² 1[v ≠ 0], ties keep z
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let z: f64 = rng.random_range(-2.0..2.0);
            let lambda: f64 = rng.random_range(0.01..2.0);
            let cost_zero = 0.5 * z * z;
            let cost_keep = 0.5 * lambda * lambda;
            let expect = if cost_keep <= cost_zero { z } else { 0.0 };
            let got = hard_threshold(&DVector::from_vec(vec![z]), Lambda::Uniform(lambda))[0];
            assert_eq!(got, expect, "z={z} λ={lambda}");
        }
    }
}
