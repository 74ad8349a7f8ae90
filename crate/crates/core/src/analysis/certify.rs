use nalgebra::{DMatrix, DVector};

/// Checks of the fixed-point characterisation at `w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointReport {
    /// `G_Sᵀ (G w − b) = 0` to `1e-10 ‖G‖ ‖b‖`.
    pub is_lsq_on_s: bool,
    /// `max_{i ∉ S} |G_iᵀ (G w − b)|`, 0 for a full support.
    pub dual_max: f64,
    /// `min_{i ∈ S} |w_i|`, infinite for an empty support.
    pub min_active: f64,
    pub satisfies_iii: bool,
}

pub fn certify_fixed_point(
    w: &DVector<f64>,
    g: &DMatrix<f64>,
    b: &DVector<f64>,
    lambda: f64,
) -> FixedPointReport {
    let r = g * w - b;
    let corr = g.tr_mul(&r);
    let tol = 1e-10 * g.norm() * b.norm();
    let mut is_lsq = true;
    let mut dual_max = 0.0f64;
    let mut min_active = f64::INFINITY;
    for (k, &wk) in w.iter().enumerate() {
        if wk != 0.0 {
            is_lsq &= corr[k].abs() <= tol;
            min_active = min_active.min(wk.abs());
        } else {
            dual_max = dual_max.max(corr[k].abs());
        }
    }
    FixedPointReport {
        is_lsq_on_s: is_lsq,
        dual_max,
        min_active,
        satisfies_iii: is_lsq && dual_max < lambda && lambda <= min_active,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{lstsq, prox_grad_step, spectral_norm, Lambda, ScaledSystem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn hand_example() {
        let g = DMatrix::<f64>::identity(2, 2);
        let b = DVector::from_vec(vec![2.0, 0.3]);
        let w = DVector::from_vec(vec![2.0, 0.0]);
        let r = certify_fixed_point(&w, &g, &b, 1.0);
        assert!(r.is_lsq_on_s);
        assert!((r.dual_max - 0.3).abs() < 1e-15);
        assert_eq!(r.min_active, 2.0);
        assert!(r.satisfies_iii);
    }

    #[test]
    fn dense_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = DMatrix::from_fn(12, 4, |_, _| StandardNormal.sample(&mut rng));
        let b = DVector::from_fn(12, |_, _| StandardNormal.sample(&mut rng));
        let w = lstsq(&g, &b);
        let lam = w.amin();
        let r = certify_fixed_point(&w, &g, &b, lam);
        assert_eq!(r.dual_max, 0.0);
        assert!(r.satisfies_iii);
    }

    #[test]
    fn planted_correlated_column_fails() {
        // column 2 sees residual that the restricted fit leaves behind
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0, 0.8]);
        let w = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let r = certify_fixed_point(&w, &g, &b, 0.5);
        assert!(r.is_lsq_on_s);
        assert!((r.dual_max - 0.8).abs() < 1e-15);
        assert!(!r.satisfies_iii);
    }

    // With step α the iteration is the unit-step map on (√α G, √α b), so
    // certification happens on the rescaled system.
    #[test]
    fn certified_points_are_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..100 {
            let g = DMatrix::from_fn(10, 6, |_, _| StandardNormal.sample(&mut rng));
            let b = DVector::from_fn(10, |_, _| StandardNormal.sample(&mut rng));
            let alpha = 0.9 / spectral_norm(&g.tr_mul(&g), 500, 1e-12);
            let (ga, ba) = (&g * alpha.sqrt(), &b * alpha.sqrt());
            let s = [0usize, 2, 3];
            let ws = lstsq(&g.select_columns(&s), &b);
            let mut w = DVector::zeros(6);
            for (i, &k) in s.iter().enumerate() {
                w[k] = ws[i];
            }
            let rep = certify_fixed_point(&w, &ga, &ba, 0.0);
            let lam = 0.5 * (rep.dual_max + rep.min_active);
            if !(rep.dual_max < lam && lam <= rep.min_active) {
                continue;
            }
            assert!(certify_fixed_point(&w, &ga, &ba, lam).satisfies_iii);
            let sys = ScaledSystem::unscaled(g, b);
            let out = prox_grad_step(&w, &sys, alpha, Lambda::Uniform(lam / alpha)).unwrap();
            assert!((out - &w).amax() < 1e-12);
            checked += 1;
        }
        assert!(checked > 10);
    }
}
