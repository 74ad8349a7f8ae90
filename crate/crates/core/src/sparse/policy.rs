use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::sparse::support_of;

/// Sorted indices of nonzero weights.
pub type Support = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdPolicy {
    pub delta: f64,
    pub lambda_max: f64,
    pub lambda0: f64,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            delta: 0.1,
            lambda_max: 0.1,
            lambda0: 1e-4,
        }
    }
}

impl ThresholdPolicy {
    pub fn new(delta: f64, lambda_max: f64, lambda0: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("Δλ must lie in (0, 1), got {delta}")));
        }
        if !(lambda0 > 0.0 && lambda_max > 0.0 && lambda0 <= lambda_max) {
            return Err(Error::Config(format!(
                "need 0 < λ₀ ≤ λ_max, got λ₀ = {lambda0}, λ_max = {lambda_max}"
            )));
        }
        Ok(Self {
            delta,
            lambda_max,
            lambda0,
        })
    }
}

fn strict_subset(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && a.iter().all(|x| b.binary_search(x).is_ok())
}

/// The threshold update map.
///
/// Shrink when the objective rose and terms were dropped; grow toward
/// `λ_max` when the objective rose and terms were added, or when neither the
/// objective rose nor the support changed; otherwise keep `λ_t`.
pub fn update_lambda(
    policy: &ThresholdPolicy,
    lambda: f64,
    f_new: f64,
    f_old: f64,
    s_new: &[usize],
    s_old: &[usize],
) -> f64 {
    let increased = f_new > f_old;
    let shrink = (1.0 - policy.delta) * lambda;
    if increased && strict_subset(s_new, s_old) {
        shrink
    } else if (increased && strict_subset(s_old, s_new)) || (!increased && s_new == s_old) {
        shrink + policy.lambda_max * policy.delta
    } else {
        lambda
    }
}

/// Online estimate and threshold bookkeeping.
#[derive(Clone, Debug)]
pub struct WeightState {
    pub weights: DVector<f64>,
    pub lambda: f64,
    pub support: Support,
    /// `½‖G w − b‖²` of the current weights on the system that produced them.
    pub prev_residual: f64,
    pub step: u64,
}

impl WeightState {
    pub fn new(weights: DVector<f64>, lambda: f64, prev_residual: f64, step: u64) -> Self {
        let support = support_of(&weights);
        Self {
            weights,
            lambda,
            support,
            prev_residual,
            step,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|v| v.is_finite()) && self.lambda.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> ThresholdPolicy {
        ThresholdPolicy::new(0.1, 0.1, 1e-4).unwrap()
    }

    #[test]
    fn branch_examples() {
        let l = update_lambda(&p(), 0.05, 2.0, 1.0, &[0], &[0, 1]);
        assert!((l - 0.045).abs() < 1e-15);
        let l = update_lambda(&p(), 0.05, 1.0, 1.0, &[0, 1], &[0, 1]);
        assert!((l - 0.055).abs() < 1e-15);
        assert_eq!(update_lambda(&p(), 0.05, 2.0, 1.0, &[0, 1], &[0, 1]), 0.05);
        // grown support with a larger objective
        let l = update_lambda(&p(), 0.05, 2.0, 1.0, &[0, 1, 2], &[0, 1]);
        assert!((l - 0.055).abs() < 1e-15);
        // decreased objective with incomparable supports
        assert_eq!(update_lambda(&p(), 0.05, 0.5, 1.0, &[0, 2], &[0, 1]), 0.05);
        // decreased objective with a shrunk support
        assert_eq!(update_lambda(&p(), 0.05, 0.5, 1.0, &[0], &[0, 1]), 0.05);
    }

    #[test]
    fn policy_validation() {
        assert!(ThresholdPolicy::new(0.0, 0.1, 0.01).is_err());
        assert!(ThresholdPolicy::new(0.1, 0.1, 0.2).is_err());
        assert_eq!(ThresholdPolicy::default(), p());
    }

    proptest! {
        #[test]
        fn stays_in_range(
            delta in 0.01f64..0.99,
            lambda_max in 1e-3f64..1.0,
            frac in 1e-3f64..=1.0,
            f_new in -1.0f64..1.0,
            f_old in -1.0f64..1.0,
            a in proptest::collection::btree_set(0usize..6, 0..6),
            b in proptest::collection::btree_set(0usize..6, 0..6),
        ) {
            let pol = ThresholdPolicy::new(delta, lambda_max, lambda_max * frac).unwrap();
            let lambda = pol.lambda0;
            let a: Vec<usize> = a.into_iter().collect();
            let b: Vec<usize> = b.into_iter().collect();
            let out = update_lambda(&pol, lambda, f_new, f_old, &a, &b);
            prop_assert!(out > 0.0);
            prop_assert!(out >= (1.0 - delta) * lambda * (1.0 - 1e-15));
            prop_assert!(out <= lambda_max * (1.0 + 1e-15));
        }
    }
}
