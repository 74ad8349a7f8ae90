use nalgebra::{DMatrix, DVector};

use crate::sparse::{objective, Lambda};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegretRecord {
    pub step: u64,
    pub objective: f64,
    pub comparator: f64,
    pub increment: f64,
    pub cumulative: f64,
}

/// Running dynamic regret against the planted coefficients.
#[derive(Clone, Debug, Default)]
pub struct RegretLedger {
    records: Vec<RegretRecord>,
}

impl RegretLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative)
    }

    pub fn records(&self) -> &[RegretRecord] {
        &self.records
    }

    /// `Reg_D(T) / T` after each record, with `T` counted from 1.
    pub fn averages(&self) -> Vec<f64> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| r.cumulative / (i + 1) as f64)
            .collect()
    }

    fn push(&mut self, step: u64, objective: f64, comparator: f64) -> RegretRecord {
        let increment = objective - comparator;
        let rec = RegretRecord {
            step,
            objective,
            comparator,
            increment,
            cumulative: self.total() + increment,
        };
        self.records.push(rec);
        rec
    }
}

/// Appends `F_t(ŵ; λ) − F_t(w★; λ)` and returns the new record.
pub fn regret_step(
    ledger: &mut RegretLedger,
    step: u64,
    g: &DMatrix<f64>,
    b: &DVector<f64>,
    w: &DVector<f64>,
    truth: &DVector<f64>,
    lambda: Lambda<'_>,
) -> RegretRecord {
    let f = objective(g, b, w, lambda);
    let f_star = objective(g, b, truth, lambda);
    ledger.push(step, f, f_star)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_iterates_have_zero_regret() {
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let w = DVector::from_vec(vec![1.0, -2.0]);
        let b = &g * &w;
        let mut ledger = RegretLedger::new();
        for step in 0..10 {
            regret_step(&mut ledger, step, &g, &b, &w, &w, Lambda::Uniform(0.1));
        }
        assert_eq!(ledger.len(), 10);
        assert_eq!(ledger.total(), 0.0);
        assert!(ledger.averages().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn accumulates_increments() {
        let g = DMatrix::<f64>::identity(2, 2);
        let truth = DVector::from_vec(vec![1.0, 0.0]);
        let b = truth.clone();
        let w = DVector::from_vec(vec![0.0, 0.0]);
        let mut ledger = RegretLedger::new();
        // F(0) = ½, F(w★) = ½λ² = 0.005
        let r = regret_step(&mut ledger, 0, &g, &b, &w, &truth, Lambda::Uniform(0.1));
        assert!((r.increment - 0.495).abs() < 1e-15);
        regret_step(&mut ledger, 1, &g, &b, &w, &truth, Lambda::Uniform(0.1));
        assert!((ledger.total() - 0.99).abs() < 1e-15);
        assert!((ledger.averages()[1] - 0.495).abs() < 1e-15);
    }
}
