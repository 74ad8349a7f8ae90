use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::sparse::support_of;

/// True positivity ratio `TP / (TP + FP + FN)`; 1 when both supports are empty.
pub fn tpr(w: &DVector<f64>, truth: &DVector<f64>) -> f64 {
    assert_eq!(w.len(), truth.len(), "tpr: length mismatch");
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (a, b) in w.iter().zip(truth.iter()) {
        match (*a != 0.0, *b != 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    let denom = tp + fp + fn_;
    if denom == 0 {
        1.0
    } else {
        tp as f64 / denom as f64
    }
}

/// `‖ŵ − w★‖ / ‖w★‖`.
pub fn e2(w: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if w.len() != truth.len() {
        return Err(Error::ShapeMismatch {
            expected: vec![truth.len()],
            got: vec![w.len()],
        });
    }
    let n = truth.norm();
    if n == 0.0 {
        return Err(Error::UndefinedMetric("E₂ with zero true weights".into()));
    }
    Ok((w - truth).norm() / n)
}

/// Library-ordered true coefficients as a function of time.
#[derive(Clone)]
pub struct TruthTrack {
    len: usize,
    f: Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>,
}

impl TruthTrack {
    pub fn new(len: usize, f: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        Self { len, f: Arc::new(f) }
    }

    pub fn constant(w: DVector<f64>) -> Self {
        Self::new(w.len(), move |_| w.clone())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn at(&self, t: f64) -> DVector<f64> {
        let w = (self.f)(t);
        debug_assert_eq!(w.len(), self.len);
        debug_assert!(w.iter().any(|&x| x != 0.0), "true support empty at t = {t}");
        w
    }

    pub fn support_at(&self, t: f64) -> Vec<usize> {
        support_of(&self.at(t))
    }
}

impl fmt::Debug for TruthTrack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruthTrack").field("len", &self.len).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn tpr_examples() {
        // TP = 3, FP = 1, FN = 0
        let truth = v(&[1.0, 1.0, 1.0, 0.0, 0.0]);
        let w = v(&[0.9, 1.1, 2.0, 0.3, 0.0]);
        assert_eq!(tpr(&w, &truth), 0.75);
        assert_eq!(tpr(&truth, &truth), 1.0);
        assert_eq!(tpr(&v(&[1.0, 1.0, 0.0, 0.0, 0.0]), &v(&[0.0, 0.0, 1.0, 1.0, 1.0])), 0.0);
        assert_eq!(tpr(&v(&[0.0, 0.0]), &v(&[0.0, 0.0])), 1.0);
    }

    #[test]
    fn e2_examples() {
        let truth = v(&[-1.0, 0.0, 2.0]);
        assert_eq!(e2(&truth, &truth).unwrap(), 0.0);
        assert!((e2(&(2.0 * &truth), &truth).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(e2(&DVector::zeros(3), &truth).unwrap(), 1.0);
        assert!(matches!(
            e2(&truth, &DVector::zeros(3)),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn truth_track_support() {
        let track = TruthTrack::new(3, |t| v(&[t, 0.0, -1.0]));
        assert_eq!(track.support_at(2.0), vec![0, 2]);
        assert_eq!(track.support_at(0.0), vec![2]);
        assert_eq!(track.len(), 3);
    }

    proptest! {
        #[test]
        fn permutation_invariance(
            pairs in proptest::collection::vec((-2i32..3, -2i32..3), 1..12),
            seed in any::<u64>(),
        ) {
            let w = DVector::from_iterator(pairs.len(), pairs.iter().map(|p| p.0 as f64));
            let mut t = DVector::from_iterator(pairs.len(), pairs.iter().map(|p| p.1 as f64));
            if t.iter().all(|&x| x == 0.0) {
                t[0] = 1.0;
            }
            let n = w.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let wp = DVector::from_iterator(n, perm.iter().map(|&i| w[i]));
            let tp = DVector::from_iterator(n, perm.iter().map(|&i| t[i]));
            prop_assert_eq!(tpr(&w, &t), tpr(&wp, &tp));
            prop_assert!((e2(&w, &t).unwrap() - e2(&wp, &tp).unwrap()).abs() < 1e-12);
        }
    }
}
