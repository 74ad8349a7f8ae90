use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::{RingBuffer, Stamped};
use crate::weakform::{AxisTestFunction, FeatureLibrary, PsiSlice};

/// `b ≈ G w` at one query time.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub g: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Step index of the query time (centre of the buffered window).
    pub step: u64,
}

impl LinearSystem {
    pub fn rows(&self) -> usize {
        self.g.nrows()
    }

    pub fn cols(&self) -> usize {
        self.g.ncols()
    }

    pub fn residual(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.g * w - &self.b
    }

    /// `‖G w − b‖ / ‖b‖`.
    pub fn relative_residual(&self, w: &DVector<f64>) -> f64 {
        self.residual(w).norm() / self.b.norm()
    }

    pub fn len_dp(&self) -> usize {
        self.g.len() + self.b.len()
    }
}

/// Time-integration weights against the temporal test function: one vector per
/// library operator plus one for the left-hand side.
#[derive(Clone, Debug)]
pub struct TemporalKernels {
    dt: f64,
    k_mem: usize,
    per_operator: Vec<Vec<f64>>,
    /// Operator slot of each library column.
    column_operator: Vec<usize>,
    lhs: Vec<f64>,
}

impl TemporalKernels {
    pub fn new(tf_time: &AxisTestFunction, library: &FeatureLibrary) -> Result<Self> {
        let k_mem = tf_time.support_len();
        let lhs_order = library.lhs().order();
        if tf_time.max_order() < lhs_order {
            return Err(Error::InvalidTestFunction(format!(
                "temporal kernel has derivatives up to {} but the left-hand side needs {lhs_order}",
                tf_time.max_order()
            )));
        }
        let d = library.dim();
        let mut ops: Vec<(Option<(usize, u32)>, u32)> = vec![(None, 0)];
        for axis in 0..d {
            for order in 1..=crate::weakform::library::MAX_DERIVATIVE {
                ops.push((Some((axis, order)), 0));
            }
        }
        let mut column_operator = Vec::with_capacity(library.len());
        for f in library.features() {
            let key = (f.derivative(), f.op.temporal());
            let slot = match ops.iter().position(|o| *o == key) {
                Some(s) => s,
                None => {
                    ops.push(key);
                    ops.len() - 1
                }
            };
            column_operator.push(slot);
        }
        let weights = |order: u32| -> Result<Vec<f64>> {
            if order > tf_time.max_order() {
                return Err(Error::InvalidTestFunction(format!(
                    "temporal derivative order {order} not sampled"
                )));
            }
            // slot s (0 = oldest) sits at offset (K-1)/2 - s steps before the centre
            let k = tf_time.derivative(order);
            Ok((0..k_mem).map(|s| tf_time.spacing() * k[k_mem - 1 - s]).collect())
        };
        let per_operator = ops.iter().map(|(_, t)| weights(*t)).collect::<Result<Vec<_>>>()?;
        let lhs = weights(lhs_order)?;
        Ok(Self {
            dt: tf_time.spacing(),
            k_mem,
            per_operator,
            column_operator,
            lhs,
        })
    }

    pub fn k_mem(&self) -> usize {
        self.k_mem
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of cached weight vectors (operators + left-hand side).
    pub fn cached_vector_count(&self) -> usize {
        self.per_operator.len() + 1
    }

    pub fn lhs_weights(&self) -> &[f64] {
        &self.lhs
    }

    pub fn column_weights(&self, col: usize) -> &[f64] {
        &self.per_operator[self.column_operator[col]]
    }

    /// Integrates the buffered slices in time.
    pub fn assemble(&self, buffer: &RingBuffer<PsiSlice>) -> Result<LinearSystem> {
        if buffer.len() < self.k_mem {
            return Err(Error::NotReady {
                have: buffer.len(),
                need: self.k_mem,
            });
        }
        if buffer.len() > self.k_mem {
            return Err(Error::Dimension(format!(
                "buffer holds {} slices but the temporal kernel spans {}",
                buffer.len(),
                self.k_mem
            )));
        }
        let first = buffer.oldest().unwrap();
        let rows = first.rows();
        let n = self.column_operator.len();
        let mut g = DMatrix::<f64>::zeros(rows, n);
        let mut b = DVector::<f64>::zeros(rows);
        for (s, slice) in buffer.iter().enumerate() {
            if slice.rows() != rows || slice.cols() < n {
                return Err(Error::Dimension("inconsistent slice shapes in buffer".into()));
            }
            for c in 0..n {
                let w = self.column_weights(c)[s];
                if w == 0.0 {
                    continue;
                }
                let dst = g.column_mut(c);
                for (d, v) in dst.into_iter().zip(slice.column(c)) {
                    *d += w * v;
                }
            }
            let w = self.lhs[s];
            if w != 0.0 {
                for (d, v) in b.iter_mut().zip(slice.lhs()) {
                    *d += w * v;
                }
            }
        }
        let newest = buffer.newest().unwrap();
        let step = newest.step() - (self.k_mem as u64 - 1) / 2;
        Ok(LinearSystem { g, b, step })
    }
}

/// Assembles `(G, b)` from a full buffer of slices.
pub fn assemble_system(
    buffer: &RingBuffer<PsiSlice>,
    tf_time: &AxisTestFunction,
    library: &FeatureLibrary,
) -> Result<LinearSystem> {
    TemporalKernels::new(tf_time, library)?.assemble(buffer)
}
