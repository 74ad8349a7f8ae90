//! Spatially integrated feature slices.
//!
//! Every library column is a separable convolution `(∏ₖ d^{βₖ}φₖ) * u^j`
//! evaluated at the query points, scaled by `Δx^d`. Passes run one axis at a
//! time and keep only the query indices along that axis, so later passes
//! work on progressively smaller arrays.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::{Field, SpatialGrid, Stamped};
use crate::weakform::{AxisTestFunction, FeatureLibrary, QueryGrid};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConvolutionMethod {
    /// Sliding dot products over the kernel support.
    #[default]
    Direct,
    /// Per-line FFT linear convolution against cached kernel transforms.
    Fft,
}

/// Feature values of one snapshot at every query point.
///
/// Column-major `rows × cols`; `lhs_column` holds `φ * u`, which is the
/// library's identity-`u¹` column when the library contains it.
#[derive(Clone, Debug)]
pub struct PsiSlice {
    step: u64,
    rows: usize,
    cols: usize,
    lhs_column: usize,
    data: Vec<f64>,
}

impl PsiSlice {
    pub fn new(step: u64, rows: usize, cols: usize, lhs_column: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols || lhs_column >= cols {
            return Err(Error::Dimension(format!(
                "slice data {} does not match {rows}x{cols} (lhs column {lhs_column})",
                data.len()
            )));
        }
        Ok(Self {
            step,
            rows,
            cols,
            lhs_column,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lhs_column(&self) -> usize {
        self.lhs_column
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn lhs(&self) -> &[f64] {
        self.column(self.lhs_column)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Stored doubles.
    pub fn len_dp(&self) -> usize {
        self.data.len()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Stamped for PsiSlice {
    fn step(&self) -> u64 {
        self.step
    }
}

/// Row-major 3-axis array used between passes.
struct Block {
    shape: [usize; 3],
    data: Vec<f64>,
}

/// Frozen spatial kernels for one grid, library and query set.
pub struct SpatialKernels {
    grid: SpatialGrid,
    library: FeatureLibrary,
    tfs: Vec<AxisTestFunction>,
    query: QueryGrid,
    method: ConvolutionMethod,
    /// Per power: which (axis, order) passes are needed and the columns they fill.
    plan: Vec<PowerPlan>,
    lhs_column: usize,
    cols: usize,
    fft: Option<FftBank>,
}

struct PowerPlan {
    power: u32,
    /// Per axis: orders to apply along that axis after smoothing the others,
    /// with the destination column for each.
    branches: Vec<(usize, Vec<(u32, usize)>)>,
}

impl SpatialKernels {
    pub fn new(
        grid: &SpatialGrid,
        library: &FeatureLibrary,
        tfs: &[AxisTestFunction],
        query: &QueryGrid,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        let d = grid.dim();
        if library.dim() != d || tfs.len() != d || query.dim() != d {
            return Err(Error::Dimension(format!(
                "grid d={d}, library d={}, {} test functions, query d={}",
                library.dim(),
                tfs.len(),
                query.dim()
            )));
        }
        for (a, tf) in tfs.iter().enumerate() {
            if (tf.spacing() - grid.dx()).abs() > 1e-12 * grid.dx() {
                return Err(Error::InvalidTestFunction(format!(
                    "axis {a} test function spacing {} differs from grid spacing {}",
                    tf.spacing(),
                    grid.dx()
                )));
            }
        }
        let half_widths: Vec<usize> = tfs.iter().map(|t| t.half_width()).collect();
        query.check_fits(&half_widths)?;

        let n = library.len();
        let lhs_existing = library.column(0, 0, 1);
        let (lhs_column, cols) = match lhs_existing {
            Some(c) => (c, n),
            None => (n, n + 1),
        };

        let mut powers: Vec<u32> = library.features().iter().map(|f| f.power).collect();
        if lhs_existing.is_none() {
            powers.push(1);
        }
        powers.sort_unstable();
        powers.dedup();
        let mut plan = Vec::new();
        for &power in &powers {
            let mut branches: Vec<(usize, Vec<(u32, usize)>)> = (0..d).map(|a| (a, Vec::new())).collect();
            for (c, f) in library.features().iter().enumerate() {
                if f.power != power {
                    continue;
                }
                let (axis, order) = f.derivative().unwrap_or((0, 0));
                if order > tfs[axis].max_order() {
                    return Err(Error::InvalidTestFunction(format!(
                        "feature {f} needs derivative order {order} but axis {axis} kernel stops at {}",
                        tfs[axis].max_order()
                    )));
                }
                branches[axis].1.push((order, c));
            }
            if power == 1 && lhs_existing.is_none() {
                branches[0].1.push((0, n));
            }
            branches.retain(|(_, ops)| !ops.is_empty());
            plan.push(PowerPlan { power, branches });
        }

        let fft = match method {
            ConvolutionMethod::Direct => None,
            ConvolutionMethod::Fft => Some(FftBank::new(grid, tfs)),
        };

        Ok(Self {
            grid: grid.clone(),
            library: library.clone(),
            tfs: tfs.to_vec(),
            query: query.clone(),
            method,
            plan,
            lhs_column,
            cols,
            fft,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn library(&self) -> &FeatureLibrary {
        &self.library
    }

    pub fn query(&self) -> &QueryGrid {
        &self.query
    }

    pub fn test_functions(&self) -> &[AxisTestFunction] {
        &self.tfs
    }

    pub fn method(&self) -> ConvolutionMethod {
        self.method
    }

    /// Number of cached spatial kernel sample vectors (all axes, all orders).
    pub fn cached_kernel_count(&self) -> usize {
        self.tfs.iter().map(|t| t.max_order() as usize + 1).sum()
    }

    /// Number of cached kernel transforms (FFT path only).
    pub fn cached_transform_count(&self) -> usize {
        self.fft.as_ref().map_or(0, |f| f.transforms.len())
    }

    pub fn columns(&self) -> usize {
        self.cols
    }

    /// Computes the feature slice of one snapshot.
    pub fn features(&self, field: &Field) -> Result<PsiSlice> {
        if field.grid().shape() != self.grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.grid.shape().to_vec(),
                got: field.grid().shape().to_vec(),
            });
        }
        let rows = self.query.len();
        let d = self.grid.dim();
        let scale = self.grid.dx().powi(d as i32);
        let shape = self.grid.shape3();
        let u = field.values();

        let per_power: Vec<Vec<(usize, Vec<f64>)>> = self
            .plan
            .par_iter()
            .map(|pp| {
                let values: Vec<f64> = match pp.power {
                    0 => vec![1.0; u.len()],
                    1 => u.to_vec(),
                    p => u.iter().map(|v| v.powi(p as i32)).collect(),
                };
                let base = Block { shape, data: values };
                let mut out = Vec::new();
                for (axis, ops) in &pp.branches {
                    let mut smoothed = None;
                    for other in (0..d).filter(|b| b != axis) {
                        let src = smoothed.as_ref().unwrap_or(&base);
                        let mut r = self.pass(src, other, &[0]);
                        smoothed = Some(r.pop().unwrap());
                    }
                    let src = smoothed.as_ref().unwrap_or(&base);
                    let orders: Vec<u32> = ops.iter().map(|(o, _)| *o).collect();
                    let results = self.pass(src, *axis, &orders);
                    for ((_, col), blk) in ops.iter().zip(results) {
                        debug_assert_eq!(blk.data.len(), rows);
                        out.push((*col, blk.data));
                    }
                }
                out
            })
            .collect();

        let mut data = vec![0.0; rows * self.cols];
        for (col, vals) in per_power.into_iter().flatten() {
            let dst = &mut data[col * rows..(col + 1) * rows];
            for (o, v) in dst.iter_mut().zip(vals) {
                *o = v * scale;
            }
        }
        PsiSlice::new(field.step(), rows, self.cols, self.lhs_column, data)
    }

    fn pass(&self, src: &Block, axis: usize, orders: &[u32]) -> Vec<Block> {
        let centers = self.query.centers(axis);
        let tf = &self.tfs[axis];
        match &self.fft {
            None => orders
                .iter()
                .map(|&o| conv_axis_direct(src, axis, tf.derivative(o), centers))
                .collect(),
            Some(bank) => bank.conv_axis(src, axis, tf.half_width(), orders, centers),
        }
    }
}

/// `out[…, q, …] = Σ_t K[t] · in[…, c_q + m - t, …]` along `axis`.
fn conv_axis_direct(src: &Block, axis: usize, kernel: &[f64], centers: &[usize]) -> Block {
    let [outer, n, inner] = split_shape(src.shape, axis);
    let m = kernel.len() / 2;
    let q = centers.len();
    let mut out = vec![0.0; outer * q * inner];
    if inner == 1 {
        for o in 0..outer {
            let line = &src.data[o * n..(o + 1) * n];
            for (qi, &c) in centers.iter().enumerate() {
                let window = &line[c - m..=c + m];
                let mut acc = 0.0;
                for (k, x) in kernel.iter().zip(window.iter().rev()) {
                    acc += k * x;
                }
                out[o * q + qi] = acc;
            }
        }
    } else {
        for o in 0..outer {
            for (qi, &c) in centers.iter().enumerate() {
                let dst = &mut out[(o * q + qi) * inner..(o * q + qi + 1) * inner];
                for (t, &k) in kernel.iter().enumerate() {
                    if k == 0.0 {
                        continue;
                    }
                    let i = c + m - t;
                    let row = &src.data[(o * n + i) * inner..(o * n + i + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(row) {
                        *d += k * s;
                    }
                }
            }
        }
    }
    let mut shape = src.shape;
    shape[axis] = q;
    Block { shape, data: out }
}

fn split_shape(shape: [usize; 3], axis: usize) -> [usize; 3] {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    [outer, shape[axis], inner]
}

/// Forward/inverse plans and kernel transforms per axis, sized for linear
/// (non-wrapping) convolution of a full grid line.
struct FftBank {
    lens: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    transforms: HashMap<(usize, u32), Vec<Complex64>>,
}

impl FftBank {
    fn new(grid: &SpatialGrid, tfs: &[AxisTestFunction]) -> Self {
        let mut planner = FftPlanner::new();
        let mut lens = Vec::new();
        let mut forward = Vec::new();
        let mut inverse = Vec::new();
        let mut transforms = HashMap::new();
        for (axis, tf) in tfs.iter().enumerate() {
            let len = grid.shape()[axis] + 2 * tf.half_width();
            let f = planner.plan_fft_forward(len);
            let inv = planner.plan_fft_inverse(len);
            for order in 0..=tf.max_order() {
                let mut buf = vec![Complex64::new(0.0, 0.0); len];
                for (b, &k) in buf.iter_mut().zip(tf.derivative(order)) {
                    *b = Complex64::new(k, 0.0);
                }
                f.process(&mut buf);
                transforms.insert((axis, order), buf);
            }
            lens.push(len);
            forward.push(f);
            inverse.push(inv);
        }
        Self {
            lens,
            forward,
            inverse,
            transforms,
        }
    }

    fn conv_axis(&self, src: &Block, axis: usize, m: usize, orders: &[u32], centers: &[usize]) -> Vec<Block> {
        let [outer, n, inner] = split_shape(src.shape, axis);
        let len = self.lens[axis];
        let q = centers.len();
        let norm = 1.0 / len as f64;
        let mut outs: Vec<Vec<f64>> = vec![vec![0.0; outer * q * inner]; orders.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let mut work = vec![Complex64::new(0.0, 0.0); len];
        for o in 0..outer {
            for r in 0..inner {
                for (i, l) in line.iter_mut().enumerate() {
                    *l = if i < n {
                        Complex64::new(src.data[(o * n + i) * inner + r], 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                }
                self.forward[axis].process(&mut line);
                for (oi, &order) in orders.iter().enumerate() {
                    let kt = &self.transforms[&(axis, order)];
                    for ((w, l), k) in work.iter_mut().zip(&line).zip(kt) {
                        *w = l * k;
                    }
                    self.inverse[axis].process(&mut work);
                    let dst = &mut outs[oi];
                    for (qi, &c) in centers.iter().enumerate() {
                        dst[(o * q + qi) * inner + r] = work[c + m].re * norm;
                    }
                }
            }
        }
        let mut shape = src.shape;
        shape[axis] = q;
        outs.into_iter().map(|data| Block { shape, data }).collect()
    }
}

/// One-off featurization with freshly built kernels.
pub fn spatial_features(
    snapshot: &Field,
    library: &FeatureLibrary,
    tfs: &[AxisTestFunction],
    query: &QueryGrid,
) -> Result<PsiSlice> {
    SpatialKernels::new(snapshot.grid(), library, tfs, query, ConvolutionMethod::Direct)?.features(snapshot)
}
