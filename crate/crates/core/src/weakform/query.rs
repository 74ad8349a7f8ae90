use crate::error::{Error, Result};
use crate::tensor::SpatialGrid;

/// Row cap on the assembled linear system.
pub const MAX_QUERY_POINTS: usize = 10_000;

/// Equally spaced interior query points, stored per axis as grid indices.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryGrid {
    shape: Vec<usize>,
    margins: Vec<usize>,
    strides: Vec<usize>,
    centers: Vec<Vec<usize>>,
}

impl QueryGrid {
    /// Query points `margin, margin + stride, …` on each axis, with any
    /// remainder split evenly between both ends.
    pub fn new(grid: &SpatialGrid, margins: &[usize], strides: &[usize]) -> Result<Self> {
        let d = grid.dim();
        if margins.len() != d || strides.len() != d {
            return Err(Error::Dimension(format!(
                "need {d} margins and strides, got {} and {}",
                margins.len(),
                strides.len()
            )));
        }
        let mut centers = Vec::with_capacity(d);
        for axis in 0..d {
            let n = grid.shape()[axis];
            let (m, s) = (margins[axis], strides[axis]);
            if s == 0 {
                return Err(Error::Config("query stride must be positive".into()));
            }
            if 2 * m >= n {
                return Err(Error::Margin {
                    axis,
                    margin: m,
                    half_width: n / 2,
                });
            }
            let span = n - 1 - 2 * m;
            let offset = m + (span % s) / 2;
            centers.push((0..=span / s).map(|i| offset + i * s).collect());
        }
        let q = Self {
            shape: grid.shape().to_vec(),
            margins: margins.to_vec(),
            strides: strides.to_vec(),
            centers,
        };
        if q.len() >= MAX_QUERY_POINTS {
            return Err(Error::Config(format!(
                "{} query points exceed the cap of {}",
                q.len(),
                MAX_QUERY_POINTS - 1
            )));
        }
        Ok(q)
    }

    /// Margins equal to the test-function half-widths and the smallest common
    /// stride that keeps the row count under the cap.
    pub fn auto(grid: &SpatialGrid, half_widths: &[usize]) -> Result<Self> {
        let d = grid.dim();
        let max_n = *grid.shape().iter().max().unwrap();
        for stride in 1..=max_n {
            let strides = vec![stride; d];
            match Self::new(grid, half_widths, &strides) {
                Ok(q) => return Ok(q),
                Err(Error::Config(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Config("no stride satisfies the query cap".into()))
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.centers.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn centers(&self, axis: usize) -> &[usize] {
        &self.centers[axis]
    }

    pub fn margins(&self) -> &[usize] {
        &self.margins
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Per-axis query counts padded to three axes.
    pub fn counts3(&self) -> [usize; 3] {
        let mut c = [1; 3];
        for (a, v) in self.centers.iter().enumerate() {
            c[a] = v.len();
        }
        c
    }

    /// Checks every kernel of half-width `half_widths[a]` fits inside the grid.
    pub fn check_fits(&self, half_widths: &[usize]) -> Result<()> {
        for (axis, (&m, &hw)) in self.margins.iter().zip(half_widths).enumerate() {
            let n = self.shape[axis];
            let c = &self.centers[axis];
            let lo = *c.first().unwrap();
            let hi = *c.last().unwrap();
            if lo < hw || hi + hw >= n {
                return Err(Error::Margin {
                    axis,
                    margin: m.min(lo).min(n - 1 - hi),
                    half_width: hw,
                });
            }
        }
        Ok(())
    }
}
