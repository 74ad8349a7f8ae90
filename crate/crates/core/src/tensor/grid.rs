use crate::error::{Error, Result};

/// Uniform grid with identical spacing on every spatial axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid {
    shape: Vec<usize>,
    dx: f64,
    dt: f64,
}

impl SpatialGrid {
    pub fn new(shape: &[usize], dx: f64, dt: f64) -> Result<Self> {
        if shape.is_empty() || shape.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1..=3, got {}",
                shape.len()
            )));
        }
        if let Some(n) = shape.iter().find(|&&n| n < 3) {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 3 points, got {n}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            shape: shape.to_vec(),
            dx,
            dt,
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Total number of grid points |X|.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Shape padded to three axes with trailing ones.
    pub fn shape3(&self) -> [usize; 3] {
        let mut s = [1; 3];
        s[..self.shape.len()].copy_from_slice(&self.shape);
        s
    }

    /// Physical length of axis `axis` for a periodic layout (n·Δx).
    pub fn extent(&self, axis: usize) -> f64 {
        self.shape[axis] as f64 * self.dx
    }
}

/// One solution snapshot, row-major over (x₁, …, x_d).
///
/// The timestamp is the integer step index `k`; physical time is `k·Δt`.
#[derive(Clone, Debug)]
pub struct Field {
    grid: SpatialGrid,
    values: Vec<f64>,
    step: u64,
}

impl Field {
    pub fn new(grid: SpatialGrid, values: Vec<f64>, step: u64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape().to_vec(),
                got: vec![values.len()],
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values, step })
    }

    pub fn zeros(grid: SpatialGrid, step: u64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
            step,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.grid.dt()
    }

    /// Same grid and timestamp, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.step)
    }
}

pub fn field_rms(f: &Field) -> Result<f64> {
    rms(f.values())
}

pub(crate) fn rms(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyField);
    }
    let ss: f64 = values.iter().map(|v| v * v).sum();
    Ok((ss / values.len() as f64).sqrt())
}

/// Derivative orders per spatial axis plus the temporal order.
///
/// At most one spatial axis may carry a nonzero order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    dim: usize,
    spatial: [u32; 3],
    temporal: u32,
}

impl MultiIndex {
    pub fn new(spatial: &[u32], temporal: u32) -> Result<Self> {
        if spatial.is_empty() || spatial.len() > 3 {
            return Err(Error::Dimension(format!(
                "multi-index needs 1..=3 spatial orders, got {}",
                spatial.len()
            )));
        }
        if spatial.iter().filter(|&&o| o > 0).count() > 1 {
            return Err(Error::Dimension(format!(
                "mixed spatial derivative {spatial:?} not supported"
            )));
        }
        let mut s = [0; 3];
        s[..spatial.len()].copy_from_slice(spatial);
        Ok(Self {
            dim: spatial.len(),
            spatial: s,
            temporal,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            spatial: [0; 3],
            temporal: 0,
        }
    }

    /// Pure spatial derivative of `order` along `axis`.
    pub fn along(dim: usize, axis: usize, order: u32) -> Result<Self> {
        if axis >= dim {
            return Err(Error::Dimension(format!("axis {axis} out of range for d={dim}")));
        }
        let mut s = [0; 3];
        s[axis] = order;
        Self::new(&s[..dim], 0)
    }

    pub fn time(dim: usize, order: u32) -> Self {
        Self {
            dim,
            spatial: [0; 3],
            temporal: order,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spatial(&self) -> &[u32] {
        &self.spatial[..self.dim]
    }

    pub fn temporal(&self) -> u32 {
        self.temporal
    }

    /// The differentiated axis and its order, if any spatial order is nonzero.
    pub fn active_axis(&self) -> Option<(usize, u32)> {
        self.spatial()
            .iter()
            .enumerate()
            .find(|(_, &o)| o > 0)
            .map(|(a, &o)| (a, o))
    }

    pub fn total_order(&self) -> u32 {
        self.spatial().iter().sum::<u32>() + self.temporal
    }
}
