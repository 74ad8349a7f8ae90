//! Separable complex FFTs on periodic 1- to 3-axis grids.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Spectral {
    shape: [usize; 3],
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// Angular wavenumbers per axis in FFT order.
    k: Vec<Vec<f64>>,
    dim: usize,
}

impl Spectral {
    /// `lengths` are the periods of each axis.
    pub fn new(shape: &[usize], lengths: &[f64]) -> Self {
        let mut planner = FftPlanner::new();
        let mut s3 = [1usize; 3];
        s3[..shape.len()].copy_from_slice(shape);
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let k = shape
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| wavenumbers(n, l))
            .collect();
        Self {
            shape: s3,
            forward,
            inverse,
            k,
            dim: shape.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn k(&self, axis: usize) -> &[f64] {
        &self.k[axis]
    }

    /// Flat index → per-axis mode indices.
    pub fn modes(&self, flat: usize) -> [usize; 3] {
        let [_, n1, n2] = self.shape;
        [flat / (n1 * n2), (flat / n2) % n1, flat % n2]
    }

    /// `Σ k_a²` for each mode.
    pub fn k_squared(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let m = self.modes(i);
                (0..self.dim).map(|a| self.k[a][m[a]].powi(2)).sum()
            })
            .collect()
    }

    pub fn forward_real(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    /// Inverse transform, normalised, real part.
    pub fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut buf, &self.inverse);
        let norm = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * norm).collect()
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        for (axis, plan) in plans.iter().enumerate() {
            let outer: usize = self.shape[..axis].iter().product();
            let n = self.shape[axis];
            let inner: usize = self.shape[axis + 1..].iter().product();
            if inner == 1 {
                plan.process(buf);
                continue;
            }
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            for o in 0..outer {
                for r in 0..inner {
                    let base = o * n * inner + r;
                    for (i, l) in line.iter_mut().enumerate() {
                        *l = buf[base + i * inner];
                    }
                    plan.process(&mut line);
                    for (i, l) in line.iter().enumerate() {
                        buf[base + i * inner] = *l;
                    }
                }
            }
        }
    }
}

/// `2π/L · (0, 1, …, n/2, −n/2+1, …, −1)`.
pub(crate) fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let s = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            let j = j as i64;
            let n = n as i64;
            let signed = if j <= n / 2 { j } else { j - n };
            signed as f64 * s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_3d() {
        let sp = Spectral::new(&[6, 5, 4], &[1.0, 2.0, 3.0]);
        let u: Vec<f64> = (0..120).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let back = sp.inverse_real(sp.forward_real(&u));
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_of_mode() {
        let n = 16;
        let l = 2.0 * PI;
        let sp = Spectral::new(&[n, n], &[l, l]);
        let dx = l / n as f64;
        let u: Vec<f64> = (0..n * n)
            .map(|i| ((i / n) as f64 * dx * 2.0 + (i % n) as f64 * dx * 3.0).cos())
            .collect();
        let k2 = sp.k_squared();
        let hat: Vec<Complex64> = sp.forward_real(&u).iter().zip(&k2).map(|(c, k)| -c * k).collect();
        let lap = sp.inverse_real(hat);
        for (a, b) in lap.iter().zip(&u) {
            assert!((a + 13.0 * b).abs() < 1e-11);
        }
    }
}
