//! `u_t = −(u²)_x − u_xx − u_xxxx`, Fourier spectral in space with
//! fourth-order exponential time differencing.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sims::spectral::Spectral;
use crate::sims::{InitialCondition, SimConfig, Simulator};
use crate::tensor::{Field, SpatialGrid};

const CONTOUR_POINTS: usize = 64;
const BLOW_UP: f64 = 1e6;

pub struct KsSolver {
    grid: SpatialGrid,
    spectral: Spectral,
    v: Vec<Complex64>,
    /// `−i k` with the Nyquist mode zeroed.
    g: Vec<Complex64>,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    substeps: usize,
    step: u64,
    started: bool,
}

impl KsSolver {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let grid = cfg.grid()?;
        let n = cfg.shape[0];
        let spectral = Spectral::new(&cfg.shape, &[cfg.length]);
        let substeps = cfg.substeps.max(1);
        let h = cfg.dt / substeps as f64;
        let k = spectral.k(0).to_vec();
        let lin: Vec<f64> = k.iter().map(|k| k * k - k.powi(4)).collect();
        let mut coeff = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let roots: Vec<Complex64> = (1..=CONTOUR_POINTS)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * (j as f64 - 0.5) / CONTOUR_POINTS as f64))
            .collect();
        for (i, &l) in lin.iter().enumerate() {
            let mut acc = [Complex64::new(0.0, 0.0); 4];
            for r in &roots {
                let z = r + h * l;
                let ez = z.exp();
                let z3 = z * z * z;
                acc[0] += ((z / 2.0).exp() - 1.0) / z;
                acc[1] += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                acc[2] += (2.0 + z + ez * (z - 2.0)) / z3;
                acc[3] += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            for (c, a) in coeff.iter_mut().zip(acc) {
                c[i] = h * (a / CONTOUR_POINTS as f64).re;
            }
        }
        let [q, f1, f2, f3] = coeff;
        let g = k
            .iter()
            .enumerate()
            .map(|(i, &k)| if 2 * i == n { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, -k) })
            .collect();
        let dx = grid.dx();
        let u0: Vec<f64> = match cfg.ic {
            InitialCondition::Standard => (0..n)
                .map(|i| {
                    let x = i as f64 * dx;
                    (x / 16.0).cos() * (1.0 + (x / 16.0).sin())
                })
                .collect(),
            InitialCondition::Zero => vec![0.0; n],
            InitialCondition::Cosine => super::cosine_mode(&grid, cfg.length),
        };
        Ok(Self {
            v: spectral.forward_real(&u0),
            spectral,
            grid,
            g,
            e: lin.iter().map(|l| (h * l).exp()).collect(),
            e2: lin.iter().map(|l| (h * l / 2.0).exp()).collect(),
            q,
            f1,
            f2,
            f3,
            substeps,
            step: 0,
            started: false,
        })
    }

    fn nonlinear(&self, v: &[Complex64]) -> Vec<Complex64> {
        let u = self.spectral.inverse_real(v.to_vec());
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        self.spectral
            .forward_real(&sq)
            .iter()
            .zip(&self.g)
            .map(|(a, g)| a * g)
            .collect()
    }

    fn advance(&mut self) {
        let nv = self.nonlinear(&self.v);
        let a: Vec<Complex64> = (0..self.v.len()).map(|i| self.v[i] * self.e2[i] + nv[i] * self.q[i]).collect();
        let na = self.nonlinear(&a);
        let b: Vec<Complex64> = (0..self.v.len()).map(|i| self.v[i] * self.e2[i] + na[i] * self.q[i]).collect();
        let nb = self.nonlinear(&b);
        let c: Vec<Complex64> = (0..self.v.len())
            .map(|i| a[i] * self.e2[i] + (nb[i] * 2.0 - nv[i]) * self.q[i])
            .collect();
        let nc = self.nonlinear(&c);
        for i in 0..self.v.len() {
            self.v[i] = self.v[i] * self.e[i]
                + nv[i] * self.f1[i]
                + (na[i] + nb[i]) * (2.0 * self.f2[i])
                + nc[i] * self.f3[i];
        }
        // roundoff leaves an anti-Hermitian part that the unstable band amplifies
        let n = self.v.len();
        for i in 1..=n / 2 {
            let j = n - i;
            let m = (self.v[i] + self.v[j].conj()) * 0.5;
            self.v[i] = m;
            self.v[j] = m.conj();
        }
        self.v[0].im = 0.0;
    }
}

impl Simulator for KsSolver {
    fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    fn next_field(&mut self) -> Result<Field> {
        if self.started {
            for _ in 0..self.substeps {
                self.advance();
            }
            self.step += 1;
        }
        self.started = true;
        let u = self.spectral.inverse_real(self.v.clone());
        let max_abs = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(max_abs <= BLOW_UP) {
            return Err(Error::SimulationDiverged {
                step: self.step,
                max_abs,
            });
        }
        Field::new(self.grid.clone(), u, self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sims::simulate;

    #[test]
    fn zero_stays_zero() {
        let mut cfg = SimConfig::ks();
        cfg.ic = InitialCondition::Zero;
        cfg.steps = 20;
        for f in simulate(&cfg).unwrap() {
            assert!(f.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn self_convergence() {
        let mut cfg = SimConfig::ks();
        cfg.steps = 30;
        let a = simulate(&cfg).unwrap().pop().unwrap();
        cfg.substeps *= 2;
        let b = simulate(&cfg).unwrap().pop().unwrap();
        let diff: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = b.values().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(diff / norm < 1e-6, "relative change {}", diff / norm);
    }

    #[test]
    fn mean_is_conserved() {
        let mut cfg = SimConfig::ks();
        cfg.steps = 200;
        let fields = simulate(&cfg).unwrap();
        let mean = |f: &Field| f.values().iter().sum::<f64>() / f.values().len() as f64;
        let m0 = mean(&fields[0]);
        let horizon = (cfg.steps - 1) as f64 * cfg.dt;
        let drift = (mean(fields.last().unwrap()) - m0).abs();
        assert!(drift / horizon < 1e-8, "drift {drift}");
    }

    #[test]
    fn chaotic_and_bounded() {
        let mut cfg = SimConfig::ks();
        cfg.steps = 400;
        let fields = simulate(&cfg).unwrap();
        let last = fields.last().unwrap();
        let peak = last.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(peak > 0.5 && peak < 10.0, "peak {peak}");
    }
}
