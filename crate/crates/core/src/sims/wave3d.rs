//! `u_tt = Δu` on a periodic cube, propagated exactly mode by mode.

use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::sims::spectral::Spectral;
use crate::sims::{cosine_mode, random_modes, InitialCondition, SimConfig, Simulator};
use crate::tensor::{Field, SpatialGrid};

pub struct Wave3dSolver {
    grid: SpatialGrid,
    spectral: Spectral,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    k: Vec<f64>,
    step: u64,
}

impl Wave3dSolver {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let grid = cfg.grid()?;
        let spectral = Spectral::new(&cfg.shape, &vec![cfg.length; cfg.shape.len()]);
        let (u0, v0) = match cfg.ic {
            InitialCondition::Standard => (
                random_modes(&grid, cfg.length, cfg.max_mode, cfg.amplitude, cfg.seed),
                random_modes(&grid, cfg.length, cfg.max_mode, cfg.amplitude, cfg.seed.wrapping_add(1)),
            ),
            InitialCondition::Zero => (vec![0.0; grid.len()], vec![0.0; grid.len()]),
            InitialCondition::Cosine => (cosine_mode(&grid, cfg.length), vec![0.0; grid.len()]),
        };
        let k = spectral.k_squared().iter().map(|k2| k2.sqrt()).collect();
        Ok(Self {
            a: spectral.forward_real(&u0),
            b: spectral.forward_real(&v0),
            spectral,
            grid,
            k,
            step: 0,
        })
    }

    /// The solution at an arbitrary time.
    pub fn at_time(&self, t: f64) -> Vec<f64> {
        let hat = self
            .a
            .iter()
            .zip(&self.b)
            .zip(&self.k)
            .map(|((a, b), &k)| {
                if k == 0.0 {
                    a + b * t
                } else {
                    a * (k * t).cos() + b * ((k * t).sin() / k)
                }
            })
            .collect();
        self.spectral.inverse_real(hat)
    }
}

impl Simulator for Wave3dSolver {
    fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    fn next_field(&mut self) -> Result<Field> {
        let u = self.at_time(self.step as f64 * self.grid.dt());
        let f = Field::new(self.grid.clone(), u, self.step)?;
        self.step += 1;
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sims::{simulate, Problem};
    use std::f64::consts::PI;

    fn cfg(ic: InitialCondition) -> SimConfig {
        SimConfig {
            problem: Problem::Wave3d,
            shape: vec![8, 8, 8],
            length: 2.0 * PI,
            dt: 0.3,
            steps: 6,
            substeps: 1,
            seed: 1,
            ic,
            amplitude: 1.0,
            max_mode: 2,
            constant_speed: None,
            cubic: false,
        }
    }

    #[test]
    fn single_mode() {
        // cos(x + y + z) oscillates at |k| = √3
        let c = cfg(InitialCondition::Cosine);
        let fields = simulate(&c).unwrap();
        let dx = c.dx();
        let w = 3f64.sqrt();
        for f in &fields {
            let t = f.time();
            for (i, v) in f.values().iter().enumerate() {
                let x = (i / 64) as f64 * dx + ((i / 8) % 8) as f64 * dx + (i % 8) as f64 * dx;
                assert!((v - x.cos() * (w * t).cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_data() {
        for f in simulate(&cfg(InitialCondition::Zero)).unwrap() {
            assert!(f.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn second_time_difference_matches_laplacian() {
        let c = cfg(InitialCondition::Standard);
        let sim = Wave3dSolver::new(&c).unwrap();
        let h = 1e-3;
        let (m, z, p) = (sim.at_time(0.5 - h), sim.at_time(0.5), sim.at_time(0.5 + h));
        let sp = Spectral::new(&c.shape, &[c.length; 3]);
        let k2 = sp.k_squared();
        let lap = sp.inverse_real(sp.forward_real(&z).iter().zip(&k2).map(|(v, k)| -v * k).collect());
        let scale = lap.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        for i in 0..z.len() {
            let utt = (p[i] - 2.0 * z[i] + m[i]) / (h * h);
            assert!((utt - lap[i]).abs() < 1e-4 * scale);
        }
    }
}
