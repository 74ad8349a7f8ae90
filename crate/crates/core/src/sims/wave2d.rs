//! `u_tt = c(t) Δu − u³` on a periodic square, spectral Laplacian with
//! leapfrog time stepping.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sims::spectral::Spectral;
use crate::sims::{cosine_mode, random_modes, wavespeed, InitialCondition, SimConfig, Simulator};
use crate::tensor::{Field, SpatialGrid};

const BLOW_UP: f64 = 1e6;
/// Courant number targeted when the substep count is chosen automatically.
const AUTO_COURANT: f64 = 0.25;

pub struct Wave2dSolver {
    grid: SpatialGrid,
    spectral: Spectral,
    k2: Vec<f64>,
    u: Vec<f64>,
    u_prev: Vec<f64>,
    h: f64,
    substeps: usize,
    constant_speed: Option<f64>,
    cubic: bool,
    /// Internal step counter.
    n: u64,
    step: u64,
    started: bool,
}

/// `c_max h √(Σ 1/Δxᵢ²) π`; leapfrog with spectral differencing needs < 1.
pub fn courant(c_max: f64, h: f64, dx: f64, dim: usize) -> f64 {
    c_max * h * (dim as f64 / (dx * dx)).sqrt() * PI
}

impl Wave2dSolver {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let grid = cfg.grid()?;
        let c_max = cfg.constant_speed.unwrap_or(1.2);
        let dx = cfg.dx();
        let substeps = if cfg.substeps == 0 {
            (courant(c_max, cfg.dt, dx, 2) / AUTO_COURANT).ceil().max(1.0) as usize
        } else {
            cfg.substeps
        };
        let h = cfg.dt / substeps as f64;
        let cfl = courant(c_max, h, dx, 2);
        if cfl >= 1.0 {
            return Err(Error::Unstable(format!(
                "leapfrog Courant number {cfl:.3} ≥ 1 with {substeps} substeps"
            )));
        }
        let spectral = Spectral::new(&cfg.shape, &[cfg.length, cfg.length]);
        let k2 = spectral.k_squared();
        let u0 = match cfg.ic {
            InitialCondition::Standard => random_modes(&grid, cfg.length, cfg.max_mode, cfg.amplitude, cfg.seed),
            InitialCondition::Zero => vec![0.0; grid.len()],
            InitialCondition::Cosine => cosine_mode(&grid, cfg.length),
        };
        let mut s = Self {
            grid,
            spectral,
            k2,
            u: u0.clone(),
            u_prev: u0,
            h,
            substeps,
            constant_speed: cfg.constant_speed,
            cubic: cfg.cubic,
            n: 0,
            step: 0,
            started: false,
        };
        // Taylor start from rest: u(-h) = u(0) + h²/2 · u_tt(0)
        let acc = s.acceleration(&s.u, 0.0);
        for (p, a) in s.u_prev.iter_mut().zip(acc) {
            *p += 0.5 * h * h * a;
        }
        Ok(s)
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    fn speed(&self, t: f64) -> f64 {
        self.constant_speed.unwrap_or_else(|| wavespeed(t))
    }

    fn acceleration(&self, u: &[f64], t: f64) -> Vec<f64> {
        let c = self.speed(t);
        let hat: Vec<Complex64> = self
            .spectral
            .forward_real(u)
            .iter()
            .zip(&self.k2)
            .map(|(v, k2)| -v * k2)
            .collect();
        let lap = self.spectral.inverse_real(hat);
        lap.iter()
            .zip(u)
            .map(|(l, v)| if self.cubic { c * l - v * v * v } else { c * l })
            .collect()
    }

    fn advance(&mut self) {
        let t = self.n as f64 * self.h;
        let acc = self.acceleration(&self.u, t);
        let h2 = self.h * self.h;
        for i in 0..self.u.len() {
            let next = 2.0 * self.u[i] - self.u_prev[i] + h2 * acc[i];
            self.u_prev[i] = self.u[i];
            self.u[i] = next;
        }
        self.n += 1;
    }

    /// `½∫u_t² + ½c∫|∇u|² + ¼∫u⁴` with centred `u_t`, at the current time.
    pub fn energy(&mut self) -> f64 {
        let t = self.n as f64 * self.h;
        let c = self.speed(t);
        let before = self.u_prev.clone();
        let now = self.u.clone();
        self.advance();
        let ut: Vec<f64> = self.u.iter().zip(&before).map(|(a, b)| (a - b) / (2.0 * self.h)).collect();
        self.u = now;
        self.u_prev = before;
        self.n -= 1;
        let hat = self.spectral.forward_real(&self.u);
        let n = self.u.len() as f64;
        // Parseval: Σ|∇u|² = (1/N) Σ k² |û|²
        let grad2: f64 = hat.iter().zip(&self.k2).map(|(v, k2)| k2 * v.norm_sqr()).sum::<f64>() / n;
        let dv = self.grid.dx().powi(2);
        let kin: f64 = ut.iter().map(|v| v * v).sum();
        let quart: f64 = if self.cubic { self.u.iter().map(|v| v.powi(4)).sum() } else { 0.0 };
        dv * (0.5 * kin + 0.5 * c * grad2 + 0.25 * quart)
    }
}

impl Simulator for Wave2dSolver {
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
        let max_abs = self.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(max_abs <= BLOW_UP) {
            return Err(Error::SimulationDiverged {
                step: self.step,
                max_abs,
            });
        }
        Field::new(self.grid.clone(), self.u.clone(), self.step)
    }
}
