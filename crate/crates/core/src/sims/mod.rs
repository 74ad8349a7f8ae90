//! Ground-truth data for the three benchmark equations, noise injection and
//! the planted coefficient tracks.

mod ks;
mod noise;
mod spectral;
mod truth;
mod wave2d;
mod wave3d;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor::{Field, SpatialGrid};

pub use ks::KsSolver;
pub use noise::{add_noise, dataset_rms, NoiseScale, RunningRms};
pub use truth::{true_weights, truth_track, wavespeed, WAVESPEED_PERIOD};
pub use wave2d::Wave2dSolver;
pub use wave3d::Wave3dSolver;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    Ks,
    Wave2d,
    Wave3d,
}

impl Problem {
    pub fn dim(self) -> usize {
        match self {
            Problem::Ks => 1,
            Problem::Wave2d => 2,
            Problem::Wave3d => 3,
        }
    }

    /// Order of the time derivative on the left-hand side.
    pub fn lhs_order(self) -> u32 {
        match self {
            Problem::Ks => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Ks => "ks",
            Problem::Wave2d => "w2d",
            Problem::Wave3d => "w3d",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ks" => Ok(Problem::Ks),
            "w2d" | "wave2d" => Ok(Problem::Wave2d),
            "w3d" | "wave3d" => Ok(Problem::Wave3d),
            _ => Err(Error::Config(format!("unknown problem '{s}' (ks, w2d, w3d)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    /// KS: `cos(x/16)(1 + sin(x/16))`; waves: seeded random low modes.
    Standard,
    Zero,
    /// `cos(2π Σ xᵢ / L)` at rest.
    Cosine,
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "zero" => Ok(Self::Zero),
            "cosine" => Ok(Self::Cosine),
            _ => Err(Error::Config(format!("unknown initial condition '{s}'"))),
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Standard => "standard",
            Self::Zero => "zero",
            Self::Cosine => "cosine",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub problem: Problem,
    pub shape: Vec<usize>,
    /// Period of every axis.
    pub length: f64,
    /// Emission interval.
    pub dt: f64,
    /// Number of snapshots emitted, including the initial one.
    pub steps: usize,
    /// Internal steps per emission; 0 picks a stable count.
    pub substeps: usize,
    pub seed: u64,
    pub ic: InitialCondition,
    /// Peak magnitude of random initial data.
    pub amplitude: f64,
    /// Largest mode index per axis in random initial data.
    pub max_mode: usize,
    /// Replaces the modulated wavespeed (W2D).
    pub constant_speed: Option<f64>,
    /// Include `−u³` (W2D).
    pub cubic: bool,
}

impl SimConfig {
    /// 256 points on `[0, 32π)`, emission every 0.586.
    pub fn ks() -> Self {
        Self {
            problem: Problem::Ks,
            shape: vec![256],
            length: 32.0 * PI,
            dt: 0.586,
            steps: 1500,
            substeps: 8,
            seed: 0,
            ic: InitialCondition::Standard,
            amplitude: 1.0,
            max_mode: 0,
            constant_speed: None,
            cubic: true,
        }
    }

    /// 64×64 periodic square of side 2, Δt = 0.0122.
    pub fn wave2d() -> Self {
        Self {
            problem: Problem::Wave2d,
            shape: vec![64, 64],
            length: 2.0,
            dt: 0.0122,
            steps: 1639,
            substeps: 0,
            seed: 7,
            ic: InitialCondition::Standard,
            amplitude: 8.0,
            max_mode: 2,
            constant_speed: None,
            cubic: true,
        }
    }

    /// 32³ on `[0, 2π)³`.
    pub fn wave3d() -> Self {
        Self {
            problem: Problem::Wave3d,
            shape: vec![32, 32, 32],
            length: 2.0 * PI,
            dt: 0.0491,
            steps: 300,
            substeps: 1,
            seed: 11,
            ic: InitialCondition::Standard,
            amplitude: 1.0,
            max_mode: 4,
            constant_speed: None,
            cubic: false,
        }
    }

    pub fn for_problem(problem: Problem) -> Self {
        match problem {
            Problem::Ks => Self::ks(),
            Problem::Wave2d => Self::wave2d(),
            Problem::Wave3d => Self::wave3d(),
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.shape[0] as f64
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(&self.shape, self.dx(), self.dt)
    }

    fn validate(&self) -> Result<()> {
        if self.shape.len() != self.problem.dim() {
            return Err(Error::Config(format!(
                "{} needs {} axes, got {:?}",
                self.problem,
                self.problem.dim(),
                self.shape
            )));
        }
        if self.shape.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Config("simulators use equal points per axis".into()));
        }
        if !(self.length > 0.0 && self.dt > 0.0) {
            return Err(Error::Config("length and dt must be positive".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        Ok(())
    }
}

/// Stateful snapshot source.
pub trait Simulator: Send {
    fn grid(&self) -> &SpatialGrid;

    /// Emits the next snapshot; the first call returns the initial data.
    fn next_field(&mut self) -> Result<Field>;
}

pub fn simulator(cfg: &SimConfig) -> Result<Box<dyn Simulator>> {
    cfg.validate()?;
    Ok(match cfg.problem {
        Problem::Ks => Box::new(KsSolver::new(cfg)?),
        Problem::Wave2d => Box::new(Wave2dSolver::new(cfg)?),
        Problem::Wave3d => Box::new(Wave3dSolver::new(cfg)?),
    })
}

/// All `cfg.steps` snapshots.
pub fn simulate(cfg: &SimConfig) -> Result<Vec<Field>> {
    let mut sim = simulator(cfg)?;
    (0..cfg.steps).map(|_| sim.next_field()).collect()
}

/// Text provenance record written next to snapshot files.
pub fn manifest(cfg: &SimConfig) -> String {
    let solver = match cfg.problem {
        Problem::Ks => "fourier spectral, ETDRK4 (contour integrals, 64 points)",
        Problem::Wave2d => "periodic fourier spectral, leapfrog (square periodic domain)",
        Problem::Wave3d => "exact fourier mode propagation",
    };
    let shape: Vec<String> = cfg.shape.iter().map(|n| n.to_string()).collect();
    let mut s = String::new();
    s += &format!("problem = {}\n", cfg.problem);
    s += &format!("shape = {}\n", shape.join("x"));
    s += &format!("length = {}\n", cfg.length);
    s += &format!("dx = {}\n", cfg.dx());
    s += &format!("dt = {}\n", cfg.dt);
    s += &format!("steps = {}\n", cfg.steps);
    s += &format!("substeps = {}\n", cfg.substeps);
    s += &format!("seed = {}\n", cfg.seed);
    s += &format!("ic = {}\n", cfg.ic);
    if cfg.problem == Problem::Wave2d {
        match cfg.constant_speed {
            Some(c) => s += &format!("wavespeed = {c}\n"),
            None => s += "wavespeed = modulated\n",
        }
        s += &format!("cubic = {}\n", cfg.cubic);
    }
    s += &format!("solver = {solver}\n");
    s
}

/// Seeded random superposition of low Fourier modes, scaled to `amplitude` peak.
fn random_modes(grid: &SpatialGrid, length: f64, max_mode: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let m = max_mode as i64;
    let mut terms = Vec::new();
    let range: Vec<i64> = (-m..=m).collect();
    let mut idx = [0i64; 3];
    let count = range.len().pow(d as u32);
    for c in 0..count {
        let mut r = c;
        for slot in idx.iter_mut().take(d) {
            *slot = range[r % range.len()];
            r /= range.len();
        }
        let k = &idx[..d];
        // half-space only: the cosine with phase already covers ±k
        let first = k.iter().find(|&&x| x != 0);
        if first.is_none_or(|&x| x < 0) {
            continue;
        }
        let k2: i64 = k.iter().map(|x| x * x).sum();
        let a: f64 = StandardNormal.sample(&mut rng);
        let phase: f64 = 2.0 * PI * rand::Rng::random::<f64>(&mut rng);
        terms.push((k.to_vec(), a / (1.0 + k2 as f64), phase));
    }
    let shape = grid.shape3();
    let dx = grid.dx();
    let s = 2.0 * PI / length;
    let mut u = vec![0.0; grid.len()];
    for (i, v) in u.iter_mut().enumerate() {
        let pos = [i / (shape[1] * shape[2]), (i / shape[2]) % shape[1], i % shape[2]];
        for (k, a, ph) in &terms {
            let arg: f64 = k.iter().enumerate().map(|(ax, &kk)| kk as f64 * pos[ax] as f64 * dx * s).sum();
            *v += a * (arg + ph).cos();
        }
    }
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.0 {
        for v in &mut u {
            *v *= amplitude / peak;
        }
    }
    u
}

fn cosine_mode(grid: &SpatialGrid, length: f64) -> Vec<f64> {
    let shape = grid.shape3();
    let dx = grid.dx();
    let d = grid.dim();
    (0..grid.len())
        .map(|i| {
            let pos = [i / (shape[1] * shape[2]), (i / shape[2]) % shape[1], i % shape[2]];
            let x: f64 = pos[..d].iter().map(|&p| p as f64 * dx).sum();
            (2.0 * PI * x / length).cos()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_streams() {
        for mut cfg in [SimConfig::ks(), SimConfig::wave2d(), SimConfig::wave3d()] {
            cfg.steps = 4;
            if cfg.problem == Problem::Wave3d {
                cfg.shape = vec![12; 3];
            }
            let a = simulate(&cfg).unwrap();
            let b = simulate(&cfg).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.values(), y.values());
                assert_eq!(x.step(), y.step());
            }
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        let mut cfg = SimConfig::ks();
        cfg.shape = vec![16, 16];
        assert!(matches!(simulate(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn manifest_lists_provenance() {
        let m = manifest(&SimConfig::wave2d());
        assert!(m.contains("problem = w2d"));
        assert!(m.contains("shape = 64x64"));
        assert!(m.contains("square periodic"));
    }

    #[test]
    fn random_modes_peak() {
        let grid = SpatialGrid::new(&[32, 32], 1.0 / 32.0, 0.1).unwrap();
        let u = random_modes(&grid, 1.0, 2, 1.5, 3);
        let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((peak - 1.5).abs() < 1e-12);
        assert_ne!(u, random_modes(&grid, 1.0, 2, 1.5, 4));
    }
}
