//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sims::{NoiseScale, Problem, SimConfig};
use crate::sparse::{StepMode, ThresholdPolicy};
use crate::weakform::ConvolutionMethod;

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Simulate,
    Directory(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub k_mem: usize,
    pub noise: Vec<f64>,
    /// Rms behind σ = σ_NR · rms; acceptance runs use the whole dataset.
    pub noise_scale: NoiseScale,
    pub trials: usize,
    pub policy: ThresholdPolicy,
    /// Spatial test-function half width per axis (one value applies to all).
    pub half_width: Vec<usize>,
    pub degree: Vec<u32>,
    /// Query stride per axis; empty picks the smallest admissible stride.
    pub query_stride: Vec<usize>,
    pub source: DataSource,
    pub out: PathBuf,
    /// Base noise seed; trial `i` uses `seed + i`.
    pub seed: u64,
    pub step_mode: StepMode,
    pub convolution: ConvolutionMethod,
    /// Worker threads for trials; 0 uses the global pool.
    pub threads: usize,
    pub sim: SimConfig,
}

impl ExperimentConfig {
    pub fn new(problem: Problem) -> Self {
        let (k_mem, m) = match problem {
            Problem::Ks => (21, 21),
            Problem::Wave2d => (21, 21),
            Problem::Wave3d => (17, 8),
        };
        let mut sim = SimConfig::for_problem(problem);
        if problem == Problem::Ks {
            // about 1,500 online steps after the first window
            sim.steps = 1500 + k_mem;
        }
        Self {
            problem,
            k_mem,
            noise: vec![0.0],
            noise_scale: NoiseScale::Dataset,
            trials: 20,
            policy: ThresholdPolicy::default(),
            half_width: vec![m],
            degree: vec![11],
            query_stride: Vec::new(),
            source: DataSource::Simulate,
            out: PathBuf::from("results"),
            seed: 1,
            step_mode: StepMode::Estimate,
            convolution: ConvolutionMethod::Direct,
            threads: 0,
            sim,
        }
    }

    pub fn half_widths(&self) -> Vec<usize> {
        per_axis(&self.half_width, self.problem.dim())
    }

    pub fn degrees(&self) -> Vec<u32> {
        per_axis(&self.degree, self.problem.dim())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses `key = value` lines; `problem` sets the defaults the other keys override.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{line}'", no + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let problem = match pairs.iter().find(|(k, _)| k == "problem") {
            Some((_, v)) => v.parse()?,
            None => Problem::Ks,
        };
        let mut cfg = Self::new(problem);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one key; also used for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: String| Error::Config(format!("{key}: {e}"));
        match key {
            "problem" => {
                let p: Problem = value.parse()?;
                if p != self.problem {
                    *self = Self {
                        out: self.out.clone(),
                        ..Self::new(p)
                    };
                }
            }
            "k_mem" => self.k_mem = num(value).map_err(bad)?,
            "noise" => self.noise = list(value).map_err(bad)?,
            "noise_scale" => self.noise_scale = value.parse()?,
            "trials" => self.trials = num(value).map_err(bad)?,
            "lambda0" => self.policy.lambda0 = num(value).map_err(bad)?,
            "delta_lambda" => self.policy.delta = num(value).map_err(bad)?,
            "lambda_max" => self.policy.lambda_max = num(value).map_err(bad)?,
            "test_half_width" => self.half_width = list(value).map_err(bad)?,
            "test_degree" => self.degree = list(value).map_err(bad)?,
            "query_stride" => {
                self.query_stride = if value == "auto" { Vec::new() } else { list(value).map_err(bad)? }
            }
            "source" => {
                self.source = if value == "simulate" {
                    DataSource::Simulate
                } else {
                    DataSource::Directory(PathBuf::from(value))
                }
            }
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = num(value).map_err(bad)?,
            "step_mode" => {
                self.step_mode = match value {
                    "estimate" => StepMode::Estimate,
                    "exact" => StepMode::Exact,
                    _ => return Err(bad(format!("expected estimate or exact, got '{value}'"))),
                }
            }
            "convolution" => {
                self.convolution = match value {
                    "direct" => ConvolutionMethod::Direct,
                    "fft" => ConvolutionMethod::Fft,
                    _ => return Err(bad(format!("expected direct or fft, got '{value}'"))),
                }
            }
            "threads" => self.threads = num(value).map_err(bad)?,
            "shape" => self.sim.shape = list(&value.replace('x', ",")).map_err(bad)?,
            "length" => self.sim.length = num(value).map_err(bad)?,
            "dt" => self.sim.dt = num(value).map_err(bad)?,
            "steps" => self.sim.steps = num(value).map_err(bad)?,
            "substeps" => self.sim.substeps = num(value).map_err(bad)?,
            "sim_seed" => self.sim.seed = num(value).map_err(bad)?,
            "amplitude" => self.sim.amplitude = num(value).map_err(bad)?,
            "max_mode" => self.sim.max_mode = num(value).map_err(bad)?,
            "ic" => self.sim.ic = value.parse()?,
            "wavespeed" => {
                self.sim.constant_speed = if value == "modulated" { None } else { Some(num(value).map_err(bad)?) }
            }
            "cubic" => self.sim.cubic = num(value).map_err(bad)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.problem.dim();
        ThresholdPolicy::new(self.policy.delta, self.policy.lambda_max, self.policy.lambda0)?;
        if self.k_mem < 5 || self.k_mem % 2 == 0 {
            return Err(Error::Config(format!("k_mem must be odd and at least 5, got {}", self.k_mem)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.noise.is_empty() || self.noise.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Config("noise must list non-negative ratios".into()));
        }
        for (name, len) in [
            ("test_half_width", self.half_width.len()),
            ("test_degree", self.degree.len()),
        ] {
            if len != 1 && len != d {
                return Err(Error::Config(format!("{name} needs 1 or {d} values, got {len}")));
            }
        }
        if !self.query_stride.is_empty() && self.query_stride.len() != 1 && self.query_stride.len() != d {
            return Err(Error::Config(format!("query_stride needs 1 or {d} values")));
        }
        if self.sim.problem != self.problem || self.sim.shape.len() != d {
            return Err(Error::Config(format!("shape must have {d} axes for {}", self.problem)));
        }
        if self.source == DataSource::Simulate && self.sim.steps <= self.k_mem {
            return Err(Error::Config(format!(
                "steps ({}) must exceed k_mem ({})",
                self.sim.steps, self.k_mem
            )));
        }
        Ok(())
    }

    /// Serialises every key, so `parse(to_text())` round-trips.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("problem", self.problem.to_string());
        kv("k_mem", self.k_mem.to_string());
        kv("noise", join(self.noise.iter().map(|x| x.to_string()).collect()));
        kv("noise_scale", self.noise_scale.to_string());
        kv("trials", self.trials.to_string());
        kv("lambda0", self.policy.lambda0.to_string());
        kv("delta_lambda", self.policy.delta.to_string());
        kv("lambda_max", self.policy.lambda_max.to_string());
        kv("test_half_width", join(self.half_width.iter().map(|x| x.to_string()).collect()));
        kv("test_degree", join(self.degree.iter().map(|x| x.to_string()).collect()));
        kv(
            "query_stride",
            if self.query_stride.is_empty() {
                "auto".into()
            } else {
                join(self.query_stride.iter().map(|x| x.to_string()).collect())
            },
        );
        kv(
            "source",
            match &self.source {
                DataSource::Simulate => "simulate".into(),
                DataSource::Directory(p) => p.display().to_string(),
            },
        );
        kv("out", self.out.display().to_string());
        kv("seed", self.seed.to_string());
        kv(
            "step_mode",
            match self.step_mode {
                StepMode::Estimate => "estimate".into(),
                StepMode::Exact => "exact".into(),
            },
        );
        kv(
            "convolution",
            match self.convolution {
                ConvolutionMethod::Direct => "direct".into(),
                ConvolutionMethod::Fft => "fft".into(),
            },
        );
        kv("threads", self.threads.to_string());
        kv("shape", join(self.sim.shape.iter().map(|x| x.to_string()).collect()));
        kv("length", self.sim.length.to_string());
        kv("dt", self.sim.dt.to_string());
        kv("steps", self.sim.steps.to_string());
        kv("substeps", self.sim.substeps.to_string());
        kv("sim_seed", self.sim.seed.to_string());
        kv("amplitude", self.sim.amplitude.to_string());
        kv("max_mode", self.sim.max_mode.to_string());
        kv("ic", self.sim.ic.to_string());
        kv(
            "wavespeed",
            self.sim.constant_speed.map_or("modulated".into(), |c| c.to_string()),
        );
        kv("cubic", self.sim.cubic.to_string());
        s
    }
}

fn per_axis<T: Copy>(v: &[T], d: usize) -> Vec<T> {
    if v.len() == 1 {
        vec![v[0]; d]
    } else {
        v.to_vec()
    }
}

fn num<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| format!("'{s}': {e}"))
}

fn list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',').filter(|p| !p.trim().is_empty()).map(num).collect()
}
