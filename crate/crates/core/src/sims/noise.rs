use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::tensor::Field;

/// Root mean square over every value of every snapshot.
pub fn dataset_rms(fields: &[Field]) -> Result<f64> {
    let n: usize = fields.iter().map(|f| f.values().len()).sum();
    if n == 0 {
        return Err(Error::EmptyField);
    }
    let ss: f64 = fields
        .iter()
        .flat_map(|f| f.values().iter())
        .map(|v| v * v)
        .sum();
    Ok((ss / n as f64).sqrt())
}

/// Which rms scales the noise: the whole clean dataset, or the snapshots seen so far.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NoiseScale {
    #[default]
    Dataset,
    Running,
}

impl FromStr for NoiseScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dataset" => Ok(Self::Dataset),
            "running" => Ok(Self::Running),
            _ => Err(Error::Config(format!("noise_scale: expected dataset or running, got '{s}'"))),
        }
    }
}

impl fmt::Display for NoiseScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dataset => "dataset",
            Self::Running => "running",
        })
    }
}

/// Rms over every snapshot pushed so far.
#[derive(Clone, Debug, Default)]
pub struct RunningRms {
    sum_sq: f64,
    count: usize,
}

impl RunningRms {
    /// Folds in `field` and returns the updated rms.
    pub fn push(&mut self, field: &Field) -> f64 {
        self.sum_sq += field.values().iter().map(|v| v * v).sum::<f64>();
        self.count += field.values().len();
        self.value()
    }

    pub fn value(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.sum_sq / self.count as f64).sqrt()
        }
    }
}

/// Adds i.i.d. `N(0, (σ_NR · rms)²)` to every value.
pub fn add_noise<R: Rng + ?Sized>(field: &Field, sigma_nr: f64, rms: f64, rng: &mut R) -> Result<Field> {
    if !(sigma_nr >= 0.0 && rms >= 0.0) {
        return Err(Error::Config(format!("noise ratio {sigma_nr} and rms {rms} must be non-negative")));
    }
    if sigma_nr == 0.0 {
        return Ok(field.clone());
    }
    let dist = Normal::new(0.0, sigma_nr * rms).map_err(|e| Error::Config(e.to_string()))?;
    let values = field.values().iter().map(|v| v + dist.sample(rng)).collect();
    field.with_values(values)
}
