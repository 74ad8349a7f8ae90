use std::f64::consts::PI;

use nalgebra::DVector;

use crate::analysis::TruthTrack;
use crate::error::{Error, Result};
use crate::sims::Problem;
use crate::weakform::{FeatureLibrary, Lhs};

/// Period of the wavespeed modulation.
pub const WAVESPEED_PERIOD: f64 = 10.0;

/// Smoothed square wave `1 + 0.2 (2/π) arctan(40 cos(2π t / 10))`.
pub fn wavespeed(t: f64) -> f64 {
    1.0 + 0.2 * (2.0 / PI) * (40.0 * (2.0 * PI * t / WAVESPEED_PERIOD).cos()).atan()
}

fn col(lib: &FeatureLibrary, axis: usize, order: u32, power: u32) -> Result<usize> {
    lib.column(axis, order, power).ok_or_else(|| {
        Error::LibraryMismatch(format!("library lacks d^{order} along axis {axis} of u^{power}"))
    })
}

/// Planted coefficients in library order at time `t`.
pub fn true_weights(problem: Problem, lib: &FeatureLibrary, t: f64) -> Result<DVector<f64>> {
    if lib.dim() != problem.dim() {
        return Err(Error::LibraryMismatch(format!(
            "{problem} is {}-dimensional but the library has d = {}",
            problem.dim(),
            lib.dim()
        )));
    }
    let want = if problem == Problem::Ks { Lhs::Dt } else { Lhs::Dtt };
    if lib.lhs() != want {
        return Err(Error::LibraryMismatch(format!("{problem} needs {want}, library has {}", lib.lhs())));
    }
    let mut w = DVector::zeros(lib.len());
    match problem {
        Problem::Ks => {
            w[col(lib, 0, 1, 2)?] = -1.0;
            w[col(lib, 0, 2, 1)?] = -1.0;
            w[col(lib, 0, 4, 1)?] = -1.0;
        }
        Problem::Wave2d => {
            let c = wavespeed(t);
            w[col(lib, 0, 2, 1)?] = c;
            w[col(lib, 1, 2, 1)?] = c;
            w[col(lib, 0, 0, 3)?] = -1.0;
        }
        Problem::Wave3d => {
            for axis in 0..3 {
                w[col(lib, axis, 2, 1)?] = 1.0;
            }
        }
    }
    Ok(w)
}

pub fn truth_track(problem: Problem, lib: &FeatureLibrary) -> Result<TruthTrack> {
    true_weights(problem, lib, 0.0)?;
    let lib = lib.clone();
    Ok(TruthTrack::new(lib.len(), move |t| {
        true_weights(problem, &lib, t).expect("library checked at construction")
    }))
}
