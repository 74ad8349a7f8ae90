use crate::tensor::SpatialGrid;
use crate::weakform::{FeatureLibrary, QueryGrid};

/// Default FFT cost constant.
pub const DEFAULT_FFT_CONSTANT: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEstimate {
    /// Flops per incoming data point.
    pub flops_per_point: f64,
    /// Doubles held by the slice buffer plus `(G, b)`.
    pub working_memory_dps: u64,
}

/// Per-point flop count and working memory of one streaming step.
///
/// `F = J (1 + C I log₂N + I K |Q| / |X|)` with `N = |X|^{1/d}`, and
/// `W = n |Q| K + (I + 1) J |Q|` where `n` is the number of library columns,
/// `I` the number of distinct operators and `J` the number of nonlinearities.
pub fn cost_estimates(
    library: &FeatureLibrary,
    grid: &SpatialGrid,
    query: &QueryGrid,
    k_mem: usize,
    fft_constant: f64,
) -> CostEstimate {
    cost_model(
        library.operator_count(),
        library.nonlinearity_count(),
        library.len(),
        grid.len(),
        grid.dim(),
        query.len(),
        k_mem,
        fft_constant,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn cost_model(
    operators: usize,
    nonlinearities: usize,
    columns: usize,
    points: usize,
    dim: usize,
    queries: usize,
    k_mem: usize,
    fft_constant: f64,
) -> CostEstimate {
    let (i, j) = (operators as f64, nonlinearities as f64);
    let x = points as f64;
    let n = x.powf(1.0 / dim as f64);
    let flops = j * (1.0 + fft_constant * i * n.log2() + i * k_mem as f64 * queries as f64 / x);
    let q = queries as u64;
    let w = columns as u64 * q * k_mem as u64 + (operators as u64 + 1) * nonlinearities as u64 * q;
    CostEstimate {
        flops_per_point: flops,
        working_memory_dps: w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weakform::{build_library, Lhs};

    #[test]
    fn trivial_plug_in() {
        let c = cost_model(1, 1, 1, 100, 1, 100, 1, 0.0);
        assert_eq!(c.flops_per_point, 2.0);
    }

    #[test]
    fn ks_memory() {
        let lib = build_library(1, Lhs::Dt).unwrap();
        let g = SpatialGrid::new(&[256], std::f64::consts::FRAC_PI_8, 0.586).unwrap();
        let q = QueryGrid::auto(&g, &[21]).unwrap();
        let c = cost_estimates(&lib, &g, &q, 21, DEFAULT_FFT_CONSTANT);
        // I = 5 operators, J = 5 nonlinearities, 21 columns, 214 rows
        assert_eq!(c.working_memory_dps, 21 * 214 * 21 + 6 * 5 * 214);
        assert_eq!(c.working_memory_dps, 100_794);
    }
}
