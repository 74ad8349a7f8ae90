//! Test functions, the candidate library, per-snapshot feature slices and
//! assembly of the weak-form linear system.

mod cost;
mod features;
pub mod library;
mod query;
mod system;
mod testfn;

pub use cost::{cost_estimates, cost_model, CostEstimate, DEFAULT_FFT_CONSTANT};
pub use features::{spatial_features, ConvolutionMethod, PsiSlice, SpatialKernels};
pub use library::{build_library, Feature, FeatureLibrary, Lhs};
pub use query::{QueryGrid, MAX_QUERY_POINTS};
pub use system::{assemble_system, LinearSystem, TemporalKernels};
pub use testfn::{
    bump_derivative, make_axis_test_function, make_temporal_test_function, AxisTestFunction,
    TEMPORAL_DEGREE,
};
