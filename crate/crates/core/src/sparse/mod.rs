//! Hard thresholding, column scaling, the online proximal gradient step with
//! its threshold policy, and the batch sequential-thresholding solver.

mod lstsq;
mod mstls;
mod policy;
mod scaled;
mod step;
mod threshold;

pub use lstsq::{initial_guess, lstsq, lstsq_calls, restricted_lstsq};
pub use mstls::{default_lambda_grid, mstls, mstls_bounds, mstls_grid_search, GridSearch, Mstls};
pub use policy::{update_lambda, Support, ThresholdPolicy, WeightState};
pub use scaled::ScaledSystem;
pub use step::{prox_grad_step, spectral_norm, step_size, StepMode, POWER_ITERATIONS, POWER_TOLERANCE};
pub use threshold::{hard_threshold, objective, penalty, support_of, Lambda};
