//! Support and coefficient metrics, fixed-point certification and regret.

mod certify;
mod metrics;
mod regret;

pub use certify::{certify_fixed_point, FixedPointReport};
pub use metrics::{e2, tpr, TruthTrack};
pub use regret::{regret_step, RegretLedger, RegretRecord};
