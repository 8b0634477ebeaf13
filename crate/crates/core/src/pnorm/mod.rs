//! Induced `p -> p` norms of complex matrices: attained lower bounds,
//! certified upper bounds, amplified norms and isometry verdicts.

mod bounds;
mod estimate;
mod labeled;
mod power;

pub use bounds::{grid_upper, norm_inf, norm_one, riesz_thorin, GridBound, GRID_MAX_BOXES, GRID_MAX_DIM};
pub use estimate::*;
pub use labeled::*;
pub use power::{norming_functional, power_lower, power_run, vector_pnorm, CVector, PowerOptions};
