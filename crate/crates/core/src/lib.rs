//! Fractional Gagliardo seminorms and Poincare constants on one- and
//! two-dimensional domains.

pub mod domain;
pub mod eigen;
pub mod error;
pub mod json;
pub mod quad;
pub mod seminorm;
pub mod specfun;
pub mod witness;

pub use domain::{DomainFamily, DomainMask, Grid, Window};
pub use error::{Error, Result};
pub use eigen::{EigenEstimate, RefinementStudy};
pub use seminorm::{FormKind, QuadForm, SampledFunction};
pub use specfun::{FracParams, ReductionParams};

/// Default cell budget, overridable through `FRACPOIN_BUDGET`.
pub const DEFAULT_BUDGET: usize = 1 << 22;

/// Default seed for every random suite.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Cell budget from the environment, falling back to [`DEFAULT_BUDGET`].
pub fn cell_budget() -> usize {
    std::env::var("FRACPOIN_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}
