//! Smallest generalized eigenvalues of seminorm forms, refinement studies and
//! the Picone transfer check.

mod picone;
mod solver;
mod study;

pub use picone::{picone_lower_bound_check, strip_rayleigh, tensor_eigen_residual, PiconeVerdict};
pub use solver::{smallest_eigenpair, EigenPair, Pencil, SolverOptions, DENSE_DIRECT};
pub use study::{estimate, estimate_p1, estimate_p2, richardson, Extrapolation, RefinementStudy, Rung, StudyPlan, Verdict};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seminorm::QuadForm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub h: f64,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub accepted: bool,
}

/// Smallest eigenvalue of the form's pencil.
pub fn smallest_eigenvalue(form: &QuadForm) -> Result<EigenEstimate> {
    let pair = smallest_eigenpair(form, &SolverOptions::default())?;
    if pair.value < 0.0 {
        return Err(Error::Iteration {
            iterations: pair.iterations,
            value: pair.value,
            residual: pair.residual,
        });
    }
    Ok(EigenEstimate {
        h: form.h(),
        length: None,
        value: pair.value,
        residual: pair.residual,
        iterations: pair.iterations,
        accepted: pair.accepted,
    })
}
