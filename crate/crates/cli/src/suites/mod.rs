//! Named verification suites driven by manifests.

mod identities;
mod inequalities;
mod strip;
mod vanishing;

use std::sync::Arc;

use fracpoin::domain::rasterize;
use fracpoin::eigen::{smallest_eigenpair, SolverOptions};
use fracpoin::seminorm::{assemble_regional, restricted_form};
use fracpoin::{DomainFamily, DomainMask, FormKind, FracParams, Result, SampledFunction};

use crate::manifest::ExperimentManifest;
use crate::report::SuiteReport;

pub const SUITES: &[&str] = &[
    "reduction_identity",
    "strip_normalization",
    "scaling_law",
    "cutoff_vanishing",
    "strip_p1",
    "tensor_split",
    "strip_p2",
    "picone",
    "symmetrization",
    "annuli_windows",
    "angle_bound",
    "loss_sloane",
];

pub fn run(m: &ExperimentManifest) -> Result<SuiteReport> {
    m.validate()?;
    let mut r = SuiteReport::new(&m.suite, m.seed());
    match m.suite.as_str() {
        "reduction_identity" => identities::reduction_identity(m, &mut r)?,
        "strip_normalization" => identities::strip_normalization(m, &mut r)?,
        "scaling_law" => identities::scaling_law(m, &mut r)?,
        "loss_sloane" => identities::loss_sloane(m, &mut r)?,
        "cutoff_vanishing" => vanishing::cutoff_vanishing(m, &mut r)?,
        "annuli_windows" => vanishing::annuli_windows(m, &mut r)?,
        "strip_p1" => strip::strip_p1(m, &mut r)?,
        "tensor_split" => strip::tensor_split(m, &mut r)?,
        "strip_p2" => strip::strip_p2(m, &mut r)?,
        "angle_bound" => strip::angle_bound(m, &mut r)?,
        "picone" => inequalities::picone(m, &mut r)?,
        "symmetrization" => inequalities::symmetrization(m, &mut r)?,
        other => unreachable!("validated suite {other}"),
    }
    Ok(r)
}

fn mask(family: &DomainFamily, h: f64) -> Result<Arc<DomainMask>> {
    Ok(Arc::new(rasterize(family, h)?))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Ground state of the cross-section (-1, 1) for the given form kind.
fn cross_section(kind: FormKind, s: f64, h: f64) -> Result<(SampledFunction, f64)> {
    let m = mask(&DomainFamily::interval(-1.0, 1.0), h)?;
    let p = FracParams::new(1, s)?;
    let form = match kind {
        FormKind::Regional => assemble_regional(&m, p)?,
        FormKind::Restricted => restricted_form(&m, p)?,
    };
    let pair = smallest_eigenpair(&form, &SolverOptions::default())?;
    Ok((form.extend(m, &pair.vector)?, pair.value))
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, f64::max)
}
