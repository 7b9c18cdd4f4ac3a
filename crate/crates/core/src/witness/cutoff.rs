use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{WitnessReport, WitnessRow};
use crate::domain::{node_boundary_distance, DomainMask};
use crate::error::{Error, Result};
use crate::seminorm::{assemble_regional, QuadForm, SampledFunction};
use crate::specfun::FracParams;

/// Boundary cutoffs u_delta = min(1, dist(x, complement) / delta).
#[derive(Debug, Clone)]
pub struct CutoffFamily {
    pub mask: Arc<DomainMask>,
    pub deltas: Vec<f64>,
}

impl CutoffFamily {
    pub fn new(mask: Arc<DomainMask>, deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config("delta ladder must be nonempty and positive".into()));
        }
        if deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("delta ladder must be strictly decreasing".into()));
        }
        let h = mask.h();
        if let Some(&d) = deltas.iter().find(|&&d| d < 4.0 * h) {
            return Err(Error::Resolution {
                feature: d,
                max_h: d / 4.0,
                h,
            });
        }
        Ok(CutoffFamily { mask, deltas })
    }

    /// Dyadic ladder 2^-k for k in first..=last.
    pub fn dyadic(mask: Arc<DomainMask>, first: i32, last: i32) -> Result<Self> {
        CutoffFamily::new(mask, (first..=last).map(|k| 2f64.powi(-k)).collect())
    }

    pub fn member(&self, delta: f64) -> Result<SampledFunction> {
        cutoff_function(&self.mask, delta)
    }
}

/// min(1, dist / delta) on admissible nodes, zero elsewhere.
pub fn cutoff_function(mask: &Arc<DomainMask>, delta: f64) -> Result<SampledFunction> {
    if !(delta > 0.0) {
        return Err(Error::Config("delta must be positive".into()));
    }
    let d = node_boundary_distance(mask);
    let [nx, _] = mask.grid().node_extents();
    let values = d
        .iter()
        .enumerate()
        .map(|(k, &dk)| if mask.node_admissible(k % nx, k / nx) { (dk / delta).min(1.0) } else { 0.0 })
        .collect();
    SampledFunction::new(mask.clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub delta: f64,
    pub energy: f64,
    pub norm2: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub rows: Vec<CutoffRow>,
    /// Least-squares slope of log(quotient) against log(delta).
    pub slope: Option<f64>,
    pub measure: f64,
}

impl CutoffReport {
    pub fn witness_rows(&self) -> WitnessReport {
        WitnessReport {
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let mut terms = BTreeMap::new();
                    terms.insert("energy".to_string(), r.energy);
                    terms.insert("norm2".to_string(), r.norm2);
                    WitnessRow {
                        family: "cutoff".into(),
                        param: r.delta,
                        quotient: r.quotient,
                        terms,
                        bound: None,
                        pass: r.quotient.is_finite() && r.quotient >= 0.0,
                    }
                })
                .collect(),
        }
    }
}

pub(crate) fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub(crate) fn rayleigh_of(form: &QuadForm, u: &SampledFunction) -> Result<(f64, f64)> {
    let x = form.restrict(u)?;
    let e = form.energy(&x);
    let m = form.mass_norm2(&x);
    if m == 0.0 {
        return Err(Error::Empty("witness vanishes identically".into()));
    }
    Ok((e, m))
}

/// Regional Rayleigh quotients of the cutoff ladder and their log-log slope.
pub fn cutoff_rayleigh(family: &CutoffFamily, p: FracParams) -> Result<CutoffReport> {
    if family.mask.dim() != p.n() as usize {
        return Err(Error::Config("mask and parameter dimensions differ".into()));
    }
    if p.s() >= 0.5 {
        log::info!("cutoff ladder at s = {} >= 1/2: quotients are not expected to vanish", p.s());
    }
    let form = assemble_regional(&family.mask, p)?;
    let rows = family
        .deltas
        .par_iter()
        .map(|&delta| {
            let u = family.member(delta)?;
            let (energy, norm2) = rayleigh_of(&form, &u)?;
            Ok(CutoffRow {
                delta,
                energy,
                norm2,
                quotient: energy / norm2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ds: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let qs: Vec<f64> = rows.iter().map(|r| r.quotient).collect();
    Ok(CutoffReport {
        slope: loglog_fit(&ds, &qs),
        rows,
        measure: family.mask.measure(),
    })
}
