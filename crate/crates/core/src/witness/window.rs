use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::{cutoff_function, rayleigh_of};
use super::report::{WitnessReport, WitnessRow};
use crate::domain::{distance_average, DomainMask, Window};
use crate::error::{Error, Result};
use crate::seminorm::{assemble_regional, QuadForm, SampledFunction};
use crate::specfun::{c_ns, sphere_measure, FracParams};

/// Cutoffs of Omega cap lambda_k U, extended by zero to Omega.
#[derive(Debug, Clone)]
pub struct WindowFamily {
    /// Omega, truncated beyond the largest window.
    pub omega: Arc<DomainMask>,
    pub window: Window,
    pub lambdas: Vec<f64>,
    /// Cutoff width per rung.
    pub deltas: Vec<f64>,
}

impl WindowFamily {
    pub fn new(omega: Arc<DomainMask>, window: Window, lambdas: Vec<f64>, deltas: Vec<f64>) -> Result<Self> {
        if omega.dim() != 2 {
            return Err(Error::Config("window family is two-dimensional".into()));
        }
        if lambdas.is_empty() || lambdas.len() != deltas.len() {
            return Err(Error::Config("need one cutoff width per window scale".into()));
        }
        if lambdas.iter().any(|l| !(*l > 0.0)) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("window scales must be positive and increasing".into()));
        }
        let h = omega.h();
        if let Some(&d) = deltas.iter().find(|&&d| !(d >= 4.0 * h)) {
            return Err(Error::Resolution {
                feature: d,
                max_h: d / 4.0,
                h,
            });
        }
        Ok(WindowFamily {
            omega,
            window,
            lambdas,
            deltas,
        })
    }

    /// Cells of Omega whose centers lie in lambda U.
    pub fn piece(&self, lambda: f64) -> Result<DomainMask> {
        let g = self.omega.grid();
        let active = self
            .omega
            .active()
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let (i, j) = g.coords(k);
                a && self.window.contains(g.cell_center(i, j), lambda)
            })
            .collect();
        DomainMask::new(g.clone(), active)
    }

    /// u_k on the lattice of Omega.
    pub fn member(&self, k: usize) -> Result<SampledFunction> {
        let piece = Arc::new(self.piece(self.lambdas[k])?);
        if piece.active_count() == 0 {
            return Err(Error::Empty(format!("window {} misses the domain", self.lambdas[k])));
        }
        let u = cutoff_function(&piece, self.deltas[k])?;
        SampledFunction::new(self.omega.clone(), u.values().to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub lambda: f64,
    pub delta: f64,
    pub quotient: f64,
    /// Energy of u_k on Omega_k over ||u_k||^2.
    pub interior: f64,
    /// Interaction of Omega_k with Omega minus Omega_k over ||u_k||^2.
    pub exterior: f64,
    pub distance_average: f64,
    /// interior + 2 C c(n,s) distance_average
    pub bound: f64,
    pub norm2: f64,
    pub measure: f64,
}

impl WindowRow {
    pub fn pass(&self) -> bool {
        self.quotient <= self.bound * (1.0 + 1e-8) && self.norm2 >= 0.5 * self.measure
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub rows: Vec<WindowRow>,
    /// Scales skipped because the window missed the domain.
    pub skipped: Vec<f64>,
}

impl WindowReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].quotient < w[0].quotient)
    }

    pub fn witness_rows(&self) -> WitnessReport {
        WitnessReport {
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let mut terms = BTreeMap::new();
                    terms.insert("interior".to_string(), r.interior);
                    terms.insert("exterior".to_string(), r.exterior);
                    terms.insert("distance_average".to_string(), r.distance_average);
                    WitnessRow {
                        family: "window".into(),
                        param: r.lambda,
                        quotient: r.quotient,
                        terms,
                        bound: Some(r.bound),
                        pass: r.pass(),
                    }
                })
                .collect(),
        }
    }
}

fn evaluate(family: &WindowFamily, form: &QuadForm, p: FracParams, k: usize) -> Result<WindowRow> {
    let lambda = family.lambdas[k];
    let piece = Arc::new(family.piece(lambda)?);
    if piece.active_count() == 0 {
        return Err(Error::Empty(format!("window {lambda} misses the domain")));
    }
    let on_piece = cutoff_function(&piece, family.deltas[k])?;
    let u = SampledFunction::new(family.omega.clone(), on_piece.values().to_vec())?;
    let (total, norm2) = rayleigh_of(form, &u)?;
    let (inner, _) = rayleigh_of(&assemble_regional(&piece, p)?, &on_piece)?;
    let avg = distance_average(&family.omega, family.window, lambda, p.s())?.value;
    let c = c_ns(p) * sphere_measure(p.n())? / (2.0 * p.s());
    let interior = inner / norm2;
    Ok(WindowRow {
        lambda,
        delta: family.deltas[k],
        quotient: total / norm2,
        interior,
        exterior: (total - inner) / norm2,
        distance_average: avg,
        bound: interior + 2.0 * c * avg,
        norm2,
        measure: piece.measure(),
    })
}

/// Regional Rayleigh quotients over Omega of the window cutoffs, with the
/// interior / exterior decomposition per scale.
pub fn window_rayleigh(family: &WindowFamily, p: FracParams) -> Result<WindowReport> {
    if p.n() != 2 {
        return Err(Error::Config("window family is two-dimensional".into()));
    }
    if p.s() >= 0.5 {
        log::info!("window ladder at s = {} >= 1/2: quotients are not expected to vanish", p.s());
    }
    let form = assemble_regional(&family.omega, p)?;
    let results: Vec<Result<WindowRow>> = (0..family.lambdas.len()).into_par_iter().map(|k| evaluate(family, &form, p, k)).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(Error::Empty(msg)) => {
                log::info!("skipping window {}: {msg}", family.lambdas[k]);
                skipped.push(family.lambdas[k]);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(WindowReport { rows, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{rasterize, CrossShape, DomainFamily};
    use crate::witness::{cutoff_rayleigh, CutoffFamily};

    #[test]
    fn bounded_domain_control() {
        let h = 1.0 / 16.0;
        let omega = Arc::new(
            rasterize(
                &DomainFamily::Ball {
                    center: [0.0, 0.0],
                    radius: 1.5,
                },
                h,
            )
            .unwrap(),
        );
        let p = FracParams::new(2, 0.25).unwrap();
        let fam = WindowFamily::new(omega.clone(), Window::Ball, vec![1.0, 2.0, 4.0], vec![0.25; 3]).unwrap();
        let rep = window_rayleigh(&fam, p).unwrap();
        let plain = cutoff_rayleigh(&CutoffFamily::new(omega, vec![0.25]).unwrap(), p).unwrap().rows[0].quotient;
        for r in &rep.rows[1..] {
            assert!((r.quotient - plain).abs() < 1e-12 * plain);
            assert!(r.exterior.abs() < 1e-12 * plain);
        }
        assert!(rep.rows.iter().all(|r| r.pass()), "{rep:?}");
    }

    #[test]
    fn plus_shape_quotients_decrease() {
        let h = 1.0 / 8.0;
        let omega = Arc::new(
            rasterize(
                &DomainFamily::StripCross {
                    shape: CrossShape::Plus,
                    arm: 18.0,
                },
                h,
            )
            .unwrap(),
        );
        let fam = WindowFamily::new(omega, Window::Square, vec![4.0, 8.0, 16.0], vec![0.5; 3]).unwrap();
        let rep = window_rayleigh(&fam, FracParams::new(2, 0.25).unwrap()).unwrap();
        assert!(rep.strictly_decreasing(), "{rep:?}");
        assert!(rep.rows.iter().all(|r| r.pass()), "{rep:?}");
        let ext: Vec<f64> = rep.rows.iter().map(|r| r.exterior).collect();
        assert!(ext.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn missing_window_is_skipped() {
        let omega = Arc::new(
            rasterize(
                &DomainFamily::Box {
                    lo: [3.0, 3.0],
                    hi: [4.0, 4.0],
                },
                0.125,
            )
            .unwrap(),
        );
        let fam = WindowFamily::new(omega, Window::Ball, vec![1.0, 8.0], vec![0.5, 0.5]).unwrap();
        let rep = window_rayleigh(&fam, FracParams::new(2, 0.25).unwrap()).unwrap();
        assert_eq!(rep.skipped, vec![1.0]);
        assert_eq!(rep.rows.len(), 1);
    }
}
