//! Seminorm through one-dimensional energies along lines.
//!
//! 2[u]^2 / C = int over the half circle of directions w, of the integral over
//! lines parallel to w, of the 1D double integral of u along the line.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::exterior::cell_corrections;
use super::fft::Fft2;
use super::form::{FormKind, SampledFunction};
use super::stencil::Stencil;
use crate::domain::{DomainMask, Grid};
use crate::error::{Error, Result};
use crate::specfun::{c_ns, FracParams};

/// Value of the piecewise-bilinear function at a point.
fn interpolate(u: &SampledFunction, x: [f64; 2]) -> f64 {
    let g = u.mask().grid();
    let [nx, ny] = g.node_extents();
    let t1 = (x[0] - g.origin[0]) / g.h;
    let t2 = (x[1] - g.origin[1]) / g.h;
    if t1 < 0.0 || t2 < 0.0 || t1 >= (nx - 1) as f64 || t2 >= (ny - 1) as f64 {
        return 0.0;
    }
    let (i, j) = (t1.floor() as usize, t2.floor() as usize);
    let (a, b) = (t1 - i as f64, t2 - j as f64);
    (1.0 - a) * (1.0 - b) * u.value(i, j) + a * (1.0 - b) * u.value(i + 1, j) + (1.0 - a) * b * u.value(i, j + 1) + a * b * u.value(i + 1, j + 1)
}

fn point_inside(mask: &DomainMask, x: [f64; 2]) -> bool {
    let g = mask.grid();
    let i = ((x[0] - g.origin[0]) / g.h).floor();
    let j = ((x[1] - g.origin[1]) / g.h).floor();
    mask.is_active_signed(i as i64, j as i64)
}

/// [u]^2 with the normalization constant, from `k` equispaced directions.
///
/// For `FormKind::Regional` the line integrals are restricted to the mask;
/// for `FormKind::Restricted` they run over whole lines.
pub fn seminorm_loss_sloane(u: &SampledFunction, p: FracParams, k: usize, kind: FormKind) -> Result<f64> {
    let mask = u.mask();
    if mask.dim() != 2 || p.n() != 2 {
        return Err(Error::Config("line decomposition needs a two-dimensional function".into()));
    }
    if k < 8 {
        return Err(Error::Config(format!("{k} directions are too few for a reliable estimate (need 8)")));
    }
    let s = p.s();
    let g = mask.grid();
    let h = g.h;
    // support box of the function
    let [nx, ny] = g.node_extents();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for j in 0..ny {
        for i in 0..nx {
            if u.value(i, j) != 0.0 {
                let x = g.node_position(i, j);
                for a in 0..2 {
                    lo[a] = lo[a].min(x[a] - h);
                    hi[a] = hi[a].max(x[a] + h);
                }
            }
        }
    }
    if !lo[0].is_finite() {
        return Ok(0.0);
    }
    if kind == FormKind::Regional {
        // the complement of the mask has to be seen along each line
        let o = g.origin;
        lo = [o[0], o[1]];
        hi = [o[0] + g.extents[0] as f64 * h, o[1] + g.extents[1] as f64 * h];
    }
    // every line runs through the disc around the box centre
    let centre = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let radius = 0.5 * ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
    let m = (radius / h).ceil() as i64 + 2;
    let n_nodes = (2 * m + 1) as usize;
    let stencil = Stencil::shared(1, s, [n_nodes, 0]);
    let plan = Fft2::for_convolution([n_nodes, 1], [n_nodes - 1, 0]);
    let spectrum = plan.kernel_spectrum([n_nodes - 1, 0], |a, _| stencil.get(a, 0));
    let tasks: Vec<(usize, i64)> = (0..k).flat_map(|d| (-m..m).map(move |c| (d, c))).collect();
    let per_line: Vec<f64> = tasks
        .par_iter()
        .map(|&(d, c)| {
            let th = PI * d as f64 / k as f64;
            let w = [th.cos(), th.sin()];
            let wp = [-w[1], w[0]];
            let off = (c as f64 + 0.5) * h;
            let base = [centre[0] + off * wp[0], centre[1] + off * wp[1]];
            let at = |l: f64| [base[0] + l * w[0], base[1] + l * w[1]];
            let vals: Vec<f64> = (-m..=m).map(|t| interpolate(u, at(t as f64 * h))).collect();
            if vals.iter().all(|&v| v == 0.0) {
                return 0.0;
            }
            let sv = plan.convolve(&spectrum, [n_nodes, 1], &vals);
            let mut e: f64 = vals.iter().zip(&sv).map(|(a, b)| a * b).sum();
            if kind == FormKind::Regional {
                // line cells between consecutive nodes, inside when their midpoint is
                let ncell = n_nodes + 1;
                let mut active = vec![false; ncell];
                for (q, a) in active.iter_mut().enumerate().take(ncell - 1).skip(1) {
                    let mid = (q as f64 - 1.0 - m as f64 + 0.5) * h;
                    *a = point_inside(mask, at(mid));
                }
                if active.iter().any(|&a| a) {
                    let grid = Grid::new(1, [-(m as f64 + 1.0) * h, 0.0], h, [ncell, 1]).expect("line grid");
                    let line = DomainMask::new(grid, active).expect("line mask");
                    let cells = cell_corrections(&line, s);
                    // cell q spans line nodes q-1 and q
                    let mut t = 0.0;
                    for q in 1..ncell - 1 {
                        let (a, b) = (vals[q - 1], vals[q]);
                        let cq = &cells[q];
                        t += a * a * cq[0] + 2.0 * a * b * cq[1] + b * b * cq[2];
                    }
                    e -= t;
                } else {
                    e = 0.0;
                }
            }
            // 1D double integral of the P1 line function
            2.0 * h.powf(1.0 - 2.0 * s) * e
        })
        .collect();
    let total: f64 = per_line.iter().sum::<f64>() * h * PI / k as f64;
    Ok(0.5 * c_ns(p) * total)
}
