use rayon::prelude::*;

use crate::domain::DomainMask;
use crate::error::{Error, Result};
use crate::specfun::FracParams;

fn in_set(set: &[(f64, f64)], x: f64) -> bool {
    set.iter().any(|&(a, b)| a <= x && x < b)
}

fn overlaps(i: &[(f64, f64)], j: &[(f64, f64)]) -> bool {
    i.iter().any(|&(a, b)| j.iter().any(|&(c, d)| a < d && c < b))
}

/// Midpoint value of the kernel integrated over the two slabs
/// {x in Omega : x1 in I} and {y in Omega : y1 in J}; no normalization constant.
pub fn cross_slab_energy(mask: &DomainMask, i_set: &[(f64, f64)], j_set: &[(f64, f64)], p: FracParams) -> Result<f64> {
    if mask.dim() != 2 || p.n() != 2 {
        return Err(Error::Config("cross-slab energy is two-dimensional".into()));
    }
    if overlaps(i_set, j_set) {
        return Err(Error::Domain("slab intervals overlap".into()));
    }
    let grid = mask.grid();
    let centers = |set: &[(f64, f64)]| -> Vec<[f64; 2]> {
        mask.active_indices()
            .map(|k| {
                let (i, j) = grid.coords(k);
                grid.cell_center(i, j)
            })
            .filter(|c| in_set(set, c[0]))
            .collect()
    };
    let xs = centers(i_set);
    let ys = centers(j_set);
    let e = -(2.0 + 2.0 * p.s()) / 2.0;
    let h4 = grid.h.powi(4);
    // per-row partial sums, reduced in order
    let partial: Vec<f64> = xs
        .par_iter()
        .map(|x| {
            ys.iter()
                .map(|y| {
                    let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                    r2.powf(e)
                })
                .sum::<f64>()
        })
        .collect();
    Ok(h4 * partial.iter().sum::<f64>())
}
