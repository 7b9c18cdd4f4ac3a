//! Rasterized domains: grids, masks, the continuum families they come
//! from, and geometric functionals on them.

mod decay;
mod family;
mod window;

pub use decay::{check_decay_condition, DecaySpec, DecayVerdict, Envelope, SliceSource};
pub use family::{CrossShape, DomainFamily, Profile, Window};
pub use window::{
    dist_to_window_complement, distance_average, distance_split, family_distance_split,
    CellSamples, DistanceAverage, DistanceSplit,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell grid; in one dimension the second axis has a single cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub origin: [f64; 2],
    pub h: f64,
    pub extents: [usize; 2],
}

impl Grid {
    pub fn new(dim: usize, origin: [f64; 2], h: f64, extents: [usize; 2]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!("dimension {dim} not supported")));
        }
        if !(h > 0.0) || extents[0] == 0 || extents[1] == 0 || (dim == 1 && extents[1] != 1) {
            return Err(Error::Config("invalid grid spacing or extents".into()));
        }
        Ok(Grid {
            dim,
            origin,
            h,
            extents,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.extents[0] * self.extents[1]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.extents[0] + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.extents[0], idx / self.extents[0])
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let c1 = self.origin[0] + (i as f64 + 0.5) * self.h;
        let c2 = if self.dim == 2 {
            self.origin[1] + (j as f64 + 0.5) * self.h
        } else {
            0.0
        };
        [c1, c2]
    }

    /// Node counts per axis (1 in the unused axis for 1D).
    pub fn node_extents(&self) -> [usize; 2] {
        if self.dim == 1 {
            [self.extents[0] + 1, 1]
        } else {
            [self.extents[0] + 1, self.extents[1] + 1]
        }
    }

    pub fn node_position(&self, i: usize, j: usize) -> [f64; 2] {
        let x2 = if self.dim == 2 {
            self.origin[1] + j as f64 * self.h
        } else {
            0.0
        };
        [self.origin[0] + i as f64 * self.h, x2]
    }

    /// Integer lattice offset of the origin in units of h.
    pub fn lattice_origin(&self) -> [i64; 2] {
        [
            (self.origin[0] / self.h).round() as i64,
            (self.origin[1] / self.h).round() as i64,
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }
}

/// Active cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: Grid,
    active: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct MaskDoc {
    dim: usize,
    origin: [f64; 2],
    h: f64,
    extents: [usize; 2],
    active: Vec<[usize; 2]>,
}

impl DomainMask {
    pub fn new(grid: Grid, active: Vec<bool>) -> Result<Self> {
        if active.len() != grid.cell_count() {
            return Err(Error::Config("active vector length does not match grid".into()));
        }
        let m = DomainMask { grid, active };
        m.check_margin()?;
        Ok(m)
    }

    fn check_margin(&self) -> Result<()> {
        let [nx, ny] = self.grid.extents;
        for idx in self.active_indices() {
            let (i, j) = self.grid.coords(idx);
            let edge = i == 0 || i + 1 == nx || (self.grid.dim == 2 && (j == 0 || j + 1 == ny));
            if edge {
                return Err(Error::Config("active cell touches the grid border".into()));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn is_active(&self, i: usize, j: usize) -> bool {
        self.active[self.grid.index(i, j)]
    }

    /// Cell lookup with out-of-grid cells reported inactive.
    pub fn is_active_signed(&self, i: i64, j: i64) -> bool {
        let [nx, ny] = self.grid.extents;
        i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && self.is_active(i as usize, j as usize)
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.active
            .iter()
            .enumerate()
            .filter_map(|(k, &a)| a.then_some(k))
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn measure(&self) -> f64 {
        self.active_count() as f64 * self.grid.cell_volume()
    }

    /// Active cells per column (x1 index).
    pub fn column_counts(&self) -> Vec<usize> {
        let [nx, ny] = self.grid.extents;
        (0..nx)
            .map(|i| (0..ny).filter(|&j| self.is_active(i, j)).count())
            .collect()
    }

    /// Node (i, j) is admissible when every incident cell is active.
    pub fn node_admissible(&self, i: usize, j: usize) -> bool {
        let (i, j) = (i as i64, j as i64);
        if self.grid.dim == 1 {
            return self.is_active_signed(i - 1, 0) && self.is_active_signed(i, 0);
        }
        self.is_active_signed(i - 1, j - 1)
            && self.is_active_signed(i, j - 1)
            && self.is_active_signed(i - 1, j)
            && self.is_active_signed(i, j)
    }

    /// Set of active cells in absolute lattice coordinates.
    pub fn lattice_cells(&self) -> Vec<[i64; 2]> {
        let o = self.grid.lattice_origin();
        let mut v: Vec<[i64; 2]> = self
            .active_indices()
            .map(|k| {
                let (i, j) = self.grid.coords(k);
                [o[0] + i as i64, o[1] + j as i64]
            })
            .collect();
        v.sort();
        v
    }

    /// Same spacing and same active lattice cells, regardless of grid padding.
    pub fn same_cells(&self, other: &DomainMask) -> bool {
        self.grid.h == other.grid.h && self.lattice_cells() == other.lattice_cells()
    }

    pub fn to_json(&self) -> String {
        let mut runs = Vec::new();
        let mut k = 0;
        while k < self.active.len() {
            if self.active[k] {
                let start = k;
                while k < self.active.len() && self.active[k] {
                    k += 1;
                }
                runs.push([start, k - start]);
            } else {
                k += 1;
            }
        }
        let doc = MaskDoc {
            dim: self.grid.dim,
            origin: self.grid.origin,
            h: self.grid.h,
            extents: self.grid.extents,
            active: runs,
        };
        serde_json::to_string(&doc).expect("mask serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: MaskDoc =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("mask json: {e}")))?;
        let grid = Grid::new(doc.dim, doc.origin, doc.h, doc.extents)?;
        let mut active = vec![false; grid.cell_count()];
        for [start, len] in doc.active {
            if start + len > active.len() {
                return Err(Error::Config("mask run out of range".into()));
            }
            active[start..start + len].iter_mut().for_each(|a| *a = true);
        }
        DomainMask::new(grid, active)
    }
}

/// Cell-center rasterization on the lattice hZ^n with a one-cell margin.
pub fn rasterize(family: &DomainFamily, h: f64) -> Result<DomainMask> {
    rasterize_with_budget(family, h, crate::cell_budget())
}

pub fn rasterize_with_budget(family: &DomainFamily, h: f64, budget: usize) -> Result<DomainMask> {
    family.validate()?;
    if !(h > 0.0) {
        return Err(Error::Config("h must be positive".into()));
    }
    let feature = family.min_feature();
    if feature < 2.0 * h {
        return Err(Error::Resolution {
            feature,
            max_h: feature / 2.0,
            h,
        });
    }
    let (lo, hi) = family.bbox()?;
    let dim = family.dim();
    let i0 = (lo[0] / h).floor() as i64 - 1;
    let i1 = (hi[0] / h).ceil() as i64 + 1;
    let (j0, j1) = if dim == 2 {
        ((lo[1] / h).floor() as i64 - 1, (hi[1] / h).ceil() as i64 + 1)
    } else {
        (0, 1)
    };
    let nx = (i1 - i0) as usize;
    let ny = (j1 - j0) as usize;
    let needed = nx.saturating_mul(ny);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    let origin = [i0 as f64 * h, if dim == 2 { j0 as f64 * h } else { 0.0 }];
    let grid = Grid::new(dim, origin, h, [nx, ny])?;
    let active: Vec<bool> = (0..nx * ny)
        .map(|k| {
            let (i, j) = grid.coords(k);
            family.contains(grid.cell_center(i, j))
        })
        .collect();
    let mask = DomainMask::new(grid, active)?;
    if mask.active_count() == 0 {
        return Err(Error::Empty(format!("{} rasterized to no cells", family.name())));
    }
    Ok(mask)
}

/// Mask of t * Omega: same indices, spacing and origin scaled by t.
pub fn scale_mask(mask: &DomainMask, t: f64) -> Result<DomainMask> {
    if !(t > 0.0) {
        return Err(Error::Domain("scale factor must be positive".into()));
    }
    let g = &mask.grid;
    let grid = Grid::new(g.dim, [g.origin[0] * t, g.origin[1] * t], g.h * t, g.extents)?;
    Ok(DomainMask {
        grid,
        active: mask.active.clone(),
    })
}

/// Radius of the largest ball centered at an active cell center that stays
/// inside the active set, from an exact Euclidean distance transform.
pub fn finite_ball_radius(mask: &DomainMask) -> f64 {
    let [nx, ny] = mask.grid.extents;
    let seed: Vec<bool> = mask.active.iter().map(|&a| !a).collect();
    let d2 = squared_edt(&seed, nx, if mask.grid.dim == 2 { ny } else { 1 });
    let best = mask
        .active_indices()
        .map(|k| d2[k])
        .fold(0.0f64, f64::max);
    if best == 0.0 {
        return 0.0;
    }
    mask.grid.h * (best.sqrt() - 0.5)
}

/// Squared lattice distance from each point of an nx x ny array to the
/// nearest `true` entry.
fn squared_edt(seed: &[bool], nx: usize, ny: usize) -> Vec<f64> {
    let inf = 10.0 * ((nx * nx + ny * ny) as f64 + 1.0);
    let mut d2: Vec<f64> = seed.iter().map(|&b| if b { 0.0 } else { inf }).collect();
    let mut buf = vec![0.0; nx.max(ny)];
    for j in 0..ny {
        buf[..nx].copy_from_slice(&d2[j * nx..(j + 1) * nx]);
        d2[j * nx..(j + 1) * nx].copy_from_slice(&edt_1d(&buf[..nx]));
    }
    if ny > 1 {
        for i in 0..nx {
            for j in 0..ny {
                buf[j] = d2[j * nx + i];
            }
            let out = edt_1d(&buf[..ny]);
            for j in 0..ny {
                d2[j * nx + i] = out[j];
            }
        }
    }
    d2
}

/// Euclidean distance from every lattice node to the closure of the inactive
/// cells. The nearest point of a closed lattice cell to a node is one of its
/// corners, so this is the distance to the nearest non-admissible node.
pub fn node_boundary_distance(mask: &DomainMask) -> Vec<f64> {
    let [nx, ny] = mask.grid.node_extents();
    let seed: Vec<bool> = (0..nx * ny).map(|k| !mask.node_admissible(k % nx, k / nx)).collect();
    squared_edt(&seed, nx, ny).into_iter().map(|d| mask.grid.h * d.sqrt()).collect()
}

/// Squared distance transform of a sampled function (lower envelope of parabolas).
fn edt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let inter = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    for q in 1..n {
        let mut s = inter(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = inter(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut out = vec![0.0; n];
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
    out
}

/// Cylindrical rearrangement about the x1-axis: each column keeps its count
/// of active cells, placed as a contiguous run around x2 = 0.
pub fn symmetrize_cylindrical(mask: &DomainMask) -> Result<DomainMask> {
    if mask.dim() != 2 {
        return Err(Error::Domain("symmetrization needs a 2D mask".into()));
    }
    let counts = mask.column_counts();
    let mmax = counts.iter().copied().max().unwrap_or(0);
    let half = mmax.div_ceil(2) + 1;
    let ny = 2 * half;
    let g = &mask.grid;
    let grid = Grid::new(2, [g.origin[0], -(half as f64) * g.h], g.h, [g.extents[0], ny])?;
    let c0 = half;
    let mut active = vec![false; grid.cell_count()];
    for (i, &m) in counts.iter().enumerate() {
        let start = c0 - m / 2;
        for j in start..start + m {
            active[grid.index(i, j)] = true;
        }
    }
    DomainMask::new(grid, active)
}
