use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::exterior::{cell_corrections, nodal_rows};
use super::fft::Fft2;
use super::stencil::Stencil;
use crate::domain::{DomainMask, Grid};
use crate::error::{Error, Result};
use crate::specfun::{c_ns, FracParams};

/// Largest node count for which dense matrices are materialized.
pub const DENSE_LIMIT: usize = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Regional,
    Restricted,
}

/// Piecewise-linear function given by its values on the node lattice of a
/// mask, extended by zero.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    mask: Arc<DomainMask>,
    values: Vec<f64>,
}

impl SampledFunction {
    /// Values on the full node lattice, row-major in (i, j).
    pub fn new(mask: Arc<DomainMask>, values: Vec<f64>) -> Result<Self> {
        let [nx, ny] = mask.grid().node_extents();
        if values.len() != nx * ny {
            return Err(Error::Config("node value count does not match the lattice".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite node value".into()));
        }
        Ok(SampledFunction { mask, values })
    }

    pub fn zeros(mask: Arc<DomainMask>) -> Self {
        let [nx, ny] = mask.grid().node_extents();
        SampledFunction {
            mask,
            values: vec![0.0; nx * ny],
        }
    }

    /// Samples `f` on admissible nodes and sets every other node to zero.
    pub fn compactly_supported<F: Fn([f64; 2]) -> f64>(mask: Arc<DomainMask>, f: F) -> Result<Self> {
        let grid = mask.grid().clone();
        let [nx, ny] = grid.node_extents();
        let mut values = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                if mask.node_admissible(i, j) {
                    values[j * nx + i] = f(grid.node_position(i, j));
                }
            }
        }
        SampledFunction::new(mask, values)
    }

    pub fn mask(&self) -> &Arc<DomainMask> {
        &self.mask
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.mask.grid().node_extents()[0] + i]
    }

    /// True when every non-admissible node carries zero.
    pub fn is_compactly_supported(&self) -> bool {
        let [nx, ny] = self.mask.grid().node_extents();
        (0..ny).all(|j| (0..nx).all(|i| self.values[j * nx + i] == 0.0 || self.mask.node_admissible(i, j)))
    }

    /// Lumped L2 norm squared.
    pub fn l2_norm2(&self) -> f64 {
        let g = self.mask.grid();
        let [nx, _] = g.node_extents();
        let vol = g.cell_volume();
        let mut sum = 0.0;
        for (k, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let (i, j) = ((k % nx) as i64, (k / nx) as i64);
            let incident: Vec<(i64, i64)> = if g.dim == 1 {
                vec![(i - 1, 0), (i, 0)]
            } else {
                vec![(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)]
            };
            let frac = incident.iter().filter(|&&(a, b)| self.mask.is_active_signed(a, b)).count() as f64 / incident.len() as f64;
            sum += frac * v * v;
        }
        sum * vol
    }
}

/// Stiffness operator A and lumped mass M over the admissible nodes of a mask.
///
/// A = C h^(n-2s) (S - T), where S is the full-space lattice stencil applied
/// by FFT convolution and T the sparse regional correction (absent for the
/// restricted kind). M = h^n I.
#[derive(Debug, Clone)]
pub struct QuadForm {
    kind: FormKind,
    params: FracParams,
    grid: Grid,
    nodes: Vec<[usize; 2]>,
    lookup: Vec<u32>,
    node_ext: [usize; 2],
    sub_origin: [usize; 2],
    sub_ext: [usize; 2],
    stencil: Arc<Stencil>,
    plan: Arc<Fft2>,
    spectrum: Arc<Vec<Complex64>>,
    correction: Vec<[f64; 9]>,
    scale: f64,
    mass: f64,
}

fn admissible_nodes(mask: &DomainMask) -> Vec<[usize; 2]> {
    let [nx, ny] = mask.grid().node_extents();
    let mut v = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if mask.node_admissible(i, j) {
                v.push([i, j]);
            }
        }
    }
    v
}

fn build(mask: &DomainMask, p: FracParams, kind: FormKind) -> Result<QuadForm> {
    let grid = mask.grid().clone();
    if p.n() as usize != grid.dim {
        return Err(Error::Config(format!("form dimension {} does not match mask dimension {}", p.n(), grid.dim)));
    }
    let nodes = admissible_nodes(mask);
    if nodes.is_empty() {
        return Err(Error::Empty("mask has no admissible nodes".into()));
    }
    let budget = crate::cell_budget();
    if nodes.len() > budget {
        return Err(Error::Budget {
            needed: nodes.len(),
            budget,
        });
    }
    let s = p.s();
    let node_ext = grid.node_extents();
    let mut lookup = vec![0u32; node_ext[0] * node_ext[1]];
    for (k, &[i, j]) in nodes.iter().enumerate() {
        lookup[j * node_ext[0] + i] = k as u32 + 1;
    }
    let lo = [nodes.iter().map(|n| n[0]).min().unwrap_or(0), nodes.iter().map(|n| n[1]).min().unwrap_or(0)];
    let hi = [nodes.iter().map(|n| n[0]).max().unwrap_or(0), nodes.iter().map(|n| n[1]).max().unwrap_or(0)];
    let sub_ext = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1];
    let r = [sub_ext[0] - 1, sub_ext[1] - 1];
    let stencil = Stencil::shared(grid.dim, s, r);
    let plan = Fft2::for_convolution(sub_ext, r);
    let spectrum = plan.kernel_spectrum(r, |a, b| stencil.get(a, b));
    let correction = match kind {
        FormKind::Regional => nodal_rows(mask, &cell_corrections(mask, s), &nodes),
        FormKind::Restricted => Vec::new(),
    };
    let n = grid.dim as f64;
    let h = grid.h;
    Ok(QuadForm {
        kind,
        params: p,
        scale: c_ns(p) * h.powf(n - 2.0 * s),
        mass: h.powi(grid.dim as i32),
        grid,
        nodes,
        lookup,
        node_ext,
        sub_origin: lo,
        sub_ext,
        stencil,
        plan: Arc::new(plan),
        spectrum: Arc::new(spectrum),
        correction,
    })
}

/// Regional form over Omega x Omega for nodal functions vanishing on the
/// discrete boundary of the mask.
pub fn assemble_regional(mask: &DomainMask, p: FracParams) -> Result<QuadForm> {
    build(mask, p, FormKind::Regional)
}

/// Axis box enclosing a mask for the restricted form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnclosingBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl EnclosingBox {
    /// Box around the mask's active cells padded by one diameter.
    pub fn around(mask: &DomainMask) -> Self {
        let (lo, hi) = active_bbox(mask);
        let d = diameter(lo, hi);
        let dim = mask.dim();
        let mut b = EnclosingBox {
            lo: [lo[0] - d, lo[1] - d],
            hi: [hi[0] + d, hi[1] + d],
        };
        if dim == 1 {
            b.lo[1] = 0.0;
            b.hi[1] = 0.0;
        }
        b
    }
}

fn active_bbox(mask: &DomainMask) -> ([f64; 2], [f64; 2]) {
    let g = mask.grid();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for k in mask.active_indices() {
        let (i, j) = g.coords(k);
        let c = g.cell_center(i, j);
        for a in 0..g.dim {
            lo[a] = lo[a].min(c[a] - 0.5 * g.h);
            hi[a] = hi[a].max(c[a] + 0.5 * g.h);
        }
    }
    if g.dim == 1 {
        lo[1] = 0.0;
        hi[1] = 0.0;
    }
    (lo, hi)
}

fn diameter(lo: [f64; 2], hi: [f64; 2]) -> f64 {
    ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
}

/// Full-space form [u]^2 over R^n x R^n for u supported in the mask.
///
/// The box only has to contain the mask with a margin of one diameter; the
/// lattice stencil already accounts for every interaction outside it.
pub fn assemble_restricted(mask: &DomainMask, p: FracParams, enclosing: &EnclosingBox) -> Result<QuadForm> {
    let (lo, hi) = active_bbox(mask);
    let d = diameter(lo, hi);
    let tol = 1e-9 * d.max(1.0);
    for a in 0..mask.dim() {
        if enclosing.lo[a] > lo[a] - d + tol || enclosing.hi[a] < hi[a] + d - tol {
            return Err(Error::Config("enclosing box does not contain the mask with a margin of one diameter".into()));
        }
    }
    build(mask, p, FormKind::Restricted)
}

/// Restricted form with the default enclosing box.
pub fn restricted_form(mask: &DomainMask, p: FracParams) -> Result<QuadForm> {
    build(mask, p, FormKind::Restricted)
}

impl QuadForm {
    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn params(&self) -> FracParams {
        self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    /// Number of unknowns.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node-lattice coordinates of the unknowns.
    pub fn nodes(&self) -> &[[usize; 2]] {
        &self.nodes
    }

    /// Unknown index of a lattice node, if admissible.
    pub fn node_index(&self, i: usize, j: usize) -> Option<usize> {
        match self.lookup.get(j * self.node_ext[0] + i) {
            Some(&k) if k > 0 => Some(k as usize - 1),
            _ => None,
        }
    }

    pub fn node_position(&self, k: usize) -> [f64; 2] {
        let [i, j] = self.nodes[k];
        self.grid.node_position(i, j)
    }

    /// Diagonal entry of the lumped mass matrix (h^n).
    pub fn mass_weight(&self) -> f64 {
        self.mass
    }

    /// y = A x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nodes.len());
        let [sx, sy] = self.sub_ext;
        let [ox, oy] = self.sub_origin;
        let mut grid = vec![0.0; sx * sy];
        for (k, &[i, j]) in self.nodes.iter().enumerate() {
            grid[(j - oy) * sx + (i - ox)] = x[k];
        }
        let conv = self.plan.convolve(&self.spectrum, self.sub_ext, &grid);
        let mut y: Vec<f64> = self.nodes.iter().map(|&[i, j]| conv[(j - oy) * sx + (i - ox)]).collect();
        if !self.correction.is_empty() {
            for (k, &[i, j]) in self.nodes.iter().enumerate() {
                let row = &self.correction[k];
                let mut acc = 0.0;
                for (t, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let di = (t % 3) as i64 - 1;
                    let dj = (t / 3) as i64 - 1;
                    let (qi, qj) = (i as i64 + di, j as i64 + dj);
                    if qi < 0 || qj < 0 {
                        continue;
                    }
                    if let Some(q) = self.node_index(qi as usize, qj as usize) {
                        acc += w * x[q];
                    }
                }
                y[k] -= acc;
            }
        }
        for v in y.iter_mut() {
            *v *= self.scale;
        }
        y
    }

    /// x^T A x.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let y = self.apply(x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// x^T M x.
    pub fn mass_norm2(&self, x: &[f64]) -> f64 {
        self.mass * x.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        self.energy(x) / self.mass_norm2(x)
    }

    /// Unknown vector of a function vanishing off the admissible nodes.
    pub fn restrict(&self, u: &SampledFunction) -> Result<Vec<f64>> {
        if u.mask().grid() != &self.grid {
            return Err(Error::Config("function lives on a different lattice".into()));
        }
        if !u.is_compactly_supported() {
            return Err(Error::Domain("function is nonzero on non-admissible nodes".into()));
        }
        Ok(self.nodes.iter().map(|&[i, j]| u.value(i, j)).collect())
    }

    /// Function with the given unknowns on the node lattice of `mask`.
    pub fn extend(&self, mask: Arc<DomainMask>, x: &[f64]) -> Result<SampledFunction> {
        let mut u = SampledFunction::zeros(mask);
        if u.mask().grid() != &self.grid {
            return Err(Error::Config("mask lives on a different lattice".into()));
        }
        let nx = self.node_ext[0];
        for (k, &[i, j]) in self.nodes.iter().enumerate() {
            u.values_mut()[j * nx + i] = x[k];
        }
        Ok(u)
    }

    /// Seminorm squared of a sampled function.
    pub fn energy_of(&self, u: &SampledFunction) -> Result<f64> {
        Ok(self.energy(&self.restrict(u)?))
    }

    /// Entry A_kl.
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        let [i, j] = self.nodes[k];
        let [p, q] = self.nodes[l];
        let d1 = p as i64 - i as i64;
        let d2 = q as i64 - j as i64;
        let mut v = self.stencil.get(d1, d2);
        if !self.correction.is_empty() && d1.abs() <= 1 && d2.abs() <= 1 {
            v -= self.correction[k][((d2 + 1) * 3 + d1 + 1) as usize];
        }
        self.scale * v
    }

    /// Dense A and the diagonal of M.
    pub fn to_dense(&self) -> Result<DenseForm> {
        let n = self.nodes.len();
        if n > DENSE_LIMIT {
            return Err(Error::Budget {
                needed: n,
                budget: DENSE_LIMIT,
            });
        }
        let a = DMatrix::from_fn(n, n, |k, l| {
            if k >= l {
                self.entry(k, l)
            } else {
                self.entry(l, k)
            }
        });
        Ok(DenseForm {
            dim: self.grid.dim as u32,
            s: self.params.s(),
            kind: self.kind,
            a,
            m: DVector::from_element(n, self.mass),
        })
    }

    /// Binary container: dim u32, s f64, kind u32, node count u64, lower
    /// triangle of A row by row, diagonal of M; little endian.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        self.to_dense()?.write_binary(w)
    }
}

/// Explicit (A, diag M) pair, also used for small synthetic pencils.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseForm {
    pub dim: u32,
    pub s: f64,
    pub kind: FormKind,
    pub a: DMatrix<f64>,
    pub m: DVector<f64>,
}

impl DenseForm {
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        let n = self.a.nrows();
        w.write_all(&self.dim.to_le_bytes())?;
        w.write_all(&self.s.to_le_bytes())?;
        let kind: u32 = match self.kind {
            FormKind::Regional => 0,
            FormKind::Restricted => 1,
        };
        w.write_all(&kind.to_le_bytes())?;
        w.write_all(&(n as u64).to_le_bytes())?;
        for k in 0..n {
            for l in 0..=k {
                w.write_all(&self.a[(k, l)].to_le_bytes())?;
            }
        }
        for k in 0..n {
            w.write_all(&self.m[k].to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4);
        r.read_exact(&mut b8)?;
        let s = f64::from_le_bytes(b8);
        r.read_exact(&mut b4)?;
        let kind = match u32::from_le_bytes(b4) {
            0 => FormKind::Regional,
            1 => FormKind::Restricted,
            k => return Err(Error::Config(format!("unknown form kind {k}"))),
        };
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n > DENSE_LIMIT {
            return Err(Error::Budget {
                needed: n,
                budget: DENSE_LIMIT,
            });
        }
        let mut a = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in 0..=k {
                r.read_exact(&mut b8)?;
                let v = f64::from_le_bytes(b8);
                a[(k, l)] = v;
                a[(l, k)] = v;
            }
        }
        let mut m = DVector::zeros(n);
        for k in 0..n {
            r.read_exact(&mut b8)?;
            m[k] = f64::from_le_bytes(b8);
        }
        Ok(DenseForm { dim, s, kind, a, m })
    }
}
