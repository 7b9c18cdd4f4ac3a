//! Regional correction: T_ij = int_Omega phi_i phi_j kappa(x) dx with
//! kappa(x) = int_{Omega^c} |x - y|^(-n-2s) dy, in lattice units.
//!
//! The complement is split into inactive grid cells (handled through
//! per-offset cell tables) and the exterior of the grid box (closed form).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::fft::Fft2;
use super::kernel::{box_exterior_2d, compose, eval, interval_exterior, j_moments, origin_cell_integral, overlap_piece, rule, Cubic, HKernel};
use crate::domain::DomainMask;

/// Local node pairs of a square cell; node a sits at (a & 1, a >> 1).
pub(crate) const PAIRS_2D: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

pub(crate) fn pair_index_2d(a: usize, b: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    PAIRS_2D.iter().position(|&p| p == (a, b)).expect("local pair")
}

pub(crate) fn pair_index_1d(a: usize, b: usize) -> usize {
    a + b
}

fn touches(node: i64, o: i64) -> bool {
    node == o || node == o + 1
}

fn gauss_order(dist: f64) -> usize {
    if dist < 2.0 {
        10
    } else if dist < 5.0 {
        8
    } else if dist < 16.0 {
        6
    } else {
        4
    }
}

fn cell_distance(m: i64) -> f64 {
    if m >= 0 {
        m as f64
    } else {
        (-(m + 1)) as f64
    }
}

/// Interaction of the local pairs of a cell with one cell at offset `o`.
pub(crate) fn offset_entries_1d(s: f64, o: i64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (e, &(a, b)) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
        if touches(a as i64, o) || touches(b as i64, o) {
            continue;
        }
        let mut sum = 0.0;
        for upper in [false, true] {
            let m = if upper { o } else { o - 1 };
            let p = overlap_piece(o, a, b, upper);
            if m == 0 || m == -1 {
                let sg = if m == 0 { 1.0 } else { -1.0 };
                let q = compose(&p, 0.0, sg);
                for (k, &c) in q.iter().enumerate() {
                    if (k as f64) - 2.0 * s > 0.0 {
                        sum += c / (k as f64 - 2.0 * s);
                    } else {
                        debug_assert!(c.abs() < 1e-12);
                    }
                }
            } else {
                let g = rule(gauss_order(cell_distance(m)).max(8));
                sum += g.integrate(m as f64, m as f64 + 1.0, |z| z.abs().powf(-1.0 - 2.0 * s) * eval(&p, z));
            }
        }
        out[e] = sum;
    }
    out
}

struct Offsets2d {
    s: f64,
    j: [f64; 7],
}

impl Offsets2d {
    fn entries(&self, o1: i64, o2: i64) -> [f64; 10] {
        let mut out = [0.0; 10];
        let live: Vec<bool> = PAIRS_2D
            .iter()
            .map(|&(a, b)| {
                let hit = |n: usize| touches((n & 1) as i64, o1) && touches((n >> 1) as i64, o2);
                !hit(a) && !hit(b)
            })
            .collect();
        if !live.iter().any(|&l| l) {
            return out;
        }
        for u1 in [false, true] {
            for u2 in [false, true] {
                let m1 = if u1 { o1 } else { o1 - 1 };
                let m2 = if u2 { o2 } else { o2 - 1 };
                // overlap cubics per axis, indexed by a_k + b_k
                let p1: [Cubic; 3] = [0, 1, 2].map(|k| overlap_piece(o1, k.min(1), k - k.min(1), u1));
                let p2: [Cubic; 3] = [0, 1, 2].map(|k| overlap_piece(o2, k.min(1), k - k.min(1), u2));
                let origin = (m1 == 0 || m1 == -1) && (m2 == 0 || m2 == -1);
                if origin {
                    let sg1 = if m1 == 0 { 1.0 } else { -1.0 };
                    let sg2 = if m2 == 0 { 1.0 } else { -1.0 };
                    let q1 = p1.map(|p| compose(&p, 0.0, sg1));
                    let q2 = p2.map(|p| compose(&p, 0.0, sg2));
                    for (e, &(a, b)) in PAIRS_2D.iter().enumerate() {
                        if !live[e] {
                            continue;
                        }
                        let (x, y) = (q1[(a & 1) + (b & 1)], q2[(a >> 1) + (b >> 1)]);
                        let mut c = [[0.0; 4]; 4];
                        for (i, ci) in c.iter_mut().enumerate() {
                            for (k, v) in ci.iter_mut().enumerate() {
                                *v = x[i] * y[k];
                            }
                        }
                        debug_assert!(c[0][0].abs() + c[1][0].abs() + c[0][1].abs() < 1e-12);
                        out[e] += origin_cell_integral(&c, self.s, &self.j);
                    }
                    continue;
                }
                let (d1, d2) = (cell_distance(m1), cell_distance(m2));
                let dist = (d1 * d1 + d2 * d2).sqrt();
                let n = gauss_order(dist);
                let split = if dist < 1.5 { 2 } else { 1 };
                let g = rule(n);
                let w = 1.0 / split as f64;
                for sa in 0..split {
                    for sb in 0..split {
                        let xa = m1 as f64 + sa as f64 * w;
                        let yb = m2 as f64 + sb as f64 * w;
                        for (x, wx) in g.mapped(xa, xa + w) {
                            let v1 = [eval(&p1[0], x), eval(&p1[1], x), eval(&p1[2], x)];
                            for (y, wy) in g.mapped(yb, yb + w) {
                                let k = wx * wy * (x * x + y * y).powf(-1.0 - self.s);
                                let v2 = [eval(&p2[0], y), eval(&p2[1], y), eval(&p2[2], y)];
                                for (e, &(a, b)) in PAIRS_2D.iter().enumerate() {
                                    if live[e] {
                                        out[e] += k * v1[(a & 1) + (b & 1)] * v2[(a >> 1) + (b >> 1)];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
pub(crate) fn offset_entries_2d(s: f64, o1: i64, o2: i64) -> [f64; 10] {
    Offsets2d { s, j: j_moments(s) }.entries(o1, o2)
}

/// Offset table on `-r..=r` per axis.
#[derive(Debug)]
pub(crate) struct OffsetTable {
    r: [usize; 2],
    values: Vec<[f64; 10]>,
}

impl OffsetTable {
    fn compute(dim: usize, s: f64, r: [usize; 2]) -> Self {
        let r = if dim == 1 { [r[0], 0] } else { r };
        let w = 2 * r[0] + 1;
        let h = 2 * r[1] + 1;
        let ctx = Offsets2d { s, j: j_moments(s) };
        let values = (0..w * h)
            .into_par_iter()
            .map(|k| {
                let o1 = (k % w) as i64 - r[0] as i64;
                let o2 = (k / w) as i64 - r[1] as i64;
                if dim == 1 {
                    let e = offset_entries_1d(s, o1);
                    let mut v = [0.0; 10];
                    v[..3].copy_from_slice(&e);
                    v
                } else {
                    ctx.entries(o1, o2)
                }
            })
            .collect();
        OffsetTable { r, values }
    }

    fn shared(dim: usize, s: f64, r: [usize; 2]) -> Arc<OffsetTable> {
        type Cache = Mutex<HashMap<(usize, u64), Arc<OffsetTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let r = if dim == 1 { [r[0], 0] } else { r };
        let cache = CACHE.get_or_init(Default::default);
        let key = (dim, s.to_bits());
        let prev = cache.lock().expect("offset cache").get(&key).cloned();
        if let Some(t) = &prev {
            if t.r[0] >= r[0] && t.r[1] >= r[1] {
                return t.clone();
            }
        }
        let want = match prev {
            Some(t) => [t.r[0].max(r[0]), t.r[1].max(r[1])],
            None => r,
        };
        let t = Arc::new(OffsetTable::compute(dim, s, want));
        cache.lock().expect("offset cache").insert(key, t.clone());
        t
    }

    fn get(&self, o1: i64, o2: i64) -> &[f64; 10] {
        let w = 2 * self.r[0] + 1;
        let i = (o1 + self.r[0] as i64) as usize;
        let j = (o2 + self.r[1] as i64) as usize;
        &self.values[j * w + i]
    }
}

/// Per-cell correction entries for every active cell (zeros elsewhere),
/// in lattice units, including the exterior of the grid box.
pub(crate) fn cell_corrections(mask: &DomainMask, s: f64) -> Vec<[f64; 10]> {
    let grid = mask.grid();
    let [nx, ny] = grid.extents;
    let dim = grid.dim;
    let table = OffsetTable::shared(dim, s, [nx - 1, ny - 1]);
    let mut cells = vec![[0.0; 10]; nx * ny];
    if dim == 1 {
        let inactive: Vec<i64> = (0..nx).filter(|&i| !mask.is_active(i, 0)).map(|i| i as i64).collect();
        cells.par_iter_mut().enumerate().for_each(|(k, c)| {
            if !mask.is_active(k, 0) {
                return;
            }
            for &q in &inactive {
                let e = table.get(q - k as i64, 0);
                for t in 0..3 {
                    c[t] += e[t];
                }
            }
        });
    } else {
        let plan = Fft2::for_convolution([nx, ny], [nx - 1, ny - 1]);
        let mut ind = vec![Complex64::default(); plan.len()];
        for j in 0..ny {
            for i in 0..nx {
                if !mask.is_active(i, j) {
                    ind[j * plan.lx + i].re = 1.0;
                }
            }
        }
        plan.forward(&mut ind);
        let norm = 1.0 / plan.len() as f64;
        for e in 0..10 {
            let spec = plan.kernel_spectrum([nx - 1, ny - 1], |d1, d2| table.get(-d1, -d2)[e]);
            let mut buf: Vec<Complex64> = ind.par_iter().zip(spec.par_iter()).map(|(a, b)| a * b).collect();
            plan.inverse(&mut buf);
            for j in 0..ny {
                for i in 0..nx {
                    if mask.is_active(i, j) {
                        cells[j * nx + i][e] = buf[j * plan.lx + i].re * norm;
                    }
                }
            }
        }
    }
    add_box_exterior(mask, s, &mut cells);
    cells
}

fn add_box_exterior(mask: &DomainMask, s: f64, cells: &mut [[f64; 10]]) {
    let grid = mask.grid();
    let [nx, ny] = grid.extents;
    let hk = HKernel::new(s);
    let l = |a: usize, x: f64| if a == 0 { 1.0 - x } else { x };
    cells.par_iter_mut().enumerate().for_each(|(k, c)| {
        let (i, j) = grid.coords(k);
        if !mask.is_active(i, j) {
            return;
        }
        if grid.dim == 1 {
            let d = i.min(nx - 1 - i) as f64;
            let g = rule(gauss_order(d));
            for (x, w) in g.mapped(0.0, 1.0) {
                let f = w * interval_exterior(i as f64 + x, 0.0, nx as f64, s);
                c[0] += f * l(0, x) * l(0, x);
                c[1] += f * l(0, x) * l(1, x);
                c[2] += f * l(1, x) * l(1, x);
            }
            return;
        }
        let d = i.min(nx - 1 - i).min(j).min(ny - 1 - j) as f64;
        let g = rule(gauss_order(d));
        for (x, wx) in g.mapped(0.0, 1.0) {
            for (y, wy) in g.mapped(0.0, 1.0) {
                let f = wx * wy * box_exterior_2d(&hk, [i as f64 + x, j as f64 + y], [0.0, 0.0], [nx as f64, ny as f64]);
                let phi = |a: usize| l(a & 1, x) * l(a >> 1, y);
                for (e, &(a, b)) in PAIRS_2D.iter().enumerate() {
                    c[e] += f * phi(a) * phi(b);
                }
            }
        }
    });
}

/// Nodal 3x3 rows of T for the given nodes (node-grid coordinates).
pub(crate) fn nodal_rows(mask: &DomainMask, cells: &[[f64; 10]], nodes: &[[usize; 2]]) -> Vec<[f64; 9]> {
    let grid = mask.grid();
    let nx = grid.extents[0];
    nodes
        .par_iter()
        .map(|&[i, j]| {
            let mut row = [0.0; 9];
            if grid.dim == 1 {
                for u in 0..2usize {
                    let kc = i + u - 1;
                    let a = 1 - u;
                    for b in 0..2usize {
                        let d = b as i64 - a as i64;
                        row[(3 + d + 1) as usize] += cells[kc][pair_index_1d(a, b)];
                    }
                }
                return row;
            }
            for v in 0..2usize {
                for u in 0..2usize {
                    let (ki, kj) = (i + u - 1, j + v - 1);
                    let c = &cells[kj * nx + ki];
                    let a = (1 - u) + 2 * (1 - v);
                    for b in 0..4usize {
                        let d1 = (b & 1) as i64 - (a & 1) as i64;
                        let d2 = (b >> 1) as i64 - (a >> 1) as i64;
                        row[((d2 + 1) * 3 + d1 + 1) as usize] += c[pair_index_2d(a, b)];
                    }
                }
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn one_dimensional_entries_match_direct_double_integral() {
        let s = 0.6;
        let l = |a: usize, x: f64| if a == 0 { 1.0 - x } else { x };
        for o in [-3i64, -2, 2, 5] {
            let e = offset_entries_1d(s, o);
            for (k, &(a, b)) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
                if touches(a as i64, o) || touches(b as i64, o) {
                    assert_eq!(e[k], 0.0);
                    continue;
                }
                let f = |x: f64| {
                    let g = |y: f64| (x - y).abs().powf(-1.0 - 2.0 * s);
                    l(a, x) * l(b, x) * quad::adaptive(&g, o as f64, o as f64 + 1.0, 1e-13)
                };
                let d = quad::adaptive(&f, 0.0, 1.0, 1e-12);
                assert!((e[k] - d).abs() < 1e-9 * d.abs().max(1e-3), "o={o} {k}: {} vs {d}", e[k]);
            }
        }
    }

    #[test]
    fn one_dimensional_adjacent_entry() {
        // cell to the right, pair (0,0): int_0^1 (1-x)^2 int_1^2 |x-y|^(-1-2s)
        let s = 0.3;
        let e = offset_entries_1d(s, 1);
        let f = |_x: f64, _da: f64, db: f64| db * db * (db.powf(-2.0 * s) - (1.0 + db).powf(-2.0 * s)) / (2.0 * s);
        let d = quad::tanh_sinh(&f, 0.0, 1.0, 1e-13);
        assert!((e[0] - d).abs() < 1e-11, "{} {d}", e[0]);
    }

    #[test]
    fn two_dimensional_entries_match_nested_quadrature() {
        let s = 0.4;
        let l = |a: usize, x: f64| if a == 0 { 1.0 - x } else { x };
        let phi = |a: usize, x: f64, y: f64| l(a & 1, x) * l(a >> 1, y);
        for (o1, o2) in [(2i64, 0i64), (-2, 1), (1, 2), (3, -3)] {
            let e = offset_entries_2d(s, o1, o2);
            for (k, &(a, b)) in PAIRS_2D.iter().enumerate() {
                // x in the unit cell, y in the offset cell
                let g = GaussPairs::new(12);
                let mut d = 0.0;
                for &(x1, w1) in &g.pts {
                    for &(x2, w2) in &g.pts {
                        for &(y1, v1) in &g.pts {
                            for &(y2, v2) in &g.pts {
                                let r2 = (x1 - y1 - o1 as f64).powi(2) + (x2 - y2 - o2 as f64).powi(2);
                                d += w1 * w2 * v1 * v2 * phi(a, x1, x2) * phi(b, x1, x2) * r2.powf(-1.0 - s);
                            }
                        }
                    }
                }
                let hit = |n: usize| touches((n & 1) as i64, o1) && touches((n >> 1) as i64, o2);
                if hit(a) || hit(b) {
                    assert_eq!(e[k], 0.0);
                } else {
                    assert!((e[k] - d).abs() < 1e-6 * d, "o=({o1},{o2}) pair {k}: {} vs {d}", e[k]);
                }
            }
        }
    }

    struct GaussPairs {
        pts: Vec<(f64, f64)>,
    }

    impl GaussPairs {
        fn new(n: usize) -> Self {
            let g = crate::quad::GaussRule::new(n);
            GaussPairs { pts: g.mapped(0.0, 1.0).collect() }
        }
    }

    #[test]
    fn two_dimensional_corner_entry() {
        // diagonal neighbour: pairs involving the shared corner node vanish
        let s = 0.5;
        let e = offset_entries_2d(s, 1, 1);
        let live: Vec<usize> = (0..10).filter(|&k| e[k] != 0.0).collect();
        assert_eq!(live, vec![0, 1, 2, 4, 5, 7]);
        // polar-free oracle: y = (1,1) + eta, x = xi, integrand (1-x1)^2 (1-x2)^2
        let f = |x1: f64| {
            let g = |x2: f64| {
                let h = |y1: f64| {
                    let p1 = 1.0 + y1 - x1;
                    // inner closed form in y2 through H
                    let hk = HKernel::new(s);
                    let a = (1.0 - x2) / p1;
                    let b = (2.0 - x2) / p1;
                    p1.powf(-1.0 - 2.0 * s) * (hk.h(b) - hk.h(a))
                };
                (1.0 - x2).powi(2) * quad::adaptive(&h, 0.0, 1.0, 1e-11)
            };
            (1.0 - x1).powi(2) * quad::adaptive(&g, 0.0, 1.0, 1e-10)
        };
        let d = quad::adaptive(&f, 0.0, 1.0, 1e-9);
        assert!((e[0] - d).abs() < 1e-7, "{} vs {d}", e[0]);
    }
}
