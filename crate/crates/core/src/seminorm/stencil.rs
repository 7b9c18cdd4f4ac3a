//! Translation-invariant part of the stiffness matrix on a uniform lattice.
//!
//! `S(d)` is the interaction between two hat functions whose nodes differ by
//! the integer offset `d`, for unit spacing and without the normalization
//! constant:  S(d) = 1/2 int |z|^(-n-2s) (2R(d) - R(z+d) - R(z-d)) dz,
//! with R the autocorrelation of the unit hat.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::kernel::{compose, j_moments, origin_cell_integral, r1, r1_segment, rule, Cubic, HKernel};
use crate::quad::power_moment;

/// Reference stencil on the quadrant `0..=dmax[0]` x `0..=dmax[1]`.
#[derive(Debug, Clone)]
pub struct Stencil {
    dim: usize,
    s: f64,
    dmax: [usize; 2],
    values: Vec<f64>,
}

impl Stencil {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dmax(&self) -> [usize; 2] {
        self.dmax
    }

    /// S at a signed offset; zero offsets outside the table are not allowed.
    pub fn get(&self, d1: i64, d2: i64) -> f64 {
        let a = d1.unsigned_abs() as usize;
        let b = d2.unsigned_abs() as usize;
        debug_assert!(a <= self.dmax[0] && b <= self.dmax[1]);
        self.values[b * (self.dmax[0] + 1) + a]
    }

    fn covers(&self, dmax: [usize; 2]) -> bool {
        self.dmax[0] >= dmax[0] && self.dmax[1] >= dmax[1]
    }

    /// Computes the table directly.
    pub fn compute(dim: usize, s: f64, dmax: [usize; 2]) -> Self {
        let dmax = if dim == 1 { [dmax[0], 0] } else { dmax };
        let w = dmax[0] + 1;
        let values: Vec<f64> = if dim == 1 {
            (0..=dmax[0]).into_par_iter().map(|d| stencil_1d(s, d as i64)).collect()
        } else {
            let near = Near2d::new(s);
            // octant values, then mirrored into the quadrant
            let m = dmax[0].max(dmax[1]);
            let oct: Vec<(usize, usize)> = (0..=m)
                .flat_map(|a| (0..=a).map(move |b| (a, b)))
                .filter(|&(a, b)| (a <= dmax[0] && b <= dmax[1]) || (b <= dmax[0] && a <= dmax[1]))
                .collect();
            let vals: Vec<f64> = oct.par_iter().map(|&(a, b)| near.value(a as i64, b as i64)).collect();
            let mut table = vec![0.0; w * (dmax[1] + 1)];
            for (&(a, b), &v) in oct.iter().zip(&vals) {
                if a <= dmax[0] && b <= dmax[1] {
                    table[b * w + a] = v;
                }
                if b <= dmax[0] && a <= dmax[1] {
                    table[a * w + b] = v;
                }
            }
            table
        };
        Stencil { dim, s, dmax, values }
    }

    /// Cached table covering at least `dmax`.
    pub fn shared(dim: usize, s: f64, dmax: [usize; 2]) -> Arc<Stencil> {
        type Cache = Mutex<HashMap<(usize, u64), Arc<Stencil>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let dmax = if dim == 1 { [dmax[0], 0] } else { dmax };
        let cache = CACHE.get_or_init(Default::default);
        let key = (dim, s.to_bits());
        if let Some(st) = cache.lock().expect("stencil cache").get(&key) {
            if st.covers(dmax) {
                return st.clone();
            }
        }
        let prev = cache.lock().expect("stencil cache").get(&key).map(|st| st.dmax);
        let want = match prev {
            Some(p) => [p[0].max(dmax[0]), p[1].max(dmax[1])],
            None => dmax,
        };
        let st = Arc::new(Stencil::compute(dim, s, want));
        cache.lock().expect("stencil cache").insert(key, st.clone());
        st
    }
}

fn gauss_order(dist: f64) -> usize {
    if dist < 2.0 {
        10
    } else if dist < 8.0 {
        8
    } else if dist < 32.0 {
        6
    } else {
        4
    }
}

/// One-dimensional S(d), d >= 0.
pub(crate) fn stencil_1d(s: f64, d: i64) -> f64 {
    let d = d.abs();
    let kern = |z: f64| z.abs().powf(-1.0 - 2.0 * s);
    if d >= 3 {
        let mut sum = 0.0;
        for m in -2..2 {
            let a = (d + m) as f64;
            let g = rule(12);
            sum += g.integrate(a, a + 1.0, |z| kern(z) * r1(z - d as f64));
        }
        return -sum;
    }
    let df = d as f64;
    let zmax = d + 2;
    let mut sum = 0.0;
    for m in 0..zmax {
        let mut psi: Cubic = [0.0; 4];
        psi[0] = 2.0 * r1(df);
        for (shift, sign) in [(df, 1i64), (-df, -1i64)] {
            let k = m + sign * d;
            let p = compose(&r1_segment(k), shift, 1.0);
            for i in 0..4 {
                psi[i] -= p[i];
            }
        }
        for (a, &c) in psi.iter().enumerate() {
            if m == 0 {
                if a < 2 {
                    debug_assert!(c.abs() < 1e-12);
                    continue;
                }
                sum += c / (a as f64 - 2.0 * s);
            } else {
                sum += c * power_moment(a as f64 - 2.0 * s, m as f64, m as f64 + 1.0);
            }
        }
    }
    sum + 2.0 * r1(df) * (zmax as f64).powf(-2.0 * s) / (2.0 * s)
}

struct Near2d {
    s: f64,
    j: [f64; 7],
    h1: f64,
}

impl Near2d {
    fn new(s: f64) -> Self {
        Near2d {
            s,
            j: j_moments(s),
            h1: HKernel::new(s).h(1.0),
        }
    }

    fn kern(&self, z1: f64, z2: f64) -> f64 {
        (z1 * z1 + z2 * z2).powf(-1.0 - self.s)
    }

    fn cell_gauss<F: Fn(f64, f64) -> f64>(&self, x0: f64, y0: f64, n: usize, split: usize, f: &F) -> f64 {
        let g = rule(n);
        let w = 1.0 / split as f64;
        let mut sum = 0.0;
        for a in 0..split {
            for b in 0..split {
                let xa = x0 + a as f64 * w;
                let yb = y0 + b as f64 * w;
                for (x, wx) in g.mapped(xa, xa + w) {
                    for (y, wy) in g.mapped(yb, yb + w) {
                        sum += wx * wy * self.kern(x, y) * f(x, y);
                    }
                }
            }
        }
        sum
    }

    /// S(d1, d2) for 0 <= d2 <= d1.
    fn value(&self, d1: i64, d2: i64) -> f64 {
        if d1 >= 3 {
            return self.far(d1, d2);
        }
        let s = self.s;
        let (f1, f2) = (d1 as f64, d2 as f64);
        let rd = r1(f1) * r1(f2);
        let psi = |z1: f64, z2: f64| 2.0 * rd - r1(z1 + f1) * r1(z2 + f2) - r1(z1 - f1) * r1(z2 - f2);
        let zmax = d1 + 2;
        let mut sum = 0.0;
        for m1 in -zmax..zmax {
            for m2 in -zmax..zmax {
                let origin = (m1 == 0 || m1 == -1) && (m2 == 0 || m2 == -1);
                if origin {
                    sum += self.origin_cell(d1, d2, m1, m2, rd);
                    continue;
                }
                let (x0, y0) = (m1 as f64, m2 as f64);
                let dx = if m1 >= 0 { x0 } else { -(x0 + 1.0) };
                let dy = if m2 >= 0 { y0 } else { -(y0 + 1.0) };
                let dist = (dx * dx + dy * dy).sqrt();
                let split = if dist < 1.5 { 2 } else { 1 };
                sum += self.cell_gauss(x0, y0, 10, split, &psi);
            }
        }
        let tail = 2.0 * rd * (zmax as f64).powf(-2.0 * s) / (2.0 * s) * 8.0 * self.h1;
        0.5 * (sum + tail)
    }

    fn origin_cell(&self, d1: i64, d2: i64, m1: i64, m2: i64, rd: f64) -> f64 {
        let sg1 = if m1 == 0 { 1.0 } else { -1.0 };
        let sg2 = if m2 == 0 { 1.0 } else { -1.0 };
        // R1(sigma t + shift) on t in [0,1] as a cubic in t
        let piece = |shift: i64, sg: f64| -> Cubic {
            let k = if sg > 0.0 { shift } else { shift - 1 };
            compose(&r1_segment(k), shift as f64, sg)
        };
        let p1 = piece(d1, sg1);
        let p2 = piece(d2, sg2);
        let q1 = piece(-d1, sg1);
        let q2 = piece(-d2, sg2);
        let mut c = [[0.0; 4]; 4];
        c[0][0] = 2.0 * rd;
        for a in 0..4 {
            for b in 0..4 {
                c[a][b] -= p1[a] * p2[b] + q1[a] * q2[b];
            }
        }
        debug_assert!(c[0][0].abs() + c[1][0].abs() + c[0][1].abs() < 1e-12);
        origin_cell_integral(&c, self.s, &self.j)
    }

    fn far(&self, d1: i64, d2: i64) -> f64 {
        let (f1, f2) = (d1 as f64, d2 as f64);
        let w = |z1: f64, z2: f64| r1(z1 - f1) * r1(z2 - f2);
        let mut sum = 0.0;
        for m1 in -2..2 {
            for m2 in -2..2 {
                let x0 = f1 + m1 as f64;
                let y0 = f2 + m2 as f64;
                let dx = if x0 >= 0.0 { x0 } else { -(x0 + 1.0) }.max(0.0);
                let dy = if y0 >= 0.0 { y0 } else { -(y0 + 1.0) }.max(0.0);
                let dist = (dx * dx + dy * dy).sqrt();
                sum += self.cell_gauss(x0, y0, gauss_order(dist), 1, &w);
            }
        }
        -sum
    }
}

/// Two-dimensional S(d1, d2) for arbitrary signed offsets.
#[cfg(test)]
pub(crate) fn stencil_2d(s: f64, d1: i64, d2: i64) -> f64 {
    let (a, b) = (d1.abs(), d2.abs());
    Near2d::new(s).value(a.max(b), a.min(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{theta_mn, ReductionParams};

    // independent high-precision evaluation of the 1D integral
    const ORACLE_1D: [(f64, [f64; 5]); 3] = [
        (
            0.25,
            [
                3.5346223989170777498,
                -0.041557045172933481685,
                -0.44021714722698815546,
                -0.20797221520576482146,
                -0.09179181389264757622,
            ],
        ),
        (
            0.5,
            [
                2.7725887222397812377,
                -0.60142214547306886406,
                -0.36690014034750578143,
                -0.12609130085084592786,
                -0.041703956837262179785,
            ],
        ),
        (
            0.75,
            [
                4.165592445346879653,
                -1.5687891977277715381,
                -0.33058321360108989029,
                -0.077414977340407778002,
                -0.019017063744324532683,
            ],
        ),
    ];

    #[test]
    fn one_dimensional_values() {
        for (s, vals) in ORACLE_1D {
            for (k, d) in [0, 1, 2, 3, 5].into_iter().enumerate() {
                let v = stencil_1d(s, d);
                assert!((v - vals[k]).abs() < 1e-11 * vals[k].abs().max(1.0), "s={s} d={d}: {v} vs {}", vals[k]);
            }
        }
    }

    #[test]
    fn one_dimensional_sum_vanishes() {
        for s in [0.25, 0.5, 0.75] {
            let n = 4000i64;
            let mut sum = stencil_1d(s, 0);
            for d in 1..=n {
                sum += 2.0 * stencil_1d(s, d);
            }
            // far field: S(d) ~ -d^(-1-2s)
            let tail = 2.0 * (n as f64 + 0.5).powf(-2.0 * s) / (2.0 * s);
            assert!((sum - tail).abs() < 1e-6, "s={s}: {sum} vs {tail}");
        }
    }

    #[test]
    fn two_dimensional_far_matches_kernel() {
        let s = 0.6;
        let d = 40;
        let v = stencil_2d(s, d, 7);
        // kernel plus the second-moment correction of the hat autocorrelation
        let r2 = (d * d + 49) as f64;
        let alpha = 2.0 + 2.0 * s;
        let k = r2.powf(-alpha / 2.0) * (1.0 + alpha * alpha / (6.0 * r2));
        assert!((v + k).abs() < 1e-5 * k, "{v} {k}");
    }

    #[test]
    fn column_sums_reduce_to_one_dimension() {
        // sum over d2 of S2(d1, d2) equals Theta_{1,2} S1(d1)
        for s in [0.25, 0.75] {
            let theta = theta_mn(ReductionParams::new(1, 2, s).unwrap());
            let n = 400usize;
            let st = Stencil::compute(2, s, [3, n]);
            for d1 in 0..=3i64 {
                let mut sum = st.get(d1, 0);
                for d2 in 1..=n as i64 {
                    sum += 2.0 * st.get(d1, d2);
                }
                // remaining tail: -2 int_{n+1/2}^inf (d1^2 + t^2)^(-1-s) dt
                let g = rule(20);
                let t0 = n as f64 + 0.5;
                let tail = -2.0 * g.integrate(0.0, 1.0, |u| {
                    let t = t0 / u;
                    ((d1 * d1) as f64 + t * t).powf(-1.0 - s) * t0 / (u * u)
                });
                let lhs = sum + tail;
                let rhs = theta * stencil_1d(s, d1);
                assert!((lhs - rhs).abs() < 2e-6 * rhs.abs().max(1.0), "s={s} d1={d1}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn table_is_octant_symmetric() {
        let st = Stencil::compute(2, 0.4, [6, 4]);
        for a in 0..=4i64 {
            for b in 0..=4i64 {
                assert_eq!(st.get(a, b), st.get(b, a));
                assert_eq!(st.get(-a, b), st.get(a, -b));
            }
        }
        assert!(st.get(0, 0) > 0.0);
    }
}
