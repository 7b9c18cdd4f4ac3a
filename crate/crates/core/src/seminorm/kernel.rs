//! Piecewise polynomials of the hat basis and closed-form pieces of the
//! kernel |z|^(-n-2s).

use std::sync::OnceLock;

use crate::quad::GaussRule;
use crate::specfun::beta_fn;

pub(crate) type Cubic = [f64; 4];

pub(crate) fn rule(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=24).map(|k| GaussRule::new(k.max(1))).collect());
    &rules[n]
}

pub(crate) fn eval(p: &Cubic, z: f64) -> f64 {
    ((p[3] * z + p[2]) * z + p[1]) * z + p[0]
}

/// q(z) = p(alpha + beta z)
pub(crate) fn compose(p: &Cubic, alpha: f64, beta: f64) -> Cubic {
    let mut out = [0.0; 4];
    // powers of (alpha + beta z)
    let mut pow: Cubic = [1.0, 0.0, 0.0, 0.0];
    for k in 0..4 {
        for i in 0..4 {
            out[i] += p[k] * pow[i];
        }
        let mut next = [0.0; 4];
        for i in 0..4 {
            next[i] += alpha * pow[i];
            if i + 1 < 4 {
                next[i + 1] += beta * pow[i];
            }
        }
        pow = next;
    }
    out
}

/// Autocorrelation of the unit hat on [k, k+1], as a cubic in w.
pub(crate) fn r1_segment(k: i64) -> Cubic {
    match k {
        0 => [2.0 / 3.0, 0.0, -1.0, 0.5],
        1 => [4.0 / 3.0, -2.0, 1.0, -1.0 / 6.0],
        -1 => [2.0 / 3.0, 0.0, -1.0, -0.5],
        -2 => [4.0 / 3.0, 2.0, 1.0, 1.0 / 6.0],
        _ => [0.0; 4],
    }
}

/// Autocorrelation of the unit hat: integral of phi(x) phi(x + w).
pub(crate) fn r1(w: f64) -> f64 {
    let a = w.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    }
}

/// Antiderivatives from 0 of l_i l_j, l_0 = 1 - x, l_1 = x.
pub(crate) fn lambda_poly(i: usize, j: usize) -> Cubic {
    match (i.min(j), i.max(j)) {
        (0, 0) => [0.0, 1.0, -1.0, 1.0 / 3.0],
        (0, 1) => [0.0, 0.0, 0.5, -1.0 / 3.0],
        _ => [0.0, 0.0, 0.0, 1.0 / 3.0],
    }
}

/// Overlap integral of l_i l_j over [0,1] cap [o - z, o + 1 - z], as a cubic
/// in z on the piece z in [o-1, o] (`upper = false`) or [o, o+1] (`upper = true`).
pub(crate) fn overlap_piece(o: i64, i: usize, j: usize, upper: bool) -> Cubic {
    let lam = lambda_poly(i, j);
    let o = o as f64;
    if upper {
        compose(&lam, o + 1.0, -1.0)
    } else {
        let mut p = compose(&lam, o, -1.0);
        let total = eval(&lam, 1.0);
        for c in p.iter_mut() {
            *c = -*c;
        }
        p[0] += total;
        p
    }
}

/// Direct evaluation of the overlap integral.
#[cfg(test)]
pub(crate) fn overlap(o: i64, i: usize, j: usize, z: f64) -> f64 {
    let lam = lambda_poly(i, j);
    let lo = (o as f64 - z).max(0.0);
    let hi = (o as f64 + 1.0 - z).min(1.0);
    if hi <= lo {
        0.0
    } else {
        eval(&lam, hi) - eval(&lam, lo)
    }
}

/// H(c) = int_0^c (1 + t^2)^(-1-s) dt and its complement, for one s.
#[derive(Debug, Clone)]
pub(crate) struct HKernel {
    pub s: f64,
    pub h_inf: f64,
    series: Vec<f64>,
}

impl HKernel {
    pub fn new(s: f64) -> Self {
        let h_inf = 0.5 * beta_fn(0.5, s + 0.5).expect("positive");
        // binom(-1-s, k) / (2s + 2k + 1)
        let mut series = Vec::with_capacity(40);
        let mut b = 1.0;
        for k in 0..40 {
            series.push(b / (2.0 * s + 2.0 * k as f64 + 1.0));
            b *= -(1.0 + s + k as f64) / (k as f64 + 1.0);
        }
        HKernel { s, h_inf, series }
    }

    fn integrand(&self, t: f64) -> f64 {
        (1.0 + t * t).powf(-1.0 - self.s)
    }

    fn h_small(&self, c: f64) -> f64 {
        let g = rule(16);
        if c <= 1.0 {
            g.integrate(0.0, c, |t| self.integrand(t))
        } else {
            g.integrate(0.0, 1.0, |t| self.integrand(t)) + g.integrate(1.0, c, |t| self.integrand(t))
        }
    }

    /// int_c^inf for c > 2, by the series in 1/c.
    fn tail_series(&self, c: f64) -> f64 {
        let x = 1.0 / c;
        let x2 = x * x;
        let mut p = x.powf(2.0 * self.s + 1.0);
        let mut sum = 0.0;
        for &a in &self.series {
            let term = a * p;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            p *= x2;
        }
        sum
    }

    /// Odd extension of H.
    pub fn h(&self, c: f64) -> f64 {
        if c < 0.0 {
            return -self.h(-c);
        }
        if c.is_infinite() {
            return self.h_inf;
        }
        if c <= 2.0 {
            self.h_small(c)
        } else {
            self.h_inf - self.tail_series(c)
        }
    }

    /// int_c^inf, accurate for large c.
    #[cfg(test)]
    pub fn tail(&self, c: f64) -> f64 {
        if c <= 2.0 {
            self.h_inf - self.h(c)
        } else if c.is_infinite() {
            0.0
        } else {
            self.tail_series(c)
        }
    }
}

/// J_b = int_0^1 t^b (1 + t^2)^(-1-s) dt for b = 0..=6.
pub(crate) fn j_moments(s: f64) -> [f64; 7] {
    let g = rule(20);
    let mut out = [0.0; 7];
    for (b, o) in out.iter_mut().enumerate() {
        *o = g.integrate(0.0, 1.0, |t| t.powi(b as i32) * (1.0 + t * t).powf(-1.0 - s));
    }
    out
}

/// int over [0,1]^2 of |z|^(-2-2s) sum c_ab z1^a z2^b, with c_ab dropped for a + b < 2
/// (those must vanish or belong to a divergent entry).
pub(crate) fn origin_cell_integral(c: &[[f64; 4]; 4], s: f64, j: &[f64; 7]) -> f64 {
    let mut sum = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            if a + b < 2 || c[a][b] == 0.0 {
                continue;
            }
            sum += c[a][b] * (j[b] + j[a]) / ((a + b) as f64 - 2.0 * s);
        }
    }
    sum
}

/// Integral of the exterior of an axis box seen from x inside it:
/// int_{R^2 \ box} |x - y|^(-2-2s) dy.
pub(crate) fn box_exterior_2d(hk: &HKernel, x: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let s = hk.s;
    let l = x[0] - lo[0];
    let r = hi[0] - x[0];
    let b = x[1] - lo[1];
    let t = hi[1] - x[1];
    let edge = |d: f64, p: f64, q: f64| d.powf(-2.0 * s) * (hk.h(p / d) + hk.h(q / d));
    (edge(r, b, t) + edge(l, b, t) + edge(t, l, r) + edge(b, l, r)) / (2.0 * s)
}

/// int_{R \ (a,b)} |x - y|^(-1-2s) dy for a < x < b.
pub(crate) fn interval_exterior(x: f64, a: f64, b: f64, s: f64) -> f64 {
    ((x - a).powf(-2.0 * s) + (b - x).powf(-2.0 * s)) / (2.0 * s)
}
