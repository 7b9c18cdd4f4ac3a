//! Dilated tensor products u_l(x1, x2) = v_l(x1) W(x2) on a truncated strip
//! (-L, L) x (-a, a), and the split of their regional energy.
//!
//! With t = x1 - y1, r = x2 - y2 and K = (t^2 + r^2)^(-1-s), the three parts
//! separate into one-dimensional profiles:
//!
//! I1 = C int_{r>0} Psi(r) int_R K V(t) dt dr
//! I2 = C int_{t>0} Phi(t) int_{r>0} K Z(r) dr dt
//! I3 = -C int_{t>0} int_{r>0} K Phi(t) Psi(r) dr dt
//!
//! where Psi and Phi are the squared-difference autocorrelations of W and v_l
//! over the truncated ranges, V(t) the mass of v_l^2 kept after a shift by t,
//! and Z(r) the mass of W^2 kept after shifts by +r and -r. I3 is never positive.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{WitnessReport, WitnessRow};
use crate::domain::{DomainFamily, DomainMask};
use crate::error::{Error, Result};
use crate::quad::{self, GaussRule};
use crate::seminorm::{assemble_regional, SampledFunction};
use crate::specfun::{c_ns, theta_mn, FracParams, ReductionParams};

/// (1 - x^2)^2 on (-1, 1), normalized in L2.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (315.0f64 / 256.0).sqrt() * (1.0 - x * x).powi(2)
    }
}

/// l^(-1/2) v(x / l).
pub fn dilated_bump(x: f64, l: f64) -> f64 {
    bump(x / l) / l.sqrt()
}

/// v(y) - v(y - tau), factored so that small shifts lose no precision.
fn bump_difference(y: f64, tau: f64) -> f64 {
    let z = y - tau;
    if y.abs() < 1.0 && z.abs() < 1.0 {
        (315.0f64 / 256.0).sqrt() * tau * (tau - 2.0 * y) * (2.0 - y * y - z * z)
    } else {
        bump(y) - bump(z)
    }
}

/// int over (lo, hi) of (v_l(x) - v_l(x - t))^2, exact for the polynomial pieces.
fn bump_phi(g5: &GaussRule, l: f64, t: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut cuts = vec![lo, hi];
    for c in [-l, l, t - l, t + l] {
        if c > lo && c < hi {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| g5.integrate(w[0], w[1], |x| bump_difference(x / l, t / l).powi(2)) / l)
        .sum()
}

/// [v]^2 on the real line for the normalized bump.
pub fn bump_seminorm(s: f64) -> Result<f64> {
    let p = FracParams::new(1, s)?;
    let g = GaussRule::new(5);
    let f = |t: f64, _: f64, _: f64| t.powf(-1.0 - 2.0 * s) * bump_phi(&g, 1.0, t, -1.0, 1.0 + t);
    let near = quad::tanh_sinh(&f, 0.0, 2.0, 1e-13);
    let tail = 2.0 * 2f64.powf(-2.0 * s) / (2.0 * s);
    Ok(c_ns(p) * (near + tail))
}

/// Normalized cross-section profile together with its exact P1 quadratures.
#[derive(Debug, Clone)]
struct Profile {
    origin: f64,
    h: f64,
    values: Vec<f64>,
    /// int W^2 over nodes [0, k]
    cum: Vec<f64>,
}

impl Profile {
    fn new(w: &SampledFunction) -> Result<Self> {
        let g = w.mask().grid();
        if g.dim != 1 {
            return Err(Error::Config("cross-section profile must be one-dimensional".into()));
        }
        let n = g.node_extents()[0];
        let raw: Vec<f64> = (0..n).map(|i| w.value(i, 0)).collect();
        let norm2: f64 = raw.windows(2).map(|p| g.h * (p[0] * p[0] + p[0] * p[1] + p[1] * p[1]) / 3.0).sum();
        if !(norm2 > 0.0) {
            return Err(Error::Domain("cross-section profile vanishes".into()));
        }
        let values: Vec<f64> = raw.iter().map(|v| v / norm2.sqrt()).collect();
        let mut cum = vec![0.0; n];
        for k in 1..n {
            let (a, b) = (values[k - 1], values[k]);
            cum[k] = cum[k - 1] + g.h * (a * a + a * b + b * b) / 3.0;
        }
        Ok(Profile {
            origin: g.origin[0],
            h: g.h,
            values,
            cum,
        })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (x - self.origin) / self.h;
        if t <= 0.0 || t >= (n - 1) as f64 {
            return 0.0;
        }
        let i = t.floor() as usize;
        let a = t - i as f64;
        (1.0 - a) * self.values[i] + a * self.values[i + 1]
    }

    /// int W^2 over (-inf, x).
    fn cumulative(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (x - self.origin) / self.h;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= (n - 1) as f64 {
            return self.cum[n - 1];
        }
        let i = t.floor() as usize;
        let (a, b) = (self.values[i], self.eval(x));
        self.cum[i] + (x - (self.origin + i as f64 * self.h)) * (a * a + a * b + b * b) / 3.0
    }

    /// int over x in (lo + r, hi) of (W(x) - W(x - r))^2, exact for P1 data.
    fn psi(&self, r: f64, lo: f64, hi: f64) -> f64 {
        match self.node_range(lo, hi) {
            Some(nodes) if r < self.h => self.psi_small(r, nodes),
            _ => self.psi_pieces(r, lo, hi),
        }
    }

    fn psi_pieces(&self, r: f64, lo: f64, hi: f64) -> f64 {
        let (a, b) = (lo + r, hi);
        if b <= a {
            return 0.0;
        }
        let mut cuts = vec![a, b];
        for k in 0..self.values.len() {
            let x = self.origin + k as f64 * self.h;
            for c in [x, x + r] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let d = |x: f64| if r < self.h { self.increment(x - r, x) } else { self.eval(x) - self.eval(x - r) };
        cuts.windows(2)
            .map(|w| {
                let (p, q) = (d(w[0]), d(w[1]));
                (w[1] - w[0]) * (p * p + p * q + q * q) / 3.0
            })
            .sum()
    }

    /// Node indices of lo and hi, when both fall on nodes.
    fn node_range(&self, lo: f64, hi: f64) -> Option<(i64, i64)> {
        let node = |x: f64| {
            let t = (x - self.origin) / self.h;
            ((t - t.round()).abs() < 1e-9).then_some(t.round() as i64)
        };
        Some((node(lo)?, node(hi)?))
    }

    /// psi for r < h with lo, hi on nodes, as a polynomial in r.
    fn psi_small(&self, r: f64, (first, last): (i64, i64)) -> f64 {
        let inside: f64 = (first..last).map(|i| self.slope(i).powi(2)).sum();
        let crossing: f64 = (first + 1..last)
            .map(|i| {
                let (p, q) = (self.slope(i - 1), self.slope(i));
                p * p + p * q + q * q
            })
            .sum();
        r * r * (self.h - r) * inside + r * r * r * crossing / 3.0
    }

    fn slope(&self, i: i64) -> f64 {
        if i < 0 || i as usize + 1 >= self.values.len() {
            0.0
        } else {
            (self.values[i as usize + 1] - self.values[i as usize]) / self.h
        }
    }

    /// W(b) - W(a) for 0 <= b - a < h, without cancellation.
    fn increment(&self, a: f64, b: f64) -> f64 {
        let ia = ((a - self.origin) / self.h).floor() as i64;
        let ib = ((b - self.origin) / self.h).floor() as i64;
        if ia == ib {
            return self.slope(ia) * (b - a);
        }
        let node = self.origin + ib as f64 * self.h;
        self.slope(ia) * (node - a) + self.slope(ib) * (b - node)
    }

    /// int over (a, b) of W^2 for 0 <= b - a < h.
    fn local_mass(&self, a: f64, b: f64) -> f64 {
        let node = self.origin + ((b - self.origin) / self.h).floor() * self.h;
        let piece = |p: f64, q: f64| {
            let (u, v) = (self.eval(p), self.eval(q));
            (q - p) * (u * u + u * v + v * v) / 3.0
        };
        if node > a {
            piece(a, node) + piece(node, b)
        } else {
            piece(a, b)
        }
    }

    /// Mass of W^2 lost by restricting to (lo, hi - r) and to (lo + r, hi).
    fn z_deficit(&self, r: f64, lo: f64, hi: f64) -> f64 {
        if r < self.h {
            if let Some((first, last)) = self.node_range(lo, hi) {
                // W is linear on the end cells; integrate its square from each end
                let end = |w: f64, slope: f64| r * (w * w + w * slope * r + slope * slope * r * r / 3.0);
                let at = |k: i64| self.values.get(k as usize).copied().unwrap_or(0.0);
                return end(at(first), self.slope(first)) + end(at(last), -self.slope(last - 1));
            }
            return self.local_mass(hi - r, hi) + self.local_mass(lo, lo + r);
        }
        let c = |x: f64| self.cumulative(x);
        let total = c(hi) - c(lo);
        2.0 * total - (c(hi - r) - c(lo)).max(0.0) - (c(hi) - c(lo + r)).max(0.0)
    }
}

/// Family of dilated tensor products with a fixed cross-section profile.
#[derive(Debug, Clone)]
pub struct TensorFamily {
    pub w: SampledFunction,
    pub ells: Vec<f64>,
}

impl TensorFamily {
    pub fn new(w: SampledFunction, ells: Vec<f64>) -> Result<Self> {
        if ells.is_empty() || ells.iter().any(|l| !(*l > 0.0)) || ells.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Config("l ladder must be positive and increasing".into()));
        }
        Profile::new(&w)?;
        Ok(TensorFamily { w, ells })
    }

    /// u_l sampled on the admissible nodes of a strip mask (W renormalized).
    pub fn member(&self, l: f64, strip: Arc<DomainMask>) -> Result<SampledFunction> {
        let prof = Profile::new(&self.w)?;
        SampledFunction::compactly_supported(strip, |x| dilated_bump(x[0], l) * prof.eval(x[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorSplitRow {
    pub ell: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// [v]^2 / l^(2s)
    pub i2_bound: f64,
    /// relative gap between I1 and the assembled [W]^2
    pub i1_gap: f64,
    pub cauchy_schwarz: bool,
}

impl TensorSplitRow {
    pub fn total(&self) -> f64 {
        self.i1 + self.i2 + self.i3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorReport {
    pub s: f64,
    pub half_length: f64,
    pub half_width: f64,
    /// Assembled regional [W]^2 on the cross-section.
    pub w_seminorm: f64,
    pub v_seminorm: f64,
    pub rows: Vec<TensorSplitRow>,
    /// log-log slope of I2 against l
    pub i2_slope: Option<f64>,
}

impl TensorReport {
    pub fn witness_rows(&self) -> WitnessReport {
        WitnessReport {
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let mut terms = BTreeMap::new();
                    terms.insert("I1".to_string(), r.i1);
                    terms.insert("I2".to_string(), r.i2);
                    terms.insert("I3".to_string(), r.i3);
                    terms.insert("W_seminorm".to_string(), self.w_seminorm);
                    WitnessRow {
                        family: "tensor".into(),
                        param: r.ell,
                        quotient: r.total(),
                        terms,
                        bound: Some(r.i2_bound),
                        pass: r.cauchy_schwarz && r.i2 <= r.i2_bound * (1.0 + 1e-8),
                    }
                })
                .collect(),
        }
    }
}

/// int over (a, inf) of (t^2 + r^2)^(-1-s) dt, for a > 0.
fn kernel_tail(a: f64, r: f64, s: f64) -> f64 {
    let f = |u: f64, _: f64, _: f64| u.powf(2.0 * s) * (1.0 + (r * u / a).powi(2)).powf(-1.0 - s);
    a.powf(-1.0 - 2.0 * s) * quad::tanh_sinh(&f, 0.0, 1.0, 1e-13)
}

/// int_0^beta sin^(2s).
fn sin_power_integral(beta: f64, s: f64) -> f64 {
    if beta <= 0.0 {
        return 0.0;
    }
    let g = |_: f64, da: f64, _: f64| da.sin().powf(2.0 * s);
    quad::tanh_sinh(&g, 0.0, beta, 1e-13)
}

/// Adaptive Gauss with tolerance relative to a first estimate.
fn relative_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel: f64) -> f64 {
    let scale = GaussRule::new(10).integrate(a, b, f).abs();
    quad::adaptive(f, a, b, (rel * scale).max(1e-300))
}

/// int over (0, b) of f with f ~ x^(1-2s) at 0: x = b u^m leaves u^(m(2-2s)-1), exponent >= 1.
fn singular_start<F: Fn(f64) -> f64>(f: &F, b: f64, s: f64, rel: f64) -> f64 {
    let m = (1.0 / (1.0 - s)).ceil().max(2.0);
    let g = |u: f64| {
        let x = b * u.powf(m);
        // below 1e-150 the neglected mass is ~ x^(2-2s), far under any tolerance used here
        if x < 1e-150 {
            0.0
        } else {
            f(x) * b * m * u.powf(m - 1.0)
        }
    };
    relative_adaptive(&g, 0.0, 1.0, rel)
}

/// int over (0, b) of f with a peak of width ~ `peak` at the origin.
fn peaked<F: Fn(f64) -> f64>(f: &F, peak: f64, b: f64, g: &GaussRule, rel: f64) -> f64 {
    let p = peak.min(b);
    let head = relative_adaptive(f, 0.0, p, rel);
    head + geometric_pieces(p, b).into_iter().map(|(x, y)| g.integrate(x, y, f)).sum::<f64>()
}

/// Geometric subdivision of [a, b] (a > 0) into pieces of ratio at most 2.
fn geometric_pieces(a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut x = a;
    while x < b {
        let y = (2.0 * x).min(b);
        out.push((x, y));
        x = y;
    }
    out
}

struct Split<'a> {
    w: &'a Profile,
    s: f64,
    l: f64,
    half_len: f64,
    a: f64,
    g: GaussRule,
    g5: GaussRule,
    theta: f64,
}

impl Split<'_> {
    fn kern(&self, t: f64, r: f64) -> f64 {
        (t * t + r * r).powf(-1.0 - self.s)
    }

    fn v(&self, x: f64) -> f64 {
        dilated_bump(x, self.l)
    }

    fn v_pieces(&self, lo: f64, hi: f64, t: f64) -> Vec<f64> {
        let mut cuts = vec![lo, hi];
        for c in [-self.l, self.l, t - self.l, t + self.l] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts
    }

    /// int over (-L + t, L) of (v(x) - v(x - t))^2, t >= 0.
    fn phi(&self, t: f64) -> f64 {
        bump_phi(&self.g5, self.l, t, -self.half_len + t, self.half_len)
    }

    /// int over (-L + t, L) of v^2.
    fn vmass(&self, t: f64) -> f64 {
        let (lo, hi) = (-self.half_len + t, self.half_len);
        if hi <= lo {
            return 0.0;
        }
        self.v_pieces(lo, hi, t)
            .windows(2)
            .map(|w| self.g5.integrate(w[0], w[1], |x| self.v(x).powi(2)))
            .sum()
    }

    /// int over R of K(t, r) V(|t|) dt.
    fn h1(&self, r: f64) -> f64 {
        let (lo, hi) = (self.half_len - self.l, self.half_len + self.l);
        let mid: f64 = self.g.integrate(lo, hi, |t| self.kern(t, r) * (1.0 - self.vmass(t)));
        self.theta * r.powf(-1.0 - 2.0 * self.s) - 2.0 * mid - 2.0 * kernel_tail(hi, r, self.s)
    }

    /// int over (0, 2a) of K(t, r) Z(r) dr.
    fn h2(&self, t: f64) -> f64 {
        let (lo, hi) = (-self.a, self.a);
        let z0 = 2.0 * (self.w.cumulative(hi) - self.w.cumulative(lo));
        let width = 2.0 * self.a;
        // int_0^width K dr = t^(-1-2s) int_0^atan(width/t) cos^(2s)
        let main = z0 * t.powf(-1.0 - 2.0 * self.s) * (0.5 * self.theta - sin_power_integral((t / width).atan(), self.s));
        let corr = |r: f64| self.kern(t, r) * self.w.z_deficit(r, lo, hi);
        let h = self.w.h;
        let first = peaked(&corr, t, h.min(width), &self.g, 1e-11);
        let n = (width / h).round() as usize;
        let rest: f64 = (1..n).map(|k| self.g.integrate(k as f64 * h, (k + 1) as f64 * h, corr)).sum();
        main - first - rest
    }

    /// int over (0, 2L) of K(t, r) Phi(t) dt.
    fn h3(&self, r: f64) -> f64 {
        let f = |t: f64| self.kern(t, r) * self.phi(t);
        let two_l = 2.0 * self.l;
        let mut sum = peaked(&f, r, two_l, &self.g, 1e-11);
        for (a, b) in geometric_pieces(two_l, self.half_len - self.l) {
            sum += self.g.integrate(a, b, f);
        }
        sum + self.g.integrate(self.half_len - self.l, self.half_len + self.l, f)
    }

    fn rho_integral<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let h = self.w.h;
        let n = (2.0 * self.a / h).round() as usize;
        let first = singular_start(&f, h, self.s, 1e-10);
        first + (1..n).map(|k| self.g.integrate(k as f64 * h, (k + 1) as f64 * h, &f)).sum::<f64>()
    }

    fn i1(&self) -> f64 {
        self.rho_integral(|r| self.w.psi(r, -self.a, self.a) * self.h1(r))
    }

    fn i2(&self) -> f64 {
        let f = |t: f64| self.phi(t) * self.h2(t);
        let two_l = 2.0 * self.l;
        let mut sum = singular_start(&f, two_l, self.s, 1e-10);
        for (a, b) in geometric_pieces(two_l, self.half_len - self.l) {
            sum += self.g.integrate(a, b, f);
        }
        sum + self.g.integrate(self.half_len - self.l, self.half_len + self.l, f)
    }

    fn i3(&self) -> f64 {
        -self.rho_integral(|r| self.w.psi(r, -self.a, self.a) * self.h3(r))
    }
}

/// I1, I2, I3 along the ladder on the strip (-L, L) x (-a, a).
pub fn tensor_split(family: &TensorFamily, strip: &DomainFamily, p: FracParams) -> Result<TensorReport> {
    let (half_len, a) = match strip {
        DomainFamily::TruncatedStrip {
            half_width,
            half_length,
        } => (*half_length, *half_width),
        _ => return Err(Error::Config("tensor split needs a truncated strip".into())),
    };
    if p.n() != 2 {
        return Err(Error::Config("tensor split is two-dimensional".into()));
    }
    let l_max = *family.ells.last().expect("nonempty ladder");
    if half_len < 4.0 * l_max {
        return Err(Error::Domain(format!("truncation too short: L = {half_len} < 4 l_max = {}", 4.0 * l_max)));
    }
    let s = p.s();
    let prof = Profile::new(&family.w)?;
    let wm = family.w.mask();
    let span = wm.active_indices().map(|k| wm.grid().cell_center(k, 0)[0]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let hw = 0.5 * wm.h();
    if (span.0 - hw + a).abs() > 1e-9 || (span.1 + hw - a).abs() > 1e-9 {
        return Err(Error::Config("profile mask does not match the strip cross-section".into()));
    }
    let p1 = FracParams::new(1, s)?;
    let mut w_norm = family.w.clone();
    let scale = prof.values.iter().zip(family.w.values()).find(|(_, b)| **b != 0.0).map(|(a, b)| a / b).unwrap_or(1.0);
    w_norm.values_mut().iter_mut().for_each(|v| *v *= scale);
    let w_seminorm = assemble_regional(wm, p1)?.energy_of(&w_norm)?;
    let v_seminorm = bump_seminorm(s)?;
    let c = c_ns(p);
    let theta = theta_mn(ReductionParams::new(1, 2, s)?);
    let rows: Vec<TensorSplitRow> = family
        .ells
        .par_iter()
        .map(|&l| {
            let sp = Split {
                w: &prof,
                s,
                l,
                half_len,
                a,
                g: GaussRule::new(10),
                g5: GaussRule::new(5),
                theta,
            };
            let (i1, i2, i3) = (c * sp.i1(), c * sp.i2(), c * sp.i3());
            TensorSplitRow {
                ell: l,
                i1,
                i2,
                i3,
                i2_bound: v_seminorm * l.powf(-2.0 * s),
                i1_gap: (i1 - w_seminorm).abs() / w_seminorm,
                cauchy_schwarz: i3.abs() <= 2.0 * (i1 * i2).sqrt() * (1.0 + 1e-8),
            }
        })
        .collect();
    let ls: Vec<f64> = rows.iter().map(|r| r.ell).collect();
    let i2s: Vec<f64> = rows.iter().map(|r| r.i2).collect();
    Ok(TensorReport {
        s,
        half_length: half_len,
        half_width: a,
        w_seminorm,
        v_seminorm,
        i2_slope: super::cutoff::loglog_fit(&ls, &i2s),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::rasterize;
    use crate::eigen::smallest_eigenpair;
    use crate::eigen::SolverOptions;

    fn cross_section(h: f64, s: f64) -> SampledFunction {
        let mask = Arc::new(rasterize(&DomainFamily::interval(-1.0, 1.0), h).unwrap());
        let form = assemble_regional(&mask, FracParams::new(1, s).unwrap()).unwrap();
        let pair = smallest_eigenpair(&form, &SolverOptions::default()).unwrap();
        form.extend(mask, &pair.vector).unwrap()
    }

    #[test]
    fn bump_is_normalized_and_seminorm_matches_double_quadrature() {
        let g = GaussRule::new(8);
        let m: f64 = g.integrate(-1.0, 1.0, |x| bump(x).powi(2));
        assert!((m - 1.0).abs() < 1e-14);
        for s in [0.3, 0.5, 0.75] {
            let inner = |x: f64| {
                let f = |y: f64, _: f64, _: f64| {
                    let d = (x - y).abs().max(1e-300);
                    (bump(x) - bump(y)).powi(2) / d.powf(1.0 + 2.0 * s)
                };
                let near = quad::tanh_sinh(&f, -1.0, x, 1e-12) + quad::tanh_sinh(&f, x, 1.0, 1e-12);
                // y outside (-1, 1), where v(y) = 0
                let far = 2.0 * bump(x).powi(2) * ((1.0 - x).powf(-2.0 * s) + (1.0 + x).powf(-2.0 * s)) / (2.0 * s);
                near + far
            };
            let rule = GaussRule::new(24);
            let dbl = rule.integrate(-1.0, 0.0, inner) + rule.integrate(0.0, 1.0, inner);
            let direct = 0.5 * c_ns(FracParams::new(1, s).unwrap()) * dbl;
            let v = bump_seminorm(s).unwrap();
            assert!((v - direct).abs() < 1e-6 * v, "s={s}: {v} vs {direct}");
        }
    }

    #[test]
    fn profile_quadratures() {
        let w = cross_section(1.0 / 16.0, 0.75);
        let prof = Profile::new(&w).unwrap();
        assert!((prof.cumulative(2.0) - 1.0).abs() < 1e-14);
        assert_eq!(prof.z_deficit(0.0, -1.0, 1.0), 0.0);
        // the small-shift branches join the generic ones continuously
        let h = prof.h;
        let below = h * (1.0 - 1e-12);
        assert!((prof.z_deficit(below, -1.0, 1.0) - prof.z_deficit(h, -1.0, 1.0)).abs() < 1e-12);
        assert!((prof.psi(below, -1.0, 1.0) - prof.psi(h, -1.0, 1.0)).abs() < 1e-12);
        // psi(r) / r^2 tends to int W'^2
        let grad2: f64 = prof.values.windows(2).map(|p| (p[1] - p[0]).powi(2) / h).sum();
        let r = 1e-9;
        assert!((prof.psi(r, -1.0, 1.0) / (r * r) - grad2).abs() < 1e-6 * grad2);
        // closed form below h against the piecewise sum, and at shifts below one ulp of x
        for r in [1e-3, 0.02, 0.05] {
            let (q, p) = (prof.psi_small(r, prof.node_range(-1.0, 1.0).unwrap()), prof.psi_pieces(r, -1.0, 1.0));
            assert!((q - p).abs() < 1e-13 * p, "r={r}: {q} vs {p}");
        }
        for r in [1e-3, 0.02, 0.05] {
            let (lo, hi) = (prof.local_mass(1.0 - r, 1.0) + prof.local_mass(-1.0, -1.0 + r), prof.z_deficit(r, -1.0, 1.0));
            assert!((lo - hi).abs() < 1e-12 * hi, "r={r}: {lo} vs {hi}");
        }
        let tiny = 1e-20;
        // W vanishes at both ends, so only the end slopes survive
        let (first, last) = prof.node_range(-1.0, 1.0).unwrap();
        assert_eq!((prof.values[first as usize], prof.values[last as usize]), (0.0, 0.0));
        let ends = (prof.slope(first).powi(2) + prof.slope(last - 1).powi(2)) / 3.0;
        assert!((prof.z_deficit(tiny, -1.0, 1.0) / tiny.powi(3) - ends).abs() < 1e-12 * ends);
        assert!((prof.psi(tiny, -1.0, 1.0) / (tiny * tiny) - grad2).abs() < 1e-12 * grad2);
        // psi against brute-force midpoint sums
        for r in [0.03, 0.4, 1.3] {
            let n = 200_000;
            let (a, b) = (-1.0 + r, 1.0);
            let dx = (b - a) / n as f64;
            let brute: f64 = (0..n)
                .map(|k| {
                    let x = a + (k as f64 + 0.5) * dx;
                    (prof.eval(x) - prof.eval(x - r)).powi(2) * dx
                })
                .sum();
            assert!((prof.psi(r, -1.0, 1.0) - brute).abs() < 1e-8, "r={r}");
        }
    }

    #[test]
    fn split_identities_on_long_strip() {
        let s = 0.5;
        let w = cross_section(1.0 / 16.0, s);
        let fam = TensorFamily::new(w, vec![0.5, 1.0, 2.0]).unwrap();
        let rep = tensor_split(&fam, &DomainFamily::strip(16.0), FracParams::new(2, s).unwrap()).unwrap();
        for r in &rep.rows {
            assert!(r.i1_gap < 0.02, "{r:?}");
            assert!(r.i3 <= 0.0);
            assert!(r.cauchy_schwarz);
            assert!(r.i2 <= r.i2_bound * (1.0 + 1e-8));
        }
        let i1: Vec<f64> = rep.rows.iter().map(|r| r.i1).collect();
        let spread = i1.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / i1.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
        assert!(spread < 0.01);
    }

    #[test]
    fn small_scale_slope_is_minus_two_s() {
        let s = 0.3;
        let w = cross_section(1.0 / 16.0, s);
        let ells: Vec<f64> = (3..=6).rev().map(|k| 2f64.powi(-k)).collect();
        let fam = TensorFamily::new(w, ells).unwrap();
        let rep = tensor_split(&fam, &DomainFamily::strip(4.0), FracParams::new(2, s).unwrap()).unwrap();
        let slope = rep.i2_slope.unwrap();
        assert!((slope + 2.0 * s).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn split_sum_matches_two_dimensional_assembly() {
        let s = 0.5;
        let h = 1.0 / 16.0;
        let w = cross_section(h, s);
        let fam = TensorFamily::new(w, vec![0.75]).unwrap();
        let strip = DomainFamily::strip(3.0);
        let p = FracParams::new(2, s).unwrap();
        let rep = tensor_split(&fam, &strip, p).unwrap();
        let mask = Arc::new(rasterize(&strip, h).unwrap());
        let u = fam.member(0.75, mask.clone()).unwrap();
        let direct = assemble_regional(&mask, p).unwrap().energy_of(&u).unwrap();
        let total = rep.rows[0].total();
        assert!((total - direct).abs() < 0.02 * direct, "{total} vs {direct}");
    }

    #[test]
    fn short_truncation_is_rejected() {
        let w = cross_section(0.125, 0.5);
        let fam = TensorFamily::new(w, vec![1.0, 2.0]).unwrap();
        let r = tensor_split(&fam, &DomainFamily::strip(6.0), FracParams::new(2, 0.5).unwrap());
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
