use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::DomainMask;
use crate::error::{Error, Result};
use crate::seminorm::{restricted_form, QuadForm, SampledFunction};
use crate::specfun::FracParams;
use crate::witness::picone_pointwise;

/// Nodes per random function entering the all-pairs pointwise check.
const PAIR_SAMPLE: usize = 384;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiconeVerdict {
    pub trials: usize,
    pub violations: usize,
    pub min_quotient: f64,
    /// (1 - tol) * lambda_1d
    pub bound: f64,
    pub pass: bool,
}

/// Piecewise-linear interpolation of a 1D function; zero off its lattice.
fn eval_1d(w: &SampledFunction, x: f64) -> f64 {
    let g = w.mask().grid();
    let n = g.node_extents()[0];
    let t = (x - g.origin[0]) / g.h;
    if t < 0.0 || t > (n - 1) as f64 {
        return 0.0;
    }
    let i = (t.floor() as usize).min(n - 2);
    let a = t - i as f64;
    (1.0 - a) * w.value(i, 0) + a * w.value(i + 1, 0)
}

fn check_profile(w: &SampledFunction) -> Result<()> {
    if w.mask().dim() != 1 {
        return Err(Error::Config("cross-section profile must be one-dimensional".into()));
    }
    let m = w.mask();
    let n = m.grid().node_extents()[0];
    if (0..n).any(|i| m.node_admissible(i, 0) && !(w.value(i, 0) > 0.0)) {
        return Err(Error::Domain("cross-section profile is not positive on interior nodes".into()));
    }
    Ok(())
}

fn strip_form(strip: &DomainMask, p: FracParams) -> Result<QuadForm> {
    if strip.dim() != 2 || p.n() != 2 {
        return Err(Error::Config("strip and parameters must be two-dimensional".into()));
    }
    restricted_form(strip, p)
}

/// u*(x1, x2) = W(x2) on the unknowns of the strip form.
fn lift(form: &QuadForm, w: &SampledFunction) -> Result<Vec<f64>> {
    let u: Vec<f64> = (0..form.len()).map(|k| eval_1d(w, form.node_position(k)[1])).collect();
    if u.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("lifted profile vanishes at an admissible strip node".into()));
    }
    Ok(u)
}

/// Transfer of the cross-section bound to a truncated strip.
///
/// Draws 100 nonnegative admissible functions (smooth modulations of u* with
/// multiplicative noise, and raw random fields), checks the pointwise
/// inequality against u* on a random node sample, and compares each Rayleigh
/// quotient with (1 - tol) * lambda_1d.
pub fn picone_lower_bound_check(
    w: &SampledFunction,
    lambda_1d: f64,
    strip: &DomainMask,
    p: FracParams,
    seed: u64,
    tol: f64,
) -> Result<PiconeVerdict> {
    check_profile(w)?;
    if !(tol >= 0.0 && tol < 1.0) || !(lambda_1d > 0.0) {
        return Err(Error::Config("need lambda_1d > 0 and tol in [0, 1)".into()));
    }
    let form = strip_form(strip, p)?;
    let u = lift(&form, w)?;
    let n = u.len();
    let xs: Vec<[f64; 2]> = (0..n).map(|k| form.node_position(k)).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x[0]), b.max(x[0])));
    let half = 0.5 * (hi - lo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = 100;
    let mut violations = 0;
    let mut min_q = f64::INFINITY;
    for t in 0..trials {
        let v: Vec<f64> = if t % 2 == 0 {
            let bumps: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        rng.gen_range(lo + 0.25 * half..hi - 0.25 * half),
                        rng.gen_range(1.0..(0.5 * half).max(1.5)),
                        rng.gen_range(0.1..1.0),
                    )
                })
                .collect();
            let noise = rng.gen_range(0.0..0.2);
            xs.iter()
                .zip(&u)
                .map(|(x, &uk)| {
                    let b: f64 = bumps.iter().map(|&(c, wdt, a)| a * (-((x[0] - c) / wdt).powi(2)).exp()).sum();
                    uk * b * (1.0 + noise * rng.gen::<f64>())
                })
                .collect()
        } else {
            (0..n).map(|_| rng.gen::<f64>()).collect()
        };
        let q = form.rayleigh(&v);
        min_q = min_q.min(q);
        let m = PAIR_SAMPLE.min(n);
        let idx = rand::seq::index::sample(&mut rng, n, m);
        let us: Vec<f64> = idx.iter().map(|k| u[k]).collect();
        let vs: Vec<f64> = idx.iter().map(|k| v[k]).collect();
        violations += picone_pointwise(&us, &vs)?;
    }
    let bound = (1.0 - tol) * lambda_1d;
    Ok(PiconeVerdict {
        trials,
        violations,
        min_quotient: min_q,
        bound,
        pass: violations == 0 && min_q >= bound,
    })
}

/// Rayleigh quotient of v on the strip's restricted form.
pub fn strip_rayleigh(v: &SampledFunction, p: FracParams) -> Result<f64> {
    let form = strip_form(v.mask(), p)?;
    Ok(form.rayleigh(&form.restrict(v)?))
}

/// Relative residual |A u* - lambda M u*| / |M u*| of the lifted profile,
/// measured on strip nodes with |x1| <= l_half / 2.
pub fn tensor_eigen_residual(w: &SampledFunction, lambda_1d: f64, strip: &Arc<DomainMask>, p: FracParams, l_half: f64) -> Result<f64> {
    check_profile(w)?;
    let form = strip_form(strip, p)?;
    let u = lift(&form, w)?;
    let au = form.apply(&u);
    let m = form.mass_weight();
    let (mut num, mut den) = (0.0, 0.0);
    for (k, (&a, &b)) in au.iter().zip(&u).enumerate() {
        if form.node_position(k)[0].abs() <= 0.5 * l_half {
            num += (a - lambda_1d * m * b).powi(2);
            den += (m * b).powi(2);
        }
    }
    if den == 0.0 {
        return Err(Error::Empty("no strip nodes in the central window".into()));
    }
    Ok((num / den).sqrt())
}
