//! Gamma and Beta functions, sphere measures and the kernel constants
//! built from them.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

/// Ambient dimension and fractional order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFracParams")]
pub struct FracParams {
    n: u32,
    s: f64,
}

#[derive(Deserialize)]
struct RawFracParams {
    n: u32,
    s: f64,
}

impl TryFrom<RawFracParams> for FracParams {
    type Error = Error;
    fn try_from(r: RawFracParams) -> Result<Self> {
        FracParams::new(r.n, r.s)
    }
}

impl FracParams {
    pub fn new(n: u32, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("s = {s} is outside (0, 1)")));
        }
        Ok(FracParams { n, s })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Kernel exponent n + 2s.
    pub fn exponent(&self) -> f64 {
        self.n as f64 + 2.0 * self.s
    }

    pub fn with_dim(&self, n: u32) -> Result<Self> {
        FracParams::new(n, self.s)
    }
}

/// Parameters of the dimension reduction R^n -> R^(n-m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionParams {
    m: u32,
    n: u32,
    s: f64,
}

impl ReductionParams {
    pub fn new(m: u32, n: u32, s: f64) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::Domain(format!("need 1 <= m < n, got m={m}, n={n}")));
        }
        FracParams::new(n, s)?;
        Ok(ReductionParams { m, n, s })
    }

    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn s(&self) -> f64 {
        self.s
    }
}

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_857_5e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162_7e-6,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    a
}

/// Gamma(x) for real x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn needs x > 0, got {x}")));
    }
    Ok(gamma_raw(x))
}

fn gamma_raw(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * gamma_raw(1.0 - x));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    Ok(ln_gamma_raw(x))
}

fn ln_gamma_raw(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_raw(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// Beta(x, y); arguments are ordered first so the result is symmetric bit for bit.
pub fn beta_fn(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!("beta_fn needs positive arguments, got ({x}, {y})")));
    }
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    let ab = a + b;
    if ab < 170.0 {
        let v = gamma_raw(a) * gamma_raw(b) / gamma_raw(ab);
        if v.is_finite() && v > 0.0 {
            return Ok(v);
        }
    }
    Ok((ln_gamma_raw(a) + ln_gamma_raw(b) - ln_gamma_raw(ab)).exp())
}

/// Surface measure of the unit sphere in R^n; 2 for n = 1.
pub fn sphere_measure(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("sphere_measure needs n >= 1".into()));
    }
    let h = n as f64 / 2.0;
    Ok(2.0 * PI.powf(h) / gamma_raw(h))
}

/// Normalization C_{n,s} of the fractional Laplacian kernel.
pub fn c_ns(p: FracParams) -> f64 {
    let n = p.n as f64;
    let s = p.s;
    s * 4f64.powf(s) * gamma_raw((n + 2.0 * s) / 2.0) / (PI.powf(n / 2.0) * gamma_raw(1.0 - s))
}

/// Dimension-reduction constant Theta_{m,n}, closed Beta form.
pub fn theta_mn(p: ReductionParams) -> f64 {
    let m = p.m as f64;
    let n = p.n as f64;
    let b = beta_fn(m / 2.0, (n - m + 2.0 * p.s) / 2.0).expect("positive arguments");
    0.5 * b * 2.0 * PI.powf(m / 2.0) / gamma_raw(m / 2.0)
}

/// Theta_{m,n} by radial quadrature of the defining integral.
pub fn theta_mn_quadrature(p: ReductionParams) -> f64 {
    let m = p.m as f64;
    let e = p.n as f64 + 2.0 * p.s;
    // t = tan(phi): integrand sin^(m-1) cos^(e-m-1)
    let f = |phi: f64, da: f64, db: f64| {
        let sn = if phi < 0.25 * PI { da.sin() } else { db.cos() };
        let cs = if phi < 0.25 * PI { da.cos() } else { db.sin() };
        sn.powf(m - 1.0) * cs.powf(e - m - 1.0)
    };
    let radial = quad::tanh_sinh(&f, 0.0, 0.5 * PI, 1e-14);
    sphere_measure(p.m).expect("m >= 1") * radial
}

/// Integral of |w_1|^(2s) over the unit sphere of R^n.
pub fn directional_weight(n: u32, s: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("directional_weight needs n >= 2".into()));
    }
    FracParams::new(n, s)?;
    let h = (n as f64 - 1.0) / 2.0;
    Ok(2.0 * PI.powf(h) / gamma_raw(h) * beta_fn(h, s + 0.5)?)
}

/// |C_{n,s} Theta_{m,n} - C_{n-m,s}| / C_{n-m,s}.
pub fn reduction_residual(p: ReductionParams) -> f64 {
    let full = c_ns(FracParams { n: p.n, s: p.s });
    let reduced = c_ns(FracParams { n: p.n - p.m, s: p.s });
    (full * theta_mn(p) - reduced).abs() / reduced
}

/// (C_{n,s}/C_{1,s}) pi^((n-1)/2)/Gamma((n-1)/2) B((n-1)/2, s+1/2); equal to 1.
pub fn strip_normalization(n: u32, s: f64) -> Result<f64> {
    let p = FracParams::new(n, s)?;
    let w = directional_weight(n, s)?;
    Ok(c_ns(p) / (2.0 * c_ns(FracParams { n: 1, s })) * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_trivial_values() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma_fn(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma_fn(0.5).unwrap(), 1.772_453_850_905_516) < 1e-14);
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn gamma_recurrence_over_range() {
        let mut x = 0.05;
        while x < 49.0 {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(rel(lhs, rhs) < 1e-13, "x={x}");
            x += 0.37;
        }
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.1, 0.7, 3.3, 20.5, 100.0] {
            let g = ln_gamma(x).unwrap();
            if x < 100.0 {
                assert!((g - gamma_fn(x).unwrap().ln()).abs() < 1e-12);
            }
        }
        // ln Gamma(100) = ln(99!)
        let lf: f64 = (1..100).map(|k| (k as f64).ln()).sum();
        assert!((ln_gamma(100.0).unwrap() - lf).abs() < 1e-10);
    }

    #[test]
    fn beta_trivial_values() {
        assert!(rel(beta_fn(1.0, 1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(beta_fn(0.5, 0.5).unwrap(), PI) < 1e-14);
        assert!(rel(beta_fn(0.5, 1.0).unwrap(), 2.0) < 1e-14);
        assert!(beta_fn(0.0, 1.0).is_err());
    }

    #[test]
    fn beta_large_arguments_use_logs() {
        let b = beta_fn(150.0, 100.0).unwrap();
        let l = ln_gamma(150.0).unwrap() + ln_gamma(100.0).unwrap() - ln_gamma(250.0).unwrap();
        assert!(rel(b, l.exp()) < 1e-10);
    }

    #[test]
    fn sphere_measures() {
        assert!(rel(sphere_measure(1).unwrap(), 2.0) < 1e-15);
        assert!(rel(sphere_measure(2).unwrap(), 2.0 * PI) < 1e-14);
        assert!(rel(sphere_measure(3).unwrap(), 4.0 * PI) < 1e-14);
        assert!(sphere_measure(0).is_err());
    }

    #[test]
    fn c_ns_closed_form_values() {
        let p = FracParams::new(1, 0.5).unwrap();
        assert!(rel(c_ns(p), 1.0 / PI) < 1e-14);
        let p = FracParams::new(2, 0.5).unwrap();
        assert!(rel(c_ns(p), 0.5 / PI) < 1e-14);
        // multiprecision reference: 0.999 * 4^0.999 * Gamma(0.999) / (sqrt(pi) * Gamma(0.001))
        let p = FracParams::new(1, 0.999).unwrap();
        assert!(rel(c_ns(p), 1.996_310_560_120_286e-3) < 1e-10, "{}", c_ns(p));
    }

    #[test]
    fn frac_params_reject_endpoints() {
        assert!(FracParams::new(1, 0.0).is_err());
        assert!(FracParams::new(1, 1.0).is_err());
        assert!(FracParams::new(0, 0.5).is_err());
        let bad: std::result::Result<FracParams, _> = serde_json::from_str(r#"{"n":1,"s":1.5}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn theta_examples() {
        let p = ReductionParams::new(1, 2, 0.5).unwrap();
        assert!(rel(theta_mn(p), 2.0) < 1e-14);
        assert!(reduction_residual(p) < 1e-14);
        let p = ReductionParams::new(1, 3, 0.25).unwrap();
        assert!(rel(theta_mn_quadrature(p), theta_mn(p)) < 1e-9);
        assert!(ReductionParams::new(2, 2, 0.5).is_err());
    }

    #[test]
    fn theta_quadrature_agrees_on_grid() {
        for n in 2..=6 {
            for m in 1..n {
                for &s in &[0.1, 0.5, 0.9] {
                    let p = ReductionParams::new(m, n, s).unwrap();
                    assert!(rel(theta_mn_quadrature(p), theta_mn(p)) < 1e-9, "{m} {n} {s}");
                }
            }
        }
    }

    #[test]
    fn directional_weight_circle() {
        assert!(rel(directional_weight(2, 0.5).unwrap(), 4.0) < 1e-14);
        // oracle: brute-force quadrature of |cos|^(2s) over the circle
        for &s in &[0.1, 0.3, 0.6, 0.95] {
            let q: f64 = 4.0 * quad::tanh_sinh(&|_t, _da, db: f64| db.sin().powf(2.0 * s), 0.0, 0.5 * PI, 1e-14);
            let w = directional_weight(2, s).unwrap();
            assert!(rel(w, q) < 1e-10, "s={s}");
            assert!(rel(w, 2.0 * beta_fn(0.5, s + 0.5).unwrap()) < 1e-14);
        }
        assert!(directional_weight(1, 0.5).is_err());
    }

    #[test]
    fn strip_normalization_is_one() {
        for n in [2, 3, 5] {
            for s in [0.6, 0.75, 0.9] {
                assert!((strip_normalization(n, s).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }
}
