use crate::error::{Error, Result};
use crate::specfun::{c_ns, directional_weight, sphere_measure, FracParams};

/// Lower bound C_{n,s} / (2 C_{1,s}) * sigma * p1_unit / m^(2s), where sigma is
/// the measure of the admissible direction set and p1_unit the regional
/// constant of the unit interval.
pub fn angle_bound(sigma: f64, m: f64, p: FracParams, p1_unit: f64) -> Result<f64> {
    let full = sphere_measure(p.n())?;
    if !(sigma > 0.0) || sigma > full * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("direction measure {sigma} outside (0, {full}]")));
    }
    weighted(sigma, m, p, p1_unit)
}

/// The bound with directions weighted by |w_1|^(2s) over the whole sphere.
pub fn angle_bound_directional(m: f64, p: FracParams, p1_unit: f64) -> Result<f64> {
    weighted(directional_weight(p.n(), p.s())?, m, p, p1_unit)
}

fn weighted(sigma: f64, m: f64, p: FracParams, p1_unit: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Domain("chord bound m must be positive".into()));
    }
    if !(p1_unit >= 0.0) {
        return Err(Error::Config("unit-interval constant must be nonnegative".into()));
    }
    let c1 = c_ns(FracParams::new(1, p.s())?);
    Ok(c_ns(p) / (2.0 * c1) * sigma * p1_unit / m.powf(2.0 * p.s()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directional_chain_reproduces_interval_constant() {
        for n in [2, 3, 5] {
            for s in [0.3, 0.75] {
                let p = FracParams::new(n, s).unwrap();
                // width-2 strip: p1_unit / 2^(2s) is the constant of (-1, 1)
                let b = angle_bound_directional(2.0, p, 7.0).unwrap();
                let target = 7.0 / 2f64.powf(2.0 * s);
                assert!((b - target).abs() < 1e-10 * target);
            }
        }
    }

    #[test]
    fn decays_in_m_and_rejects_large_sigma() {
        let p = FracParams::new(2, 0.5).unwrap();
        let a = angle_bound(1.0, 1.0, p, 1.0).unwrap();
        let b = angle_bound(1.0, 1e6, p, 1.0).unwrap();
        assert!(b < 1e-5 * a);
        assert!(matches!(angle_bound(7.0, 1.0, p, 1.0), Err(Error::Domain(_))));
        assert!(angle_bound(2.0 * std::f64::consts::PI, 1.0, p, 1.0).is_ok());
    }
}
