use serde::{Deserialize, Serialize};

use super::family::interp;
use super::{DomainFamily, DomainMask};
use crate::error::{Error, Result};

/// Envelope h on [0, inf) bounding slice measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Envelope {
    Constant { value: f64 },
    InversePower { coef: f64, exponent: f64 },
    /// l on (l, l + l^(-2-eps)) for l = first..first+count, zero elsewhere
    BlockHeight { eps: f64, first: u32, count: u32 },
    Sampled { xs: Vec<f64>, ys: Vec<f64> },
}

impl Envelope {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Envelope::Constant { value } => *value,
            Envelope::InversePower { coef, exponent } => {
                if r <= 0.0 {
                    f64::INFINITY
                } else {
                    coef * r.powf(-exponent)
                }
            }
            Envelope::BlockHeight { eps, first, count } => {
                let l = r.floor();
                if l >= *first as f64 && l < (*first + *count) as f64 && r > l && r < l + l.powf(-2.0 - eps) {
                    l
                } else {
                    0.0
                }
            }
            Envelope::Sampled { xs, ys } => interp(xs, ys, r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    pub envelope: Envelope,
    pub a: f64,
    pub r_k: Vec<f64>,
}

/// Where slice measures come from.
#[derive(Debug, Clone, Copy)]
pub enum SliceSource<'a> {
    Family(&'a DomainFamily),
    Mask(&'a DomainMask),
}

impl SliceSource<'_> {
    fn slice(&self, r: f64) -> f64 {
        match self {
            SliceSource::Family(f) => f.slice_measure(r),
            SliceSource::Mask(m) => {
                let g = m.grid();
                let i = ((r - g.origin[0]) / g.h).floor();
                if i < 0.0 || i >= g.extents[0] as f64 {
                    return 0.0;
                }
                let i = i as usize;
                (0..g.extents[1]).filter(|&j| m.is_active(i, j)).count() as f64 * g.h
            }
        }
    }

    fn extent(&self) -> f64 {
        match self {
            SliceSource::Family(f) => match f.bbox() {
                Ok((lo, hi)) => lo[0].abs().max(hi[0].abs()),
                Err(_) => f64::INFINITY,
            },
            SliceSource::Mask(m) => {
                let g = m.grid();
                let a = g.origin[0];
                let b = a + g.extents[0] as f64 * g.h;
                a.abs().max(b.abs())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    /// smallest C with slice(R) <= C h(R) over the sampled R, both sides
    pub c_min: f64,
    /// h(R_k + eta) <= h(R_k) on the eta grid
    pub locally_monotone: bool,
    /// h(R_k) non-increasing along the prefix
    pub nonincreasing: bool,
    /// h(R_K) at most half of h(R_1), or zero
    pub vanishing: bool,
    pub samples: usize,
    pub pass: bool,
}

/// Sampled check of the one-directional decay condition.
pub fn check_decay_condition(spec: &DecaySpec, source: SliceSource<'_>) -> Result<DecayVerdict> {
    if spec.r_k.len() < 3 {
        return Err(Error::Inconclusive("need at least 3 values R_k".into()));
    }
    if !(spec.a > 0.0) || spec.r_k.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("need a > 0 and strictly increasing R_k".into()));
    }
    let h = |r: f64| spec.envelope.eval(r);
    let r_last = *spec.r_k.last().unwrap() + spec.a;
    let r_max = r_last.min(source.extent()).max(spec.r_k[0]);
    let n = 8192;
    let mut rs: Vec<f64> = (1..=n).map(|k| r_max * k as f64 / n as f64).collect();
    let etas: Vec<f64> = (0..32).map(|k| spec.a * k as f64 / 32.0).collect();
    for &rk in &spec.r_k {
        rs.extend(etas.iter().map(|e| rk + e));
    }
    let mut c_min = 0.0f64;
    for &r in &rs {
        let sl = source.slice(r).max(source.slice(-r));
        if sl > 0.0 {
            let hv = h(r);
            c_min = c_min.max(if hv > 0.0 { sl / hv } else { f64::INFINITY });
        }
    }
    let locally_monotone = spec
        .r_k
        .iter()
        .all(|&rk| etas.iter().all(|&e| h(rk + e) <= h(rk)));
    let hk: Vec<f64> = spec.r_k.iter().map(|&r| h(r)).collect();
    let nonincreasing = hk.windows(2).all(|w| w[1] <= w[0]);
    let vanishing = *hk.last().unwrap() <= 0.5 * hk[0] || *hk.last().unwrap() == 0.0;
    let pass = c_min.is_finite() && locally_monotone && nonincreasing && vanishing;
    Ok(DecayVerdict {
        c_min,
        locally_monotone,
        nonincreasing,
        vanishing,
        samples: rs.len(),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cusp_passes() {
        let eps = 0.2;
        let f = DomainFamily::cusp(eps, None);
        let spec = DecaySpec {
            envelope: Envelope::InversePower { coef: 1.0, exponent: 1.0 + eps },
            a: 1.0,
            r_k: (2..12).map(|k| k as f64).collect(),
        };
        let v = check_decay_condition(&spec, SliceSource::Family(&f)).unwrap();
        assert!(v.pass, "{v:?}");
        assert!(v.c_min <= 1.0 + 1e-12);
    }

    #[test]
    fn blocks_pass_with_gap_sequence() {
        let (eps, first, count) = (0.5, 1, 12);
        let f = DomainFamily::Blocks { eps, first, count };
        // R_k in the gaps between consecutive blocks
        let r_k: Vec<f64> = (first..first + count - 1)
            .map(|l| {
                let l = l as f64;
                l + l.powf(-2.0 - eps) + 0.05
            })
            .collect();
        let spec = DecaySpec { envelope: Envelope::BlockHeight { eps, first, count }, a: 0.5, r_k };
        let v = check_decay_condition(&spec, SliceSource::Family(&f)).unwrap();
        assert!(v.pass, "{v:?}");
        assert!((v.c_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_strip_fails() {
        let f = DomainFamily::strip(50.0);
        let spec = DecaySpec {
            envelope: Envelope::Constant { value: 2.0 },
            a: 1.0,
            r_k: vec![5.0, 10.0, 20.0, 40.0],
        };
        let v = check_decay_condition(&spec, SliceSource::Family(&f)).unwrap();
        assert!(!v.pass);
        assert!(!v.vanishing);
        assert!(v.c_min.is_finite());
    }

    #[test]
    fn mask_source_matches_family() {
        let f = DomainFamily::strip(8.0);
        let m = super::super::rasterize(&f, 0.25).unwrap();
        let spec = DecaySpec {
            envelope: Envelope::Constant { value: 2.0 },
            a: 1.0,
            r_k: vec![1.0, 2.0, 3.0],
        };
        let v = check_decay_condition(&spec, SliceSource::Mask(&m)).unwrap();
        assert!((v.c_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_is_inconclusive() {
        let f = DomainFamily::strip(8.0);
        let spec = DecaySpec { envelope: Envelope::Constant { value: 2.0 }, a: 1.0, r_k: vec![1.0, 2.0] };
        assert!(matches!(
            check_decay_condition(&spec, SliceSource::Family(&f)),
            Err(Error::Inconclusive(_))
        ));
    }
}
