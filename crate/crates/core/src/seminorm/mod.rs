//! Discrete Gagliardo seminorms over piecewise-linear nodal functions.

mod cross_slab;
mod exterior;
mod fft;
mod form;
mod kernel;
mod loss_sloane;
pub mod stencil;

pub use cross_slab::cross_slab_energy;
pub use form::{
    assemble_regional, assemble_restricted, restricted_form, DenseForm, EnclosingBox, FormKind, QuadForm,
    SampledFunction, DENSE_LIMIT,
};
pub use loss_sloane::seminorm_loss_sloane;

use crate::error::{Error, Result};

/// Integral of |x - y|^(-1-2s) over the complement of (a, b).
pub fn tail_weight_1d(a: f64, b: f64, x: f64, s: f64) -> Result<f64> {
    if !(a < x && x < b) {
        return Err(Error::Domain(format!("point {x} outside ({a}, {b})")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} outside (0, 1)")));
    }
    Ok(kernel::interval_exterior(x, a, b, s))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::domain::{rasterize, scale_mask, DomainFamily, DomainMask};
    use crate::quad;
    use crate::specfun::{c_ns, FracParams};

    fn interval_mask(a: f64, b: f64, h: f64) -> Arc<DomainMask> {
        Arc::new(rasterize(&DomainFamily::interval(a, b), h).unwrap())
    }

    fn square_mask(half: f64, h: f64) -> Arc<DomainMask> {
        let f = DomainFamily::Box {
            lo: [-half, -half],
            hi: [half, half],
        };
        Arc::new(rasterize(&f, h).unwrap())
    }

    fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn tail_weight_examples() {
        assert!((tail_weight_1d(-1.0, 1.0, 0.0, 0.5).unwrap() - 2.0).abs() < 1e-14);
        let x = 1.0 - 1e-3;
        let v = tail_weight_1d(-1.0, 1.0, x, 0.5).unwrap();
        assert!((v - (1e3 + 1.0 / (2.0 - 1e-3))).abs() < 1e-10 * v);
        assert_eq!(tail_weight_1d(-1.0, 1.0, 0.3, 0.3).unwrap(), tail_weight_1d(-1.0, 1.0, -0.3, 0.3).unwrap());
        assert!(tail_weight_1d(-1.0, 1.0, 1.0, 0.5).is_err());
        // truncated numerical integral
        let s = 0.5;
        let near = quad::tanh_sinh(&|_y, da, _db| (1.0 + da).powf(-1.0 - 2.0 * s), 0.0, 1e4, 1e-12);
        let far = (1.0f64 + 1e4).powf(-2.0 * s) / (2.0 * s);
        assert!((2.0 * (near + far) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn hat_energy_converges_to_oracle() {
        // independent adaptive double quadrature of the continuum energy
        let oracle = 0.146021704765409;
        let p = FracParams::new(1, 0.25).unwrap();
        let mut errs = Vec::new();
        for k in [6, 7, 8] {
            let h = 0.5f64.powi(k);
            let mask = interval_mask(-1.0, 1.0, h);
            let form = assemble_regional(&mask, p).unwrap();
            let u = SampledFunction::compactly_supported(mask.clone(), |x| 1.0 - x[0].abs()).unwrap();
            let e = form.energy_of(&u).unwrap();
            errs.push((e - oracle).abs() / oracle);
        }
        assert!(errs[2] < 0.01, "{errs:?}");
        // the hat lies in the discrete space, so only quadrature error remains
        assert!(errs.iter().all(|&e| e < 1e-9), "{errs:?}");
    }

    #[test]
    fn hat_energy_other_orders() {
        for (s, oracle) in [(0.5, 0.390697144124556), (0.75, 0.881318950113726)] {
            let p = FracParams::new(1, s).unwrap();
            let mask = interval_mask(-1.0, 1.0, 1.0 / 256.0);
            let form = assemble_regional(&mask, p).unwrap();
            let u = SampledFunction::compactly_supported(mask.clone(), |x| 1.0 - x[0].abs()).unwrap();
            let e = form.energy_of(&u).unwrap();
            assert!((e - oracle).abs() < 0.01 * oracle, "s={s}: {e} vs {oracle}");
        }
    }

    #[test]
    fn constants_have_zero_stencil_energy() {
        // the full-space stencil annihilates constants: its entries sum to zero
        let st = stencil::Stencil::compute(2, 0.6, [300, 300]);
        let mut sum = 0.0;
        for a in -300i64..=300 {
            for b in -300i64..=300 {
                sum += st.get(a, b);
            }
        }
        // remainder beyond the box is about -(8 H(1) / 2s) 300.5^(-2s)
        let rem = -crate::seminorm::kernel::HKernel::new(0.6).h(1.0) * 8.0 / 1.2 * 300.5f64.powf(-1.2);
        assert!((sum + rem).abs() < 1e-4 * st.get(0, 0), "{sum} {rem}");
    }

    #[test]
    fn symmetric_and_positive_2d() {
        let mask = square_mask(1.0, 1.0 / 8.0);
        let p = FracParams::new(2, 0.4).unwrap();
        let form = assemble_regional(&mask, p).unwrap();
        let d = form.to_dense().unwrap();
        let n = d.a.nrows();
        let mut maxa: f64 = 0.0;
        for k in 0..n {
            for l in 0..n {
                maxa = maxa.max(d.a[(k, l)].abs());
            }
        }
        for k in 0..n {
            for l in 0..n {
                assert!((d.a[(k, l)] - d.a[(l, k)]).abs() <= 1e-12 * maxa);
            }
        }
        let eig = d.a.clone().symmetric_eigenvalues();
        assert!(eig.min() > -1e-12 * maxa);
        // the operator agrees with the dense matrix
        let mut rng = ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED);
        let x = random_vector(n, &mut rng);
        let y = form.apply(&x);
        let yd = &d.a * nalgebra::DVector::from_vec(x.clone());
        for k in 0..n {
            assert!((y[k] - yd[k]).abs() < 1e-10 * maxa);
        }
    }

    #[test]
    fn scaling_law_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cases: Vec<(Arc<DomainMask>, u32)> = vec![(interval_mask(0.0, 1.0, 1.0 / 64.0), 1), (square_mask(0.5, 1.0 / 16.0), 2)];
        for (mask, n) in cases {
            let p = FracParams::new(n, 0.35).unwrap();
            let base = assemble_regional(&mask, p).unwrap();
            let x = random_vector(base.len(), &mut rng);
            let e0 = base.energy(&x);
            for t in [0.5, 2.0, 10.0] {
                let scaled = scale_mask(&mask, t).unwrap();
                let form = assemble_regional(&scaled, p).unwrap();
                let e = form.energy(&x) * t.powf(2.0 * 0.35 - n as f64);
                assert!((e - e0).abs() < 1e-10 * e0.abs(), "t={t}: {e} vs {e0}");
            }
        }
    }

    #[test]
    fn restricted_dominates_regional() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (mask, n) in [(interval_mask(0.0, 1.0, 1.0 / 64.0), 1), (square_mask(0.5, 1.0 / 16.0), 2)] {
            for s in [0.25, 0.75] {
                let p = FracParams::new(n, s).unwrap();
                let reg = assemble_regional(&mask, p).unwrap();
                let res = restricted_form(&mask, p).unwrap();
                for _ in 0..10 {
                    let x = random_vector(reg.len(), &mut rng);
                    assert!(res.energy(&x) >= reg.energy(&x));
                }
                // a forced-zero-trace constant has positive energy
                let ones = vec![1.0; res.len()];
                assert!(res.energy(&ones) > 0.0);
            }
        }
    }

    #[test]
    fn restricted_equals_box_regional_plus_tail() {
        // [u]^2_{R} = [u]^2_{B} + C int_B u^2 tau_B with tau_B the box-complement weight
        let s = 0.6;
        let p = FracParams::new(1, s).unwrap();
        let h = 1.0 / 64.0;
        let inner = interval_mask(-0.5, 0.5, h);
        let bump = |x: f64| (1.0 - 4.0 * x * x).max(0.0).powi(2);
        let res = restricted_form(&inner, p).unwrap();
        let u = SampledFunction::compactly_supported(inner.clone(), |x| bump(x[0])).unwrap();
        let e_res = res.energy_of(&u).unwrap();
        let mut boxes = Vec::new();
        for b in [1.0, 2.0] {
            let outer = interval_mask(-b, b, h);
            let reg = assemble_regional(&outer, p).unwrap();
            let v = SampledFunction::compactly_supported(outer.clone(), |x| bump(x[0])).unwrap();
            let e_reg = reg.energy_of(&v).unwrap();
            // piecewise-linear interpolant squared against the box tail weight
            let g = crate::quad::GaussRule::new(8);
            let mut tail = 0.0;
            let m = (1.0 / h) as i64;
            for k in -m / 2..m / 2 {
                let (x0, x1) = (k as f64 * h, (k + 1) as f64 * h);
                let (u0, u1) = (bump(x0), bump(x1));
                tail += g.integrate(x0, x1, |x| {
                    let t = (x - x0) / h;
                    let ui = u0 * (1.0 - t) + u1 * t;
                    ui * ui * tail_weight_1d(-b, b, x, s).unwrap()
                });
            }
            let total = e_reg + c_ns(p) * tail;
            assert!((total - e_res).abs() < 1e-6 * e_res, "b={b}: {total} vs {e_res}");
            boxes.push(total);
        }
        assert!((boxes[0] - boxes[1]).abs() < 0.005 * boxes[1]);
    }

    #[test]
    fn enclosing_box_is_validated() {
        let mask = interval_mask(-0.5, 0.5, 1.0 / 32.0);
        let p = FracParams::new(1, 0.5).unwrap();
        let small = EnclosingBox {
            lo: [-1.0, 0.0],
            hi: [1.0, 0.0],
        };
        assert!(assemble_restricted(&mask, p, &small).is_err());
        let big = EnclosingBox::around(&mask);
        assert!(assemble_restricted(&mask, p, &big).is_ok());
    }

    #[test]
    fn binary_round_trip() {
        let mask = interval_mask(0.0, 1.0, 1.0 / 16.0);
        let form = assemble_regional(&mask, FracParams::new(1, 0.5).unwrap()).unwrap();
        let mut buf = Vec::new();
        form.write_binary(&mut buf).unwrap();
        let n = form.len();
        assert_eq!(buf.len(), 4 + 8 + 4 + 8 + 8 * (n * (n + 1) / 2 + n));
        let back = DenseForm::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, form.to_dense().unwrap());
    }

    #[test]
    fn refinement_self_convergence() {
        // smooth bump on a square, s = 0.75
        let p = FracParams::new(2, 0.75).unwrap();
        let f = |x: [f64; 2]| ((1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1])).max(0.0).powi(2);
        let mut e = Vec::new();
        for k in [3, 4, 5] {
            let mask = square_mask(1.0, 0.5f64.powi(k));
            let form = assemble_regional(&mask, p).unwrap();
            let u = SampledFunction::compactly_supported(mask.clone(), f).unwrap();
            e.push(form.energy_of(&u).unwrap());
        }
        let d1 = (e[0] - e[1]).abs();
        let d2 = (e[1] - e[2]).abs();
        assert!(d1 < 4.0 * d2 || d1 < 1e-12, "{e:?}");
        assert!(d2 < d1, "{e:?}");
    }
}
