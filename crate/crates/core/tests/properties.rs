use std::sync::Arc;

use fracpoin::domain::{finite_ball_radius, scale_mask, symmetrize_cylindrical};
use fracpoin::eigen::smallest_eigenpair;
use fracpoin::eigen::SolverOptions;
use fracpoin::seminorm::{assemble_regional, restricted_form};
use fracpoin::specfun::{beta_fn, c_ns, directional_weight, gamma_fn, sphere_measure, theta_mn, theta_mn_quadrature};
use fracpoin::witness::{cutoff_function, dilated_bump, picone_pointwise};
use fracpoin::{DomainMask, FracParams, Grid, ReductionParams};
use proptest::prelude::*;

/// Union of rectangles on a grid with a one-cell empty margin.
fn rect_mask(h: f64, rects: &[(usize, usize, usize, usize)]) -> DomainMask {
    let (nx, ny) = (14, 14);
    let grid = Grid::new(2, [0.0, 0.0], h, [nx, ny]).unwrap();
    let mut active = vec![false; nx * ny];
    for &(i0, j0, w, hgt) in rects {
        for i in i0..(i0 + w).min(nx - 1) {
            for j in j0..(j0 + hgt).min(ny - 1) {
                active[grid.index(i, j)] = true;
            }
        }
    }
    DomainMask::new(grid, active).unwrap()
}

fn rects() -> impl Strategy<Value = Vec<(usize, usize, usize, usize)>> {
    prop::collection::vec((1usize..8, 1usize..8, 3usize..7, 3usize..7), 1..4)
}

fn random_vec(len: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn beta_is_symmetric_and_matches_gamma(x in 0.05f64..8.0, y in 0.05f64..8.0) {
        let b = beta_fn(x, y).unwrap();
        prop_assert_eq!(b, beta_fn(y, x).unwrap());
        let g = gamma_fn(x).unwrap() * gamma_fn(y).unwrap() / gamma_fn(x + y).unwrap();
        prop_assert!((b - g).abs() <= 1e-12 * g.abs());
    }

    #[test]
    fn reduction_identity_and_theta_quadrature(n in 2u32..7, m_off in 0u32..5, s in 0.02f64..0.98) {
        let m = 1 + m_off % (n - 1);
        let r = ReductionParams::new(m, n, s).unwrap();
        let lhs = c_ns(FracParams::new(n, s).unwrap()) * theta_mn(r);
        let rhs = c_ns(FracParams::new(n - m, s).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-10 * rhs);
        let q = theta_mn_quadrature(r);
        prop_assert!((q - theta_mn(r)).abs() < 1e-9 * theta_mn(r));
    }

    #[test]
    fn directional_weight_below_sphere(n in 2u32..8, s in 0.01f64..0.99) {
        prop_assert!(directional_weight(n, s).unwrap() < sphere_measure(n).unwrap());
    }

    #[test]
    fn symmetrization_is_idempotent_and_slice_preserving(r in rects()) {
        let mask = rect_mask(0.25, &r);
        let sym = symmetrize_cylindrical(&mask).unwrap();
        prop_assert_eq!(sym.column_counts(), mask.column_counts());
        let twice = symmetrize_cylindrical(&sym).unwrap();
        prop_assert!(twice.same_cells(&sym));
    }

    #[test]
    fn ball_radius_scales_exactly(r in rects(), t in 0.1f64..10.0) {
        let mask = rect_mask(0.25, &r);
        let scaled = scale_mask(&mask, t).unwrap();
        let (a, b) = (finite_ball_radius(&scaled), t * finite_ball_radius(&mask));
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn forms_are_symmetric_positive_and_ordered(r in rects(), s in 0.1f64..0.9, seed in any::<u64>()) {
        let mask = rect_mask(0.25, &r);
        let p = FracParams::new(2, s).unwrap();
        let reg = assemble_regional(&mask, p).unwrap();
        let res = restricted_form(&mask, p).unwrap();
        let n = reg.len();
        prop_assume!(n > 0);
        for k in 0..n.min(12) {
            for l in 0..n.min(12) {
                let (a, b) = (reg.entry(k, l), reg.entry(l, k));
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
            }
        }
        let x = random_vec(n, seed);
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        let (er, es) = (reg.energy(&x), res.energy(&x));
        prop_assert!(er >= -1e-12 * norm2);
        prop_assert!(es >= er - 1e-12 * es.abs());
    }

    #[test]
    fn discrete_scaling_law(r in rects(), s in 0.1f64..0.9, t in prop::sample::select(vec![0.5, 2.0, 10.0]), seed in any::<u64>()) {
        let mask = rect_mask(0.25, &r);
        let p = FracParams::new(2, s).unwrap();
        let a = assemble_regional(&mask, p).unwrap();
        let b = assemble_regional(&scale_mask(&mask, t).unwrap(), p).unwrap();
        prop_assume!(a.len() > 0);
        let x = random_vec(a.len(), seed);
        let (ea, eb) = (a.energy(&x), b.energy(&x) * t.powf(2.0 * s - 2.0));
        prop_assert!((ea - eb).abs() < 1e-10 * ea.abs());
    }

    #[test]
    fn rayleigh_quotients_bound_the_eigenvalue(r in rects(), s in 0.2f64..0.8, seed in any::<u64>()) {
        let mask = rect_mask(0.25, &r);
        let form = restricted_form(&mask, FracParams::new(2, s).unwrap()).unwrap();
        prop_assume!(form.len() > 1);
        let lam = smallest_eigenpair(&form, &SolverOptions::default()).unwrap().value;
        let x = random_vec(form.len(), seed);
        prop_assert!(form.rayleigh(&x) >= lam - 1e-10 * lam.max(1.0));
    }

    #[test]
    fn picone_has_no_violations(pairs in prop::collection::vec((1e-3f64..10.0, 0.0f64..10.0), 2..200)) {
        let (u, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert_eq!(picone_pointwise(&u, &v).unwrap(), 0);
    }

    #[test]
    fn cutoffs_lie_in_unit_interval(r in rects(), delta in 0.25f64..3.0) {
        let mask = Arc::new(rect_mask(0.0625, &r));
        let u = cutoff_function(&mask, delta).unwrap();
        prop_assert!(u.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn dilated_bump_keeps_unit_norm(l in 0.01f64..100.0) {
        let g = fracpoin::quad::GaussRule::new(20);
        let norm = g.integrate(-l, 0.0, |x| dilated_bump(x, l).powi(2)) + g.integrate(0.0, l, |x| dilated_bump(x, l).powi(2));
        prop_assert!((norm - 1.0).abs() < 1e-6);
    }
}
