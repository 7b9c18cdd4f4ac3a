use fracpoin::domain::scale_mask;
use fracpoin::seminorm::{assemble_regional, restricted_form, seminorm_loss_sloane};
use fracpoin::specfun::{reduction_residual, strip_normalization as normalization};
use fracpoin::{DomainFamily, FormKind, FracParams, ReductionParams, Result, SampledFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{mask, max_of, rel};
use crate::manifest::{or_default, ExperimentManifest};
use crate::report::{Row, SuiteReport};

pub fn reduction_identity(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let tol = m.tol("residual", 1e-10);
    let n_max = m.count("n_max", 6)? as u32;
    let ss = m.s_or(&[0.05, 0.25, 0.5, 0.75, 0.95]);
    for n in 2..=n_max {
        for k in 1..n {
            for &s in &ss {
                let res = reduction_residual(ReductionParams::new(k, n, s)?);
                r.row(Row::new(format!("m{k}_n{n}"), s, res).bound(tol).pass(res < tol));
            }
        }
    }
    let worst = max_of(r.rows.iter().map(|x| x.value));
    r.check("lattice_size", r.rows.len() >= 50, format!("{} triples", r.rows.len()));
    r.check("residual", worst < tol, format!("max residual {worst:.3e} vs {tol:.0e}"));
    Ok(())
}

pub fn strip_normalization(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let tol = m.tol("residual", 1e-10);
    for n in [2, 3, 5] {
        for s in m.s_or(&[0.6, 0.75, 0.9]) {
            let v = normalization(n, s)?;
            r.row(Row::new(format!("n{n}"), s, v).reference(1.0).pass((v - 1.0).abs() < tol));
        }
    }
    let worst = max_of(r.rows.iter().map(|x| (x.value - 1.0).abs()));
    r.check("normalization", worst < tol, format!("max |value - 1| {worst:.3e}"));
    Ok(())
}

/// Energies of random admissible vectors on a mask and on its dilates.
pub fn scaling_law(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let tol = m.tol("relative", 1e-10);
    let ts = or_default(&m.ladders.t, &[0.5, 2.0, 10.0]);
    let count = m.count("functions", 10)?;
    let cases = [
        (1, DomainFamily::interval(0.0, 1.0), m.param("h_1d", 1.0 / 64.0)),
        (
            2,
            DomainFamily::Box {
                lo: [0.0, 0.0],
                hi: [1.0, 1.0],
            },
            m.param("h_2d", 1.0 / 16.0),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed());
    let mut worst: f64 = 0.0;
    for (n, family, h) in cases {
        let base = mask(&family, h)?;
        for s in m.s_or(&[0.25, 0.75]) {
            let p = FracParams::new(n, s)?;
            for kind in [FormKind::Regional, FormKind::Restricted] {
                let build = |mk: &fracpoin::DomainMask| match kind {
                    FormKind::Regional => assemble_regional(mk, p),
                    FormKind::Restricted => restricted_form(mk, p),
                };
                let a = build(&base)?;
                let xs: Vec<Vec<f64>> = (0..count).map(|_| (0..a.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
                for &t in &ts {
                    let b = build(&scale_mask(&base, t)?)?;
                    let factor = t.powf(2.0 * s - n as f64);
                    let err = max_of(xs.iter().map(|x| rel(b.energy(x) * factor, a.energy(x))));
                    worst = worst.max(err);
                    r.row(Row::new(format!("{n}d_{kind:?}_s{s}").to_lowercase(), t, err).bound(tol).pass(err < tol));
                }
            }
        }
    }
    r.check("scaling", worst < tol, format!("max relative error {worst:.3e} over {count} functions per case"));
    Ok(())
}

fn bump(x: [f64; 2]) -> f64 {
    ((1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1])).max(0.0).powi(2)
}

/// Direct assembly against the line-integral evaluator on smooth functions.
pub fn loss_sloane(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let tol = m.tol("gap", 0.02);
    let h = m.param("h", 1.0 / 64.0);
    let k = m.count("directions", 64)?;
    let sq = mask(
        &DomainFamily::Box {
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
        },
        h,
    )?;
    type Test = fn([f64; 2]) -> f64;
    let tests: [(&str, Test); 3] = [
        ("bump", bump),
        ("tilted", |x| bump(x) * (1.0 + 0.5 * x[0])),
        ("offset", |x| bump(x) * (-2.0 * ((x[0] - 0.3).powi(2) + (x[1] + 0.2).powi(2))).exp()),
    ];
    let mut worst: f64 = 0.0;
    for s in m.s_or(&[0.25, 0.5, 0.75]) {
        let p = FracParams::new(2, s)?;
        let form = assemble_regional(&sq, p)?;
        let rows: Vec<Result<(String, f64, f64)>> = tests
            .par_iter()
            .map(|(name, f)| {
                let u = SampledFunction::compactly_supported(sq.clone(), f)?;
                let direct = form.energy_of(&u)?;
                let ls = seminorm_loss_sloane(&u, p, k, FormKind::Regional)?;
                Ok((name.to_string(), direct, ls))
            })
            .collect();
        for row in rows {
            let (name, direct, ls) = row?;
            let gap = rel(ls, direct);
            worst = worst.max(gap);
            r.row(Row::new(format!("{name}_s{s}"), s, ls).reference(direct).bound(tol).pass(gap < tol));
        }
    }
    r.check("gap", worst < tol, format!("max relative gap {worst:.3e} at K = {k}, h = {h}"));
    Ok(())
}
