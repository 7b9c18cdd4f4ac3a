use fracpoin::domain::symmetrize_cylindrical;
use fracpoin::seminorm::cross_slab_energy;
use fracpoin::witness::picone_pointwise;
use fracpoin::{DomainMask, FracParams, Grid, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::manifest::ExperimentManifest;
use crate::report::{Row, SuiteReport};

/// Pointwise inequality over random pairs and the two analytic edge cases.
pub fn picone(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let trials = m.count("trials", 1000)?;
    let len = m.count("indices", 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed());
    let mut violations = 0;
    for t in 0..trials {
        let u: Vec<f64> = (0..len).map(|_| rng.gen_range(1e-3..10.0)).collect();
        // every fourth trial has sparse v with exact zeros
        let v: Vec<f64> = (0..len)
            .map(|_| if t % 4 == 3 && rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..10.0) })
            .collect();
        violations += picone_pointwise(&u, &v)?;
    }
    let pairs = trials * len * (len - 1) / 2;
    r.row(Row::new("random_violations", trials as f64, violations as f64).pass(violations == 0));
    r.check("random", violations == 0, format!("{violations} violations over {pairs} index pairs"));

    let u: Vec<f64> = (0..len).map(|_| rng.gen_range(1e-3..10.0)).collect();
    let same = picone_pointwise(&u, &u)?;
    let mut worst: f64 = 0.0;
    for x in 0..len {
        for y in x + 1..len {
            let lhs = (u[x] - u[y]) * (u[x] * u[x] / u[x] - u[y] * u[y] / u[y]);
            let rhs = (u[x] - u[y]).powi(2);
            worst = worst.max((lhs - rhs).abs() / rhs.max(1.0));
        }
    }
    r.row(Row::new("v_equals_u", len as f64, same as f64).pass(same == 0));
    r.check("v_equals_u", same == 0 && worst <= 1e-12, format!("{same} violations, max equality defect {worst:.1e}"));
    let c = m.param("constant", 2.5);
    let flat = picone_pointwise(&u, &vec![c; len])?;
    r.row(Row::new("v_constant", c, flat as f64).pass(flat == 0));
    r.check("v_constant", flat == 0, format!("{flat} violations for v = {c}"));
    Ok(())
}

/// Random mask with columns of scattered active cells.
fn random_mask(rng: &mut ChaCha8Rng, h: f64) -> Result<DomainMask> {
    let (nx, ny) = (rng.gen_range(6..20), rng.gen_range(6..20));
    let grid = Grid::new(2, [0.0, 0.0], h, [nx + 2, ny + 2])?;
    let density = rng.gen_range(0.2..0.9);
    let mut active = vec![false; grid.cell_count()];
    for i in 1..=nx {
        for j in 1..=ny {
            active[grid.index(i, j)] = rng.gen_bool(density);
        }
    }
    active[grid.index(1, 1)] = true;
    DomainMask::new(grid, active)
}

/// Cross-slab kernel energy never decreases under cylindrical symmetrization.
pub fn symmetrization(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let count = m.count("masks", 50)?;
    let h = m.param("h", 0.125);
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed());
    let (mut holds, mut preserved) = (true, true);
    let mut cases = 0;
    for k in 0..count {
        let mask = random_mask(&mut rng, h)?;
        let sym = symmetrize_cylindrical(&mask)?;
        preserved &= sym.column_counts() == mask.column_counts();
        let nx = mask.grid().extents[0];
        // I and J: column ranges on either side of a random cut
        let cut = rng.gen_range(2..nx - 1);
        let gap = rng.gen_range(0..(nx - cut).min(3));
        let x = |i: usize| i as f64 * h;
        let i_set = [(x(0), x(cut))];
        let j_set = [(x(cut + gap), x(nx))];
        for s in m.s_or(&[0.25, 0.5, 0.75]) {
            let p = FracParams::new(2, s)?;
            let before = cross_slab_energy(&mask, &i_set, &j_set, p)?;
            let after = cross_slab_energy(&sym, &i_set, &j_set, p)?;
            let ok = before <= after + 1e-8 * after.max(1.0);
            holds &= ok;
            cases += 1;
            r.row(Row::new(format!("mask{k}_s{s}"), s, before).bound(after).pass(ok));
        }
    }
    r.check("rearrangement", holds, format!("{cases} (mask, s) cases"));
    r.check("slice_measure", preserved, "column counts identical after symmetrization".into());
    Ok(())
}
