use fracpoin::domain::rasterize;
use fracpoin::eigen::{estimate, estimate_p1, picone_lower_bound_check, smallest_eigenvalue, RefinementStudy, StudyPlan};
use fracpoin::seminorm::{assemble_regional, restricted_form};
use fracpoin::witness::{angle_bound_directional, bump_seminorm, tensor_split as split, TensorFamily};
use fracpoin::{DomainFamily, DomainMask, Error, FormKind, FracParams, Result};
use rayon::prelude::*;

use super::{cross_section, mask, max_of, rel};
use crate::manifest::{or_default, ExperimentManifest};
use crate::report::{Row, SuiteReport};

fn strip_family(m: &ExperimentManifest) -> Result<DomainFamily> {
    match &m.family {
        None => Ok(DomainFamily::strip(4.0)),
        Some(f @ DomainFamily::TruncatedStrip { .. }) => Ok(f.clone()),
        Some(_) => Err(Error::Config("suite needs a truncated strip family".into())),
    }
}

fn half_width(f: &DomainFamily) -> f64 {
    match f {
        DomainFamily::TruncatedStrip { half_width, .. } => *half_width,
        _ => 1.0,
    }
}

fn study_rows(r: &mut SuiteReport, label: &str, study: &RefinementStudy) {
    for v in &study.verdicts {
        r.check(&format!("{label}_{}", v.name), v.pass, v.detail.clone());
    }
    for e in &study.ladder {
        r.row(Row::new(label, e.length.unwrap_or(e.h), e.value).pass(e.accepted));
    }
}

/// Truncated strips against the cross-section interval, both at the same h.
fn strip_vs_interval(m: &ExperimentManifest, r: &mut SuiteReport, kind: FormKind, s_default: f64) -> Result<()> {
    let tol = m.tol("relative", 0.05);
    let s = m.s_or(&[s_default])[0];
    let h = or_default(&m.ladders.h, &[1.0 / 32.0])[0];
    let lengths = or_default(&m.ladders.length, &[4.0, 8.0, 16.0]);
    let family = strip_family(m)?;
    let a = half_width(&family);
    let one = estimate(&DomainFamily::interval(-a, a), FracParams::new(1, s)?, &StudyPlan::h_ladder(h, 1, None), kind)?;
    let reference = one.ladder[0].value;
    r.row(Row::new("cross_section", h, reference).pass(one.ladder[0].accepted));
    let study = estimate(&family, FracParams::new(2, s)?, &StudyPlan::length_ladder(h, &lengths), kind)?;
    study_rows(r, "strip", &study);
    let ext = study.extrapolated.unwrap_or(f64::NAN);
    let gap = rel(ext, reference);
    r.row(Row::new("extrapolated", f64::INFINITY, ext).reference(reference).bound(tol).pass(gap < tol));
    r.check(
        "limit",
        gap < tol,
        format!(
            "extrapolated {ext:.8} vs cross-section {reference:.8}: relative gap {gap:.3e} (rate {:?}, flagged {})",
            study.slope, study.rate_flagged
        ),
    );
    if kind == FormKind::Regional {
        // witness upper bound with W the cross-section ground state and l = L
        let v = bump_seminorm(s)?;
        let mut ok = true;
        for e in &study.ladder {
            let l = e.length.expect("length ladder");
            let i2 = v * l.powf(-2.0 * s);
            let bound = reference + i2 + 2.0 * (reference * i2).sqrt();
            ok &= e.value <= bound;
            r.row(Row::new("strip_upper_bound", l, e.value).reference(reference).bound(bound).pass(e.value <= bound));
        }
        r.check("upper_bound", ok, "P1(strip, L) <= P1(1D) + I2 + 2 sqrt(P1(1D) I2) at l = L".into());
    }
    Ok(())
}

pub fn strip_p1(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    strip_vs_interval(m, r, FormKind::Regional, 0.75)
}

/// Dilated tensor witnesses: I1 against [W]^2, the I2 rate, Cauchy-Schwarz.
pub fn tensor_split(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let tol_i1 = m.tol("i1", 0.02);
    let tol_slope = m.tol("slope", 0.15);
    let h = or_default(&m.ladders.h, &[1.0 / 16.0])[0];
    let ells = or_default(&m.ladders.ell, &[1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0]);
    let strip = m.family.clone().unwrap_or(DomainFamily::strip(4.0));
    for s in m.s_or(&[0.3, 0.5, 0.75]) {
        let (w, _) = cross_section(FormKind::Regional, s, h)?;
        let rep = split(&TensorFamily::new(w, ells.clone())?, &strip, FracParams::new(2, s)?)?;
        for x in &rep.rows {
            r.row(Row::new(format!("i1_s{s}"), x.ell, x.i1).reference(rep.w_seminorm).bound(tol_i1).pass(x.i1_gap < tol_i1));
            r.row(Row::new(format!("i2_s{s}"), x.ell, x.i2).bound(x.i2_bound).pass(x.i2 <= x.i2_bound * (1.0 + 1e-8)));
            r.row(Row::new(format!("i3_s{s}"), x.ell, x.i3).bound(2.0 * (x.i1 * x.i2).sqrt()).pass(x.cauchy_schwarz));
        }
        let gap = max_of(rep.rows.iter().map(|x| x.i1_gap));
        r.check(&format!("i1_s{s}"), gap < tol_i1, format!("max relative gap to [W]^2 = {:.8}: {gap:.3e}", rep.w_seminorm));
        let slope = rep.i2_slope.unwrap_or(f64::NAN);
        r.check(
            &format!("i2_slope_s{s}"),
            (slope + 2.0 * s).abs() < tol_slope,
            format!("fitted {slope:.4} vs {:.4} +- {tol_slope}", -2.0 * s),
        );
        r.check(
            &format!("i2_bound_s{s}"),
            rep.rows.iter().all(|x| x.i2 <= x.i2_bound * (1.0 + 1e-8)),
            format!("I2 <= [v]^2 l^(-2s), [v]^2 = {:.8}", rep.v_seminorm),
        );
        r.check(
            &format!("cauchy_schwarz_s{s}"),
            rep.rows.iter().all(|x| x.cauchy_schwarz),
            "|I3| <= 2 sqrt(I1 I2) (1 + 1e-8)".into(),
        );
    }
    Ok(())
}

/// Nested pairs (inner, outer) with the inner set contained in the outer.
fn nested_pairs() -> Vec<(DomainFamily, DomainFamily)> {
    use fracpoin::domain::CrossShape;
    let bx = |x: f64, y: f64| DomainFamily::Box { lo: [0.0, 0.0], hi: [x, y] };
    let cross = |arm| DomainFamily::StripCross {
        shape: CrossShape::LShape,
        arm,
    };
    vec![
        (DomainFamily::interval(0.0, 1.0), DomainFamily::interval(0.0, 2.0)),
        (DomainFamily::interval(0.0, 1.0), DomainFamily::interval(-1.0, 1.0)),
        (DomainFamily::interval(-0.5, 0.5), DomainFamily::interval(-1.0, 1.0)),
        (DomainFamily::strip(1.0), DomainFamily::strip(2.0)),
        (DomainFamily::strip(2.0), DomainFamily::strip(4.0)),
        (bx(1.0, 1.0), bx(2.0, 1.0)),
        (bx(2.0, 1.0), bx(2.0, 2.0)),
        (
            DomainFamily::Ball {
                center: [0.0, 0.0],
                radius: 0.75,
            },
            DomainFamily::Box {
                lo: [-1.0, -1.0],
                hi: [1.0, 1.0],
            },
        ),
        (cross(2.0), cross(3.0)),
        (DomainFamily::AnnuliUnion { k_max: 1 }, DomainFamily::AnnuliUnion { k_max: 2 }),
    ]
}

fn contains(outer: &DomainMask, inner: &DomainMask) -> bool {
    let cells: std::collections::HashSet<[i64; 2]> = outer.lattice_cells().into_iter().collect();
    inner.lattice_cells().iter().all(|c| cells.contains(c))
}

/// (P1, P2) of one mask.
fn both(mk: &DomainMask, s: f64) -> Result<(f64, f64)> {
    let p = FracParams::new(mk.dim() as u32, s)?;
    let p1 = smallest_eigenvalue(&assemble_regional(mk, p)?)?.value;
    let p2 = smallest_eigenvalue(&restricted_form(mk, p)?)?.value;
    Ok((p1, p2))
}

pub fn strip_p2(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    strip_vs_interval(m, r, FormKind::Restricted, 0.5)?;
    let s = m.s_or(&[0.5])[0];
    let h = m.param("h_pairs", 1.0 / 16.0);
    let eig = m.tol("eigen", 1e-8);
    let results: Vec<Result<(bool, (f64, f64), (f64, f64))>> = nested_pairs()
        .par_iter()
        .map(|(inner, outer)| {
            let (a, b) = (rasterize(inner, h)?, rasterize(outer, h)?);
            Ok((contains(&b, &a), both(&a, s)?, both(&b, s)?))
        })
        .collect();
    let (mut mono, mut order, mut nested) = (true, true, true);
    for (k, res) in results.into_iter().enumerate() {
        let (inside, (p1_in, p2_in), (p1_out, p2_out)) = res?;
        let ok = p2_out <= p2_in * (1.0 + eig);
        mono &= ok;
        nested &= inside;
        order &= p2_in >= p1_in && p2_out >= p1_out;
        r.row(Row::new(format!("pair{k}_p2_outer"), k as f64, p2_out).bound(p2_in).pass(ok));
        r.row(Row::new(format!("pair{k}_p1_inner"), k as f64, p1_in).bound(p2_in).pass(p2_in >= p1_in));
        r.row(Row::new(format!("pair{k}_p1_outer"), k as f64, p1_out).bound(p2_out).pass(p2_out >= p1_out));
    }
    r.check("nested_masks", nested, "inner cells are a subset of outer cells".into());
    r.check("monotone", mono, format!("P2(outer) <= P2(inner) on 10 pairs (eigen tolerance {eig:.0e})"));
    let strip_rows: Vec<(f64, f64)> = r.rows.iter().filter(|x| x.label == "strip").map(|x| (x.param, x.value)).collect();
    let lengths: Vec<f64> = strip_rows.iter().map(|x| x.0).collect();
    let hs = or_default(&m.ladders.h, &[1.0 / 32.0])[0];
    let p1s = estimate_p1(&strip_family(m)?, FracParams::new(2, s)?, &StudyPlan::length_ladder(hs, &lengths))?;
    for (e, (l, p2)) in p1s.ladder.iter().zip(&strip_rows) {
        order &= *p2 >= e.value;
        r.row(Row::new("strip_p1", *l, e.value).bound(*p2).pass(*p2 >= e.value));
    }
    r.check("p2_above_p1", order, "P2 >= P1 on every pair member and strip rung".into());

    // transfer of the cross-section bound to a strip through the pointwise inequality
    let hp = m.param("h_picone", 1.0 / 16.0);
    let (w, lam) = cross_section(FormKind::Restricted, s, hp)?;
    let strip = rasterize(&DomainFamily::strip(m.param("picone_length", 4.0)), hp)?;
    let v = picone_lower_bound_check(&w, lam, &strip, FracParams::new(2, s)?, m.seed(), m.tol("picone", 0.1))?;
    r.row(Row::new("picone_min_quotient", hp, v.min_quotient).reference(lam).bound(v.bound).pass(v.pass));
    r.check(
        "picone_transfer",
        v.pass,
        format!("{} trials, {} violations, min quotient {:.6} vs {:.6}", v.trials, v.violations, v.min_quotient, v.bound),
    );
    Ok(())
}

/// Strip constant against the chord bound with directional weighting.
pub fn angle_bound(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let s = m.s_or(&[0.75])[0];
    let h = or_default(&m.ladders.h, &[1.0 / 32.0])[0];
    let length = or_default(&m.ladders.length, &[4.0])[0];
    let eig = m.tol("eigen", 1e-8);
    let p1 = FracParams::new(1, s)?;
    let unit = smallest_eigenvalue(&assemble_regional(&*mask(&DomainFamily::interval(0.0, 1.0), h / 2.0)?, p1)?)?.value;
    let reference = smallest_eigenvalue(&assemble_regional(&*mask(&DomainFamily::interval(-1.0, 1.0), h)?, p1)?)?.value;
    let p = FracParams::new(2, s)?;
    let bound = angle_bound_directional(2.0, p, unit)?;
    let strip = smallest_eigenvalue(&assemble_regional(&*mask(&DomainFamily::strip(length), h)?, p)?)?.value;
    r.row(Row::new("unit_interval", h / 2.0, unit));
    r.row(Row::new("bound", 2.0, bound).reference(reference).pass(rel(bound, reference) < eig));
    r.row(Row::new("strip", length, strip).bound(bound).pass(strip > bound));
    r.check("strip_exceeds_bound", strip > bound, format!("strip {strip:.8} vs bound {bound:.8}"));
    r.check(
        "identity_chain",
        rel(bound, reference) < eig,
        format!("bound {bound:.12} vs interval (-1, 1) {reference:.12}"),
    );
    Ok(())
}
