use fracpoin::domain::{distance_average, CrossShape};
use fracpoin::eigen::smallest_eigenvalue;
use fracpoin::seminorm::assemble_regional;
use fracpoin::witness::{cutoff_rayleigh, window_rayleigh, CutoffFamily, WindowFamily, WindowReport};
use fracpoin::{DomainFamily, FracParams, Result, Window};

use super::mask;
use crate::manifest::{or_default, ExperimentManifest};
use crate::report::{Row, SuiteReport};

fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Boundary cutoffs on a bounded set: quotients vanish like delta^(1-2s).
pub fn cutoff_vanishing(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let tol = m.tol("slope", 0.1);
    let family = m.family.clone().unwrap_or(DomainFamily::interval(0.0, 1.0));
    let h = or_default(&m.ladders.h, &[2f64.powi(-10)])[0];
    let deltas = or_default(&m.ladders.delta, &(3..=7).map(|k| 2f64.powi(-k)).collect::<Vec<_>>());
    let omega = mask(&family, h)?;
    let fam = CutoffFamily::new(omega.clone(), deltas)?;
    let n = family.dim() as u32;
    for s in m.s_or(&[0.25, 0.4]) {
        let p = FracParams::new(n, s)?;
        let rep = cutoff_rayleigh(&fam, p)?;
        let lam = smallest_eigenvalue(&assemble_regional(&omega, p)?)?.value;
        for row in &rep.rows {
            r.row(Row::new(format!("quotient_s{s}"), row.delta, row.quotient).bound(lam).pass(row.quotient >= lam - 1e-10));
        }
        let expected = 1.0 - 2.0 * s;
        let got = rep.slope.unwrap_or(f64::NAN);
        r.check(&format!("slope_s{s}"), (got - expected).abs() < tol, format!("fitted {got:.4} vs {expected:.4} +- {tol}"));
        r.check(
            &format!("variational_s{s}"),
            rep.rows.iter().all(|x| x.quotient >= lam - 1e-10),
            format!("quotients above lambda_min = {lam:.6}"),
        );
        let last = rep.rows.last().expect("nonempty ladder");
        let gap = (last.norm2 - rep.measure).abs() / rep.measure;
        r.check(&format!("norm_s{s}"), gap < 0.02, format!("||u||^2 within {gap:.4} of |Omega| at delta = {}", last.delta));
    }
    let control = m.param("control_s", 0.75);
    let rep = cutoff_rayleigh(&fam, FracParams::new(n, control)?)?;
    for row in &rep.rows {
        r.row(Row::new(format!("control_s{control}"), row.delta, row.quotient));
    }
    r.check(
        "control",
        rep.rows.windows(2).all(|w| w[1].quotient > w[0].quotient),
        format!("s = {control}: quotients grow as delta shrinks"),
    );
    Ok(())
}

fn window_rows(r: &mut SuiteReport, label: &str, rep: &WindowReport) {
    for w in &rep.rows {
        r.row(Row::new(format!("{label}_quotient"), w.lambda, w.quotient).bound(w.bound).pass(w.pass()));
        r.row(Row::new(format!("{label}_exterior"), w.lambda, w.exterior));
    }
    r.check(
        &format!("{label}_decreasing"),
        rep.rows.len() >= 2 && rep.strictly_decreasing() && rep.skipped.is_empty(),
        format!("{} windows, skipped {:?}", rep.rows.len(), rep.skipped),
    );
    r.check(
        &format!("{label}_bounds"),
        rep.rows.iter().all(|w| w.pass()),
        "quotient <= interior + 2 c(n,s) distance_average and ||u_k||^2 >= |Omega_k| / 2".into(),
    );
}

/// Window averages of dist^(-2s) and window Rayleigh quotients on annuli and
/// on perpendicular strips.
pub fn annuli_windows(m: &ExperimentManifest, r: &mut SuiteReport) -> Result<()> {
    let tol = m.tol("slope", 0.15);
    let s = m.s_or(&[0.25])[0];
    let lambdas = or_default(&m.ladders.lambda, &[8.0, 16.0, 32.0, 64.0]);
    let lmax = lambdas.iter().cloned().fold(0.0, f64::max);
    let k_for = |l: f64| (l / 2.0).ceil() as u32 + 2;
    let coarse = mask(&DomainFamily::AnnuliUnion { k_max: k_for(lmax) }, m.param("h_average", 0.25))?;
    let mut avgs = Vec::new();
    for &l in &lambdas {
        let a = distance_average(&coarse, Window::Ball, l, s)?;
        r.row(Row::new("distance_average", l, a.value).pass(!a.accuracy_warning));
        avgs.push(a.value);
    }
    let got = slope(&lambdas, &avgs).unwrap_or(f64::NAN);
    r.check("distance_slope", (got + 2.0 * s).abs() < tol, format!("fitted {got:.4} vs {:.4} +- {tol}", -2.0 * s));

    let p = FracParams::new(2, s)?;
    let wmax = m.param("window_lambda_max", 32.0);
    let ws: Vec<f64> = lambdas.iter().cloned().filter(|&l| l <= wmax).collect();
    let h = m.param("h_window", 1.0 / 16.0);
    let delta = m.param("delta_window", 0.25);
    let annuli = mask(&DomainFamily::AnnuliUnion { k_max: k_for(wmax) }, h)?;
    let fam = WindowFamily::new(annuli, Window::Ball, ws.clone(), vec![delta; ws.len()])?;
    window_rows(r, "annuli", &window_rayleigh(&fam, p)?);

    let plus_l: Vec<f64> = ws.iter().map(|l| l / 2.0).collect();
    let arm = plus_l.last().copied().unwrap_or(16.0) + 2.0;
    let plus = mask(
        &DomainFamily::StripCross {
            shape: CrossShape::Plus,
            arm,
        },
        m.param("h_plus", 0.125),
    )?;
    let fam = WindowFamily::new(plus, Window::Square, plus_l.clone(), vec![m.param("delta_plus", 0.5); plus_l.len()])?;
    window_rows(r, "plus", &window_rayleigh(&fam, p)?);
    Ok(())
}
