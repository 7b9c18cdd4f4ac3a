use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::{smallest_eigenpair, SolverOptions};
use super::EigenEstimate;
use crate::domain::{rasterize, DomainFamily};
use crate::error::{Error, Result};
use crate::seminorm::{assemble_regional, restricted_form, FormKind};
use crate::specfun::FracParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub h: f64,
    #[serde(rename = "L")]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPlan {
    pub rungs: Vec<Rung>,
}

impl StudyPlan {
    /// h0, h0/2, ... (count rungs).
    pub fn h_ladder(h0: f64, count: usize, length: Option<f64>) -> Self {
        StudyPlan {
            rungs: (0..count)
                .map(|k| Rung {
                    h: h0 / 2f64.powi(k as i32),
                    length,
                })
                .collect(),
        }
    }

    /// Fixed h over increasing truncation lengths.
    pub fn length_ladder(h: f64, lengths: &[f64]) -> Self {
        StudyPlan {
            rungs: lengths.iter().map(|&l| Rung { h, length: Some(l) }).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rungs.is_empty() {
            return Err(Error::Config("empty study plan".into()));
        }
        if self.rungs.iter().any(|r| !(r.h > 0.0) || r.length.is_some_and(|l| !(l > 0.0))) {
            return Err(Error::Config("study plan needs positive h and L".into()));
        }
        Ok(())
    }

    /// Refinement parameter of each rung (h, or 1/L on a length ladder)
    /// when the ladder is geometric with a common ratio.
    fn parameter(&self) -> Option<(Vec<f64>, f64)> {
        let r = &self.rungs;
        if r.len() < 2 {
            return None;
        }
        let same_h = r.windows(2).all(|w| w[0].h == w[1].h);
        let same_l = r.windows(2).all(|w| w[0].length == w[1].length);
        let xs: Vec<f64> = if same_l && !same_h {
            r.iter().map(|q| q.h).collect()
        } else if same_h && !same_l && r.iter().all(|q| q.length.is_some()) {
            r.iter().map(|q| 1.0 / q.length.unwrap_or(1.0)).collect()
        } else {
            return None;
        };
        let ratio = xs[0] / xs[1];
        let geometric = ratio > 1.0 && xs.windows(2).all(|w| ((w[0] / w[1]) - ratio).abs() < 1e-9 * ratio);
        geometric.then_some((xs, ratio))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Verdict {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    /// Convergence rate used.
    pub rate: f64,
    /// Rate fitted from the last three values, if defined.
    pub fitted_rate: Option<f64>,
    /// The fitted rate replaced the assumed one.
    pub flagged: bool,
}

/// Richardson extrapolation from the last three values of a geometric ladder
/// with parameter ratio `ratio`, assuming `assumed_rate` unless the fitted
/// rate differs from it by more than 30%.
pub fn richardson(values: &[f64], ratio: f64, assumed_rate: f64) -> Option<Extrapolation> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let fitted = if n >= 3 {
        let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
        let q = (a - b) / (b - c);
        (q.is_finite() && q > 0.0).then(|| q.ln() / ratio.ln())
    } else {
        None
    };
    let (rate, flagged) = match fitted {
        Some(p) if p > 0.0 && (p - assumed_rate).abs() > 0.3 * assumed_rate => (p, true),
        _ => (assumed_rate, false),
    };
    let (b, c) = (values[n - 2], values[n - 1]);
    Some(Extrapolation {
        value: c + (c - b) / (ratio.powf(rate) - 1.0),
        rate,
        fitted_rate: fitted,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub family: String,
    pub params: FracParams,
    pub kind: FormKind,
    pub ladder: Vec<EigenEstimate>,
    pub extrapolated: Option<f64>,
    /// Convergence rate of the extrapolation.
    pub slope: Option<f64>,
    pub rate_flagged: bool,
    /// Least-squares slope of log(value) against log(parameter).
    pub loglog_slope: Option<f64>,
    pub partial: bool,
    pub verdicts: Vec<Verdict>,
}

impl RefinementStudy {
    pub fn to_json(&self) -> String {
        crate::json::to_json(self)
    }

    pub fn values(&self) -> Vec<f64> {
        self.ladder.iter().map(|e| e.value).collect()
    }

    pub fn last(&self) -> Option<&EigenEstimate> {
        self.ladder.last()
    }
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn solve_rung(family: &DomainFamily, p: FracParams, kind: FormKind, rung: Rung) -> Result<EigenEstimate> {
    let fam = match rung.length {
        Some(l) => family.with_truncation(l)?,
        None => family.clone(),
    };
    let mask = rasterize(&fam, rung.h)?;
    let form = match kind {
        FormKind::Regional => assemble_regional(&mask, p)?,
        FormKind::Restricted => restricted_form(&mask, p)?,
    };
    let est = match smallest_eigenpair(&form, &SolverOptions::default()) {
        Ok(pair) => EigenEstimate {
            h: rung.h,
            length: rung.length,
            value: pair.value,
            residual: pair.residual,
            iterations: pair.iterations,
            accepted: pair.accepted && pair.value >= 0.0,
        },
        Err(Error::Iteration {
            iterations,
            value,
            residual,
        }) => EigenEstimate {
            h: rung.h,
            length: rung.length,
            value,
            residual,
            iterations,
            accepted: false,
        },
        Err(e) => return Err(e),
    };
    Ok(est)
}

/// Eigenvalue study over the plan's ladder; rungs are solved concurrently.
pub fn estimate(family: &DomainFamily, p: FracParams, plan: &StudyPlan, kind: FormKind) -> Result<RefinementStudy> {
    plan.validate()?;
    family.validate()?;
    if family.dim() != p.n() as usize {
        return Err(Error::Config("family and parameter dimensions differ".into()));
    }
    let results: Vec<Result<EigenEstimate>> = plan.rungs.par_iter().map(|&r| solve_rung(family, p, kind, r)).collect();
    let mut ladder = Vec::new();
    let mut partial = false;
    for r in results {
        match r {
            Ok(e) => ladder.push(e),
            Err(Error::Budget { needed, budget }) => {
                log::warn!("study stopped: {needed} exceeds budget {budget}");
                partial = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if ladder.is_empty() {
        return Err(Error::Budget {
            needed: 0,
            budget: crate::cell_budget(),
        });
    }
    let values: Vec<f64> = ladder.iter().map(|e| e.value).collect();
    let param = if partial { None } else { plan.parameter() };
    let ext = param.as_ref().and_then(|(_, ratio)| richardson(&values, *ratio, 1.0));
    let lls = param.as_ref().and_then(|(xs, _)| loglog_slope(xs, &values));
    let mut verdicts = Vec::new();
    let all_ok = ladder.iter().all(|e| e.accepted);
    verdicts.push(Verdict::new(
        "residuals",
        all_ok,
        format!("max residual {:e}", ladder.iter().map(|e| e.residual).fold(0.0, f64::max)),
    ));
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = diffs.iter().all(|&d| d <= 0.0) || diffs.iter().all(|&d| d >= 0.0);
    let cauchy = diffs.windows(2).all(|w| w[1].abs() <= w[0].abs());
    verdicts.push(Verdict::new(
        "monotone_or_cauchy",
        monotone || cauchy,
        format!("monotone {monotone}, contracting differences {cauchy}"),
    ));
    Ok(RefinementStudy {
        family: family.name().to_string(),
        params: p,
        kind,
        ladder,
        extrapolated: ext.map(|e| e.value),
        slope: ext.map(|e| e.rate),
        rate_flagged: ext.is_some_and(|e| e.flagged),
        loglog_slope: lls,
        partial,
        verdicts,
    })
}

/// Regional (P1) study.
pub fn estimate_p1(family: &DomainFamily, p: FracParams, plan: &StudyPlan) -> Result<RefinementStudy> {
    estimate(family, p, plan, FormKind::Regional)
}

/// Full-space (P2) study.
pub fn estimate_p2(family: &DomainFamily, p: FracParams, plan: &StudyPlan) -> Result<RefinementStudy> {
    estimate(family, p, plan, FormKind::Restricted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_first_order() {
        // v(h) = 2 + 3h
        let v = [2.0 + 3.0 / 8.0, 2.0 + 3.0 / 16.0, 2.0 + 3.0 / 32.0];
        let e = richardson(&v, 2.0, 1.0).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
        assert!(!e.flagged);
        // v(h) = 1 + h^2 is flagged and uses the fitted rate
        let v = [1.0 + 1.0 / 64.0, 1.0 + 1.0 / 256.0, 1.0 + 1.0 / 1024.0];
        let e = richardson(&v, 2.0, 1.0).unwrap();
        assert!(e.flagged);
        assert!((e.rate - 2.0).abs() < 1e-9);
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_study_decreases_and_is_bounded() {
        let p = FracParams::new(1, 0.75).unwrap();
        let plan = StudyPlan::h_ladder(1.0 / 64.0, 3, None);
        let st = estimate_p1(&DomainFamily::interval(0.0, 1.0), p, &plan).unwrap();
        let v = st.values();
        assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
        assert!(st.verdicts.iter().all(|v| v.pass));
        assert!(st.extrapolated.unwrap() < v[2]);
        let json = st.to_json();
        assert!(json.contains("\"ladder\"") && json.contains("\"L\""));
    }

    #[test]
    fn p2_is_domain_monotone_and_above_p1() {
        let p = FracParams::new(1, 0.5).unwrap();
        let h = 1.0 / 64.0;
        let plan = StudyPlan::h_ladder(h, 1, None);
        let small = estimate_p2(&DomainFamily::interval(0.0, 1.0), p, &plan).unwrap();
        let big = estimate_p2(&DomainFamily::interval(0.0, 2.0), p, &plan).unwrap();
        let reg = estimate_p1(&DomainFamily::interval(0.0, 1.0), p, &plan).unwrap();
        assert!(big.values()[0] <= small.values()[0]);
        assert!(small.values()[0] >= reg.values()[0]);
    }

    #[test]
    fn plan_rejects_nonpositive_h() {
        let plan = StudyPlan {
            rungs: vec![Rung { h: 0.0, length: None }],
        };
        assert!(plan.validate().is_err());
    }
}
