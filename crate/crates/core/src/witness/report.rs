use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// One witness evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub family: String,
    pub param: f64,
    pub quotient: f64,
    pub terms: BTreeMap<String, f64>,
    pub bound: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub rows: Vec<WitnessRow>,
}

impl WitnessReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        crate::json::to_json(&self.rows)
    }

    /// CSV mirror of the JSON rows; terms are written as `name=value` pairs
    /// separated by semicolons.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,param,quotient,terms,bound,pass\n");
        for r in &self.rows {
            let terms: Vec<String> = r.terms.iter().map(|(k, v)| format!("{k}={v:.16e}")).collect();
            let bound = r.bound.map(|b| format!("{b:.16e}")).unwrap_or_default();
            let _ = writeln!(out, "{},{:.16e},{:.16e},{},{},{}", r.family, r.param, r.quotient, terms.join(";"), bound, r.pass);
        }
        out
    }
}
