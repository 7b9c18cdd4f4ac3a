use std::fmt::Write as _;
use std::path::Path;

use fracpoin::eigen::Verdict;
use fracpoin::json::{fmt_f64, to_json};
use fracpoin::Result;
use serde::{Deserialize, Serialize};

/// One measured quantity with its optional reference and bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub param: f64,
    pub value: f64,
    pub reference: Option<f64>,
    pub bound: Option<f64>,
    pub pass: bool,
}

impl Row {
    pub fn new(label: impl Into<String>, param: f64, value: f64) -> Self {
        Row {
            label: label.into(),
            param,
            value,
            reference: None,
            bound: None,
            pass: true,
        }
    }

    pub fn reference(mut self, r: f64) -> Self {
        self.reference = Some(r);
        self
    }

    pub fn bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn pass(mut self, p: bool) -> Self {
        self.pass = p;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Verdict>,
    pub rows: Vec<Row>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            seed,
            pass: true,
            checks: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.pass &= pass;
        self.checks.push(Verdict::new(name, pass, detail));
    }

    pub fn row(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn failing(&self) -> Vec<&Verdict> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,param,value,reference,bound,pass\n");
        for r in &self.rows {
            let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{},{}", r.label, fmt_f64(r.param), fmt_f64(r.value), opt(r.reference), opt(r.bound), r.pass);
        }
        out
    }

    pub fn write(&self, json: Option<&Path>, csv: Option<&Path>) -> Result<()> {
        for (path, text) in [(json, self.to_json()), (csv, self.to_csv())] {
            if let Some(p) = path {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(p, text)?;
            }
        }
        Ok(())
    }
}
