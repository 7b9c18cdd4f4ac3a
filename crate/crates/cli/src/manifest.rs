use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fracpoin::{DomainFamily, Error, Result};
use serde::{Deserialize, Serialize};

use crate::suites::SUITES;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladders {
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default, rename = "L")]
    pub length: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    #[serde(default)]
    pub ell: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    /// Dilation factors.
    #[serde(default)]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// A verification run: suite name, parameters, ladders, tolerances, outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub suite: String,
    #[serde(default)]
    pub family: Option<DomainFamily>,
    /// Fractional orders; each suite has its own default.
    #[serde(default)]
    pub s: Vec<f64>,
    #[serde(default)]
    pub ladders: Ladders,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Suite-specific scalars (trial counts, widths, direction counts).
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn check_ladder(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Config(format!("ladder {name} must be positive and finite")));
    }
    let up = xs.windows(2).all(|w| w[1] > w[0]);
    let down = xs.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::Config(format!("ladder {name} must be strictly monotone")));
    }
    Ok(())
}

impl ExperimentManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: ExperimentManifest = serde_json::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        ExperimentManifest::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(Error::Config(format!("unknown suite {:?}; registered: {}", self.suite, SUITES.join(", "))));
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Config(format!("tolerance {k} must be positive")));
            }
        }
        if let Some((k, _)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("parameter {k} must be finite")));
        }
        if let Some(s) = self.s.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
            return Err(Error::Config(format!("s = {s} outside (0, 1)")));
        }
        let l = &self.ladders;
        check_ladder("h", &l.h)?;
        check_ladder("L", &l.length)?;
        check_ladder("delta", &l.delta)?;
        check_ladder("ell", &l.ell)?;
        check_ladder("lambda", &l.lambda)?;
        check_ladder("t", &l.t)?;
        if let Some(f) = &self.family {
            f.validate().map_err(|e| Error::Config(format!("family: {e}")))?;
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(fracpoin::DEFAULT_SEED)
    }

    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    pub fn count(&self, name: &str, default: usize) -> Result<usize> {
        let v = self.param(name, default as f64);
        if v < 0.0 || v.fract() != 0.0 || v > 1e9 {
            return Err(Error::Config(format!("parameter {name} must be a nonnegative integer")));
        }
        Ok(v as usize)
    }

    pub fn s_or(&self, default: &[f64]) -> Vec<f64> {
        if self.s.is_empty() {
            default.to_vec()
        } else {
            self.s.clone()
        }
    }
}

/// `xs` if nonempty, otherwise the default.
pub fn or_default(xs: &[f64], default: &[f64]) -> Vec<f64> {
    if xs.is_empty() {
        default.to_vec()
    } else {
        xs.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_manifest() {
        let m = ExperimentManifest::parse(r#"{"suite": "picone"}"#).unwrap();
        assert_eq!(m.seed(), 0x5eed);
        assert_eq!(m.tol("x", 0.5), 0.5);
    }

    #[test]
    fn rejects_bad_manifests() {
        for text in [
            r#"{"suite": "nope"}"#,
            r#"{"suite": "picone", "tolerances": {"rel": -1}}"#,
            r#"{"suite": "picone", "ladders": {"h": [0.1, 0.2, 0.15]}}"#,
            r#"{"suite": "picone", "s": [1.0]}"#,
            r#"{"suite": "picone", "bogus": 1}"#,
            r#"{"suite": "picone", "family": {"kind": "ball", "center": [0, 0], "radius": -1}}"#,
            "not json",
        ] {
            assert!(matches!(ExperimentManifest::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
