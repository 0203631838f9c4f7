use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::asymptotics::{FitResult, Regime};
use crate::error::{Error, Result};

use super::config::ExperimentKind;

/// A pass rule: `value` must lie in the closed interval [min, max] (absent ends are open).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    #[serde(deserialize_with = "null_as_nan")]
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub pass: bool,
}

// JSON has no NaN or infinity; serde_json writes them as null.
fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn map_null_as_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<String, f64>, D::Error> {
    let raw = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(raw.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
}

impl Flag {
    pub fn within(value: f64, min: Option<f64>, max: Option<f64>) -> Self {
        let mut f = Flag { value, min, max, pass: false };
        f.pass = f.recheck();
        f
    }

    pub fn at_most(value: f64, max: f64) -> Self {
        Self::within(value, None, Some(max))
    }

    pub fn at_least(value: f64, min: f64) -> Self {
        Self::within(value, Some(min), None)
    }

    /// Relative deviation |value/target − 1| ≤ tol, stored as the deviation.
    pub fn relative(value: f64, target: f64, tol: f64) -> Self {
        Self::at_most((value / target - 1.0).abs(), tol)
    }

    /// A boolean outcome stored as 1 (true) or 0 (false).
    pub fn holds(ok: bool) -> Self {
        Self::at_least(if ok { 1.0 } else { 0.0 }, 1.0)
    }

    /// Recompute the outcome from the stored numbers.
    pub fn recheck(&self) -> bool {
        self.value.is_finite()
            && self.min.map_or(true, |lo| self.value >= lo)
            && self.max.map_or(true, |hi| self.value <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TheorySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
}

/// Outcome of one experiment. Tables are written next to the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config_hash: String,
    pub experiment: ExperimentKind,
    pub theory: TheorySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    #[serde(deserialize_with = "map_null_as_nan")]
    pub ratios: BTreeMap<String, f64>,
    #[serde(deserialize_with = "map_null_as_nan")]
    pub diagnostics: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, Flag>,
    /// File name → CSV contents.
    #[serde(skip)]
    pub tables: BTreeMap<String, String>,
}

impl Report {
    pub fn new(config_hash: String, experiment: ExperimentKind) -> Self {
        Report {
            config_hash,
            experiment,
            theory: TheorySection::default(),
            fit: None,
            ratios: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            flags: BTreeMap::new(),
            tables: BTreeMap::new(),
        }
    }

    pub fn ratio(&mut self, key: &str, value: f64) {
        self.ratios.insert(key.into(), value);
    }

    pub fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }

    pub fn flag(&mut self, key: &str, flag: Flag) {
        self.flags.insert(key.into(), flag);
    }

    pub fn table(&mut self, name: &str, csv: String) {
        self.tables.insert(name.into(), csv);
    }

    pub fn passed(&self) -> bool {
        self.flags.values().all(|f| f.pass)
    }

    pub fn failed_flags(&self) -> Vec<&str> {
        self.flags.iter().filter(|(_, f)| !f.pass).map(|(k, _)| k.as_str()).collect()
    }

    /// Whether every stored outcome agrees with its recomputation.
    pub fn flags_consistent(&self) -> bool {
        self.flags.values().all(|f| f.pass == f.recheck())
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Exit status for a run: 0 pass, 1 failed flag or runtime failure, 2 config error.
pub fn exit_code(outcome: &Result<Report>) -> i32 {
    match outcome {
        Ok(r) => r.exit_code(),
        Err(Error::Config(_)) => 2,
        Err(_) => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Write `summary.json` and/or the CSV tables into `dir`; returns the written paths.
pub fn emit_report(r: &Report, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: &str| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    if formats.contains(&Format::Json) {
        put("summary.json", &r.to_json()?)?;
    }
    if formats.contains(&Format::Csv) {
        for (name, body) in &r.tables {
            put(name, body)?;
        }
    }
    Ok(written)
}
