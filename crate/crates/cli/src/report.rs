//! Report payloads and their JSON/CSV renderings. Field order is declaration
//! order, so output is byte-stable for a fixed config.

use rising_spectrum::{ResidualReport, TowerEntry};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::format::{f64_17, fmt_g, opt_f64_17};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

/// Whether `relative` must stay below (`max`) or reach (`min`) the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultEntry {
    pub name: String,
    #[serde(serialize_with = "f64_17")]
    pub absolute: f64,
    #[serde(serialize_with = "f64_17")]
    pub relative: f64,
    #[serde(serialize_with = "f64_17")]
    pub tolerance: f64,
    pub bound: Bound,
    pub verdict: Verdict,
}

impl ResultEntry {
    pub fn asserted(name: impl Into<String>, rep: &ResidualReport) -> Self {
        Self::upper(name, rep.absolute, rep.relative, rep.tolerance)
    }

    pub fn upper(name: impl Into<String>, absolute: f64, relative: f64, tolerance: f64) -> Self {
        let ok = relative <= tolerance;
        Self {
            name: name.into(),
            absolute,
            relative,
            tolerance,
            bound: Bound::Max,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    /// Passes when `relative ≥ tolerance`; used for negative controls.
    pub fn lower(name: impl Into<String>, absolute: f64, relative: f64, tolerance: f64) -> Self {
        let ok = relative >= tolerance;
        Self {
            name: name.into(),
            absolute,
            relative,
            tolerance,
            bound: Bound::Min,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    /// Integer-valued checks such as ranks and multiplicities.
    pub fn exact(name: impl Into<String>, got: usize, expected: usize) -> Self {
        let d = got.abs_diff(expected) as f64;
        Self::upper(name, d, d, 0.0)
    }

    pub fn informational(mut self) -> Self {
        self.verdict = Verdict::Informational;
        self
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TowerRow {
    #[serde(serialize_with = "f64_17")]
    pub s: f64,
    #[serde(serialize_with = "f64_17")]
    pub mass_squared: f64,
    #[serde(serialize_with = "f64_17")]
    pub mass: f64,
    pub multiplicity: usize,
    pub edge_truncated: bool,
    /// `4m² + 4s(s+1)/r0²`.
    #[serde(serialize_with = "f64_17")]
    pub predicted: f64,
}

impl TowerRow {
    pub fn new(e: &TowerEntry, predicted: f64) -> Self {
        Self {
            s: e.s.value(),
            mass_squared: e.m_squared,
            mass: e.mass(),
            multiplicity: e.multiplicity,
            edge_truncated: e.edge_truncated,
            predicted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub asserted: usize,
    pub passed: usize,
    pub failed: usize,
    pub informational: usize,
    pub verdict: Verdict,
}

impl Summary {
    pub fn of(results: &[ResultEntry]) -> Self {
        let count = |v| results.iter().filter(|r| r.verdict == v).count();
        let passed = count(Verdict::Pass);
        let failed = count(Verdict::Fail);
        Self {
            asserted: passed + failed,
            passed,
            failed,
            informational: count(Verdict::Informational),
            verdict: if failed == 0 { Verdict::Pass } else { Verdict::Fail },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tower: Option<Vec<TowerRow>>,
    pub results: Vec<ResultEntry>,
    pub summary: Summary,
    /// Only filled with `timing = true`, which makes the report time-dependent.
    #[serde(serialize_with = "opt_f64_17")]
    pub wall_clock_s: Option<f64>,
}

impl Report {
    pub fn new(config: RunConfig, tower: Option<Vec<TowerRow>>, results: Vec<ResultEntry>) -> Self {
        let summary = Summary::of(&results);
        Self {
            schema: SCHEMA,
            config,
            tower,
            results,
            summary,
            wall_clock_s: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// Just enough of a stored report to rerun it.
#[derive(Debug, Deserialize)]
pub struct StoredReport {
    pub schema: u32,
    pub config: RunConfig,
}

pub const CSV_HEADER: &str = "s,mass_squared,mass,multiplicity,edge_truncated";

pub fn tower_csv(rows: &[TowerRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_g(r.s, 6),
            fmt_g(r.mass_squared, 6),
            fmt_g(r.mass, 6),
            r.multiplicity,
            r.edge_truncated
        ));
    }
    out
}
