//! Named check suites with deterministic seeding and stable report output.

mod report;
mod suites;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

pub use report::{read_json, write_csv, write_json, ReportFormat};

pub const SUITES: [&str; 8] = ["curvlab", "dbar", "gaugelab", "jspace", "projgeo", "sigma", "spencer", "spinor"];

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Paper,
    Trivial,
    DerivedOracle,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Paper => "paper",
            Provenance::Trivial => "trivial",
            Provenance::DerivedOracle => "derived-oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Relation {
    /// `value < bound`
    Below(f64),
    /// `value > bound`
    Above(f64),
    /// `value == target` exactly
    Equals(f64),
    /// `lo ≤ value ≤ hi`
    Within(f64, f64),
}

impl Relation {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Relation::Below(t) => v < t,
            Relation::Above(t) => v > t,
            Relation::Equals(t) => v == t,
            Relation::Within(lo, hi) => lo <= v && v <= hi,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Below(_) => "<",
            Relation::Above(_) => ">",
            Relation::Equals(_) => "==",
            Relation::Within(..) => "in",
        }
    }

    /// `(lower, upper)` limits, either possibly absent.
    pub fn limits(&self) -> (Option<f64>, Option<f64>) {
        match *self {
            Relation::Below(t) => (None, Some(t)),
            Relation::Above(t) => (Some(t), None),
            Relation::Equals(t) => (Some(t), Some(t)),
            Relation::Within(lo, hi) => (Some(lo), Some(hi)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub pass: bool,
    pub provenance: Provenance,
    /// Short concept tag of the statement being checked.
    pub anchor: String,
}

/// Knobs shared by every suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Multiplies every upper tolerance.
    pub tol_scale: f64,
    /// Replacement upper tolerances keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 1, tol_scale: 1.0, tolerances: BTreeMap::new() }
    }
}

impl SuiteOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return Err(GeomError::InvalidInput(format!("tol_scale {} must be positive", self.tol_scale)));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(GeomError::InvalidInput(format!("tolerance for {k} is {v}")));
        }
        Ok(())
    }
}

/// Collects checks for one suite, applying tolerance overrides.
pub(crate) struct Recorder<'a> {
    suite: &'static str,
    opts: &'a SuiteOptions,
    checks: Vec<Check>,
}

impl<'a> Recorder<'a> {
    fn new(suite: &'static str, opts: &'a SuiteOptions) -> Self {
        Recorder { suite, opts, checks: Vec::new() }
    }

    pub(crate) fn seed(&self) -> u64 {
        self.opts.seed
    }

    pub(crate) fn record(&mut self, name: &str, value: f64, relation: Relation, provenance: Provenance, anchor: &str) {
        let relation = match relation {
            Relation::Below(t) => Relation::Below(self.opts.tolerances.get(name).copied().unwrap_or(t) * self.opts.tol_scale),
            other => other,
        };
        self.checks.push(Check {
            suite: self.suite.to_string(),
            name: name.to_string(),
            value,
            pass: relation.holds(value),
            relation,
            provenance,
            anchor: anchor.to_string(),
        });
    }

    pub(crate) fn below(&mut self, name: &str, value: f64, tol: f64, p: Provenance, anchor: &str) {
        self.record(name, value, Relation::Below(tol), p, anchor);
    }

    pub(crate) fn above(&mut self, name: &str, value: f64, bound: f64, p: Provenance, anchor: &str) {
        self.record(name, value, Relation::Above(bound), p, anchor);
    }

    pub(crate) fn equals(&mut self, name: &str, value: f64, target: f64, p: Provenance, anchor: &str) {
        self.record(name, value, Relation::Equals(target), p, anchor);
    }

    pub(crate) fn within(&mut self, name: &str, value: f64, lo: f64, hi: f64, p: Provenance, anchor: &str) {
        self.record(name, value, Relation::Within(lo, hi), p, anchor);
    }

    pub(crate) fn flag(&mut self, name: &str, ok: bool, p: Provenance, anchor: &str) {
        self.record(name, if ok { 1.0 } else { 0.0 }, Relation::Equals(1.0), p, anchor);
    }

    fn finish(mut self) -> Vec<Check> {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self.checks
    }
}

/// Runs one suite, or every suite for `"all"`; checks come back sorted by
/// suite and name.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<Check>> {
    opts.validate()?;
    if name == "all" {
        let mut out = Vec::new();
        for s in SUITES {
            out.extend(run_suite(s, opts)?);
        }
        return Ok(out);
    }
    let suite = SUITES
        .iter()
        .find(|s| **s == name)
        .ok_or_else(|| GeomError::InvalidInput(format!("unknown suite {name:?}")))?;
    let mut rec = Recorder::new(suite, opts);
    match name {
        "spencer" => suites::spencer(&mut rec)?,
        "dbar" => suites::dbar(&mut rec)?,
        "projgeo" => suites::projgeo(&mut rec)?,
        "sigma" => suites::sigma(&mut rec)?,
        "jspace" => suites::jspace(&mut rec)?,
        "spinor" => suites::spinor(&mut rec)?,
        "curvlab" => suites::curvlab(&mut rec)?,
        "gaugelab" => suites::gaugelab(&mut rec)?,
        _ => unreachable!("suite list and dispatch disagree"),
    }
    Ok(rec.finish())
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
