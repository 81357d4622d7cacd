use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{Check, Provenance, Relation};
use crate::error::{GeomError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Seventeen significant digits, enough to round-trip any f64.
fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn raw(v: f64) -> Box<RawValue> {
    let text = if v.is_finite() { fmt_f64(v) } else { format!("\"{v}\"") };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
struct JsonCheck<'a> {
    suite: &'a str,
    name: &'a str,
    value: Box<RawValue>,
    relation: &'static str,
    lower: Option<Box<RawValue>>,
    upper: Option<Box<RawValue>>,
    pass: bool,
    provenance: &'static str,
    anchor: &'a str,
}

fn non_empty(checks: &[Check]) -> Result<()> {
    if checks.is_empty() {
        return Err(GeomError::InvalidInput("empty report set".into()));
    }
    Ok(())
}

fn io_err(e: impl std::fmt::Display) -> GeomError {
    GeomError::Numerical(format!("io: {e}"))
}

pub fn write_json(checks: &[Check], mut w: impl Write) -> Result<()> {
    non_empty(checks)?;
    let rows: Vec<JsonCheck> = checks
        .iter()
        .map(|c| {
            let (lo, hi) = c.relation.limits();
            JsonCheck {
                suite: &c.suite,
                name: &c.name,
                value: raw(c.value),
                relation: c.relation.symbol(),
                lower: lo.map(raw),
                upper: hi.map(raw),
                pass: c.pass,
                provenance: c.provenance.as_str(),
                anchor: &c.anchor,
            }
        })
        .collect();
    serde_json::to_writer_pretty(&mut w, &rows).map_err(io_err)?;
    writeln!(w).map_err(io_err)
}

pub fn write_csv(checks: &[Check], w: impl Write) -> Result<()> {
    non_empty(checks)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["suite", "name", "value", "relation", "lower", "upper", "pass", "provenance", "anchor"])
        .map_err(io_err)?;
    for c in checks {
        let (lo, hi) = c.relation.limits();
        out.write_record([
            c.suite.as_str(),
            &c.name,
            &fmt_f64(c.value),
            c.relation.symbol(),
            &lo.map(fmt_f64).unwrap_or_default(),
            &hi.map(fmt_f64).unwrap_or_default(),
            if c.pass { "true" } else { "false" },
            c.provenance.as_str(),
            &c.anchor,
        ])
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[derive(Deserialize)]
struct StoredCheck {
    suite: String,
    name: String,
    value: serde_json::Value,
    relation: String,
    lower: Option<serde_json::Value>,
    upper: Option<serde_json::Value>,
    pass: bool,
    provenance: Provenance,
    anchor: String,
}

fn num(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| bad(format!("{n}"))),
        serde_json::Value::String(s) => s.parse().map_err(|_| bad(s.clone())),
        other => Err(bad(other.to_string())),
    }
}

fn bad(what: String) -> GeomError {
    GeomError::InvalidInput(format!("malformed report value {what}"))
}

/// Parses a report previously written by [`write_json`].
pub fn read_json(text: &str) -> Result<Vec<Check>> {
    let rows: Vec<StoredCheck> = serde_json::from_str(text).map_err(|e| GeomError::InvalidInput(format!("report: {e}")))?;
    let limit = |v: &Option<serde_json::Value>| v.as_ref().map(num).transpose();
    rows.into_iter()
        .map(|r| {
            let (lo, hi) = (limit(&r.lower)?, limit(&r.upper)?);
            let relation = match (r.relation.as_str(), lo, hi) {
                ("<", None, Some(t)) => Relation::Below(t),
                (">", Some(t), None) => Relation::Above(t),
                ("==", Some(t), Some(_)) => Relation::Equals(t),
                ("in", Some(a), Some(b)) => Relation::Within(a, b),
                (sym, ..) => return Err(bad(format!("relation {sym:?}"))),
            };
            Ok(Check {
                suite: r.suite,
                name: r.name,
                value: num(&r.value)?,
                relation,
                pass: r.pass,
                provenance: r.provenance,
                anchor: r.anchor,
            })
        })
        .collect()
}

impl ReportFormat {
    pub fn write(&self, checks: &[Check], w: impl Write) -> Result<()> {
        match self {
            ReportFormat::Json => write_json(checks, w),
            ReportFormat::Csv => write_csv(checks, w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(pass: bool) -> Check {
        Check {
            suite: "s".into(),
            name: "n".into(),
            value: 0.1,
            relation: Relation::Below(if pass { 1.0 } else { 0.01 }),
            pass,
            provenance: Provenance::Trivial,
            anchor: "a".into(),
        }
    }

    #[test]
    fn json_single_check() {
        let mut buf = Vec::new();
        write_json(&[one(true)], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 1);
        assert_eq!(v[0]["pass"], true);
        assert_eq!(v[0]["provenance"], "trivial");
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
    }

    #[test]
    fn csv_rows_and_empty_set() {
        let mut buf = Vec::new();
        write_csv(&[one(true), one(false)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().contains(",false,"));
        assert!(write_csv(&[], Vec::new()).is_err());
        assert!(write_json(&[], Vec::new()).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let mut checks = vec![one(true), one(false)];
        checks[1].relation = Relation::Within(-1.5, f64::INFINITY);
        checks[1].value = 1.0 / 3.0;
        checks[0].relation = Relation::Below(1e-6);
        let mut buf = Vec::new();
        write_json(&checks, &mut buf).unwrap();
        assert_eq!(read_json(std::str::from_utf8(&buf).unwrap()).unwrap(), checks);
        assert!(read_json("[{}]").is_err());
        let mut again = Vec::new();
        write_json(&read_json(std::str::from_utf8(&buf).unwrap()).unwrap(), &mut again).unwrap();
        assert_eq!(again, buf);
    }
}
