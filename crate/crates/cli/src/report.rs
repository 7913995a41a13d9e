use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::{Format, SuiteConfig, SuiteId};
use crate::error::{CliError, CliResult};

/// How a check turns numbers into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|value - reference| / |reference|` (absolute when the reference is 0).
    Relative,
    Absolute,
    /// `value` itself is a residual that must stay below the tolerance.
    Residual,
    /// `value - reference` must exceed the tolerance.
    Margin,
    /// `value >= reference` up to a relative tolerance.
    AtLeast,
    /// A boolean verdict recorded as 1 or 0, compared with the reference.
    Flag,
}

/// One verified number with its reference, tolerance and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: SuiteId,
    pub instance: String,
    pub check: String,
    pub comparison: Comparison,
    pub value: Option<f64>,
    pub reference: Option<f64>,
    pub deviation: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// Operation and settings that produced `value`.
    pub method: String,
    /// Where `reference` comes from.
    pub reference_source: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    pub fn new(suite: SuiteId, instance: impl Into<String>, check: impl Into<String>) -> CheckBuilder {
        CheckBuilder {
            suite,
            instance: instance.into(),
            check: check.into(),
            method: String::new(),
            reference_source: String::new(),
            details: BTreeMap::new(),
        }
    }
}

pub struct CheckBuilder {
    suite: SuiteId,
    instance: String,
    check: String,
    method: String,
    reference_source: String,
    details: BTreeMap<String, f64>,
}

impl CheckBuilder {
    pub fn method(mut self, m: impl Into<String>) -> Self {
        self.method = m.into();
        self
    }

    pub fn reference_source(mut self, s: impl Into<String>) -> Self {
        self.reference_source = s.into();
        self
    }

    pub fn detail(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }

    pub fn details(mut self, d: impl IntoIterator<Item = (String, f64)>) -> Self {
        self.details.extend(d);
        self
    }

    pub fn compare(self, comparison: Comparison, value: f64, reference: Option<f64>, tolerance: f64) -> CheckResult {
        let r = reference.unwrap_or(0.0);
        let (deviation, pass) = match comparison {
            Comparison::Relative => {
                let d = if r == 0.0 { value.abs() } else { (value - r).abs() / r.abs() };
                (d, d <= tolerance)
            }
            Comparison::Absolute | Comparison::Flag => {
                let d = (value - r).abs();
                (d, d <= tolerance)
            }
            Comparison::Residual => (value.abs(), value.abs() <= tolerance),
            Comparison::Margin => (value - r, value - r > tolerance),
            Comparison::AtLeast => {
                let slack = tolerance * r.abs().max(value.abs()).max(1.0);
                (value - r, value >= r - slack)
            }
        };
        let pass = pass && value.is_finite();
        CheckResult {
            suite: self.suite,
            instance: self.instance,
            check: self.check,
            comparison,
            value: Some(value),
            reference,
            deviation: Some(deviation),
            tolerance,
            pass,
            method: self.method,
            reference_source: self.reference_source,
            details: self.details,
            error: None,
        }
    }

    pub fn failed(self, comparison: Comparison, reference: Option<f64>, tolerance: f64, error: impl ToString) -> CheckResult {
        CheckResult {
            suite: self.suite,
            instance: self.instance,
            check: self.check,
            comparison,
            value: None,
            reference,
            deviation: None,
            tolerance,
            pass: false,
            method: self.method,
            reference_source: self.reference_source,
            details: self.details,
            error: Some(error.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: SuiteId,
    pub config: SuiteConfig,
    pub summary: Summary,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    /// Orders checks by suite, instance and name so the result does not depend on scheduling.
    pub fn assemble(suite: SuiteId, config: SuiteConfig, mut checks: Vec<CheckResult>) -> Self {
        checks.sort_by(|a, b| (a.suite, &a.instance, &a.check).cmp(&(b.suite, &b.instance, &b.check)));
        let passed = checks.iter().filter(|c| c.pass).count();
        VerificationReport {
            suite,
            config,
            summary: Summary {
                checks: checks.len(),
                passed,
                failed: checks.len() - passed,
            },
            checks,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record([
            "suite",
            "instance",
            "check",
            "value",
            "reference",
            "deviation",
            "tolerance",
            "pass",
            "method",
            "reference_source",
            "error",
        ])
        .map_err(io)?;
        for c in &self.checks {
            w.write_record([
                c.suite.as_str().to_string(),
                c.instance.clone(),
                c.check.clone(),
                opt(c.value),
                opt(c.reference),
                opt(c.deviation),
                format!("{:e}", c.tolerance),
                c.pass.to_string(),
                c.method.clone(),
                c.reference_source.clone(),
                c.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_table(&self) -> String {
        let rows: Vec<[String; 7]> = self
            .checks
            .iter()
            .map(|c| {
                [
                    c.suite.as_str().to_string(),
                    c.instance.clone(),
                    c.check.clone(),
                    c.value.map(short).unwrap_or_else(|| "-".into()),
                    c.reference.map(short).unwrap_or_else(|| "-".into()),
                    c.deviation.map(|d| format!("{d:.2e}")).unwrap_or_else(|| "-".into()),
                    if c.pass { "PASS".into() } else { "FAIL".into() },
                ]
            })
            .collect();
        let header = ["suite", "instance", "check", "value", "reference", "deviation", "verdict"].map(String::from);
        let mut widths = header.clone().map(|h| h.len());
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        for r in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = r.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        for c in self.checks.iter().filter(|c| c.error.is_some()) {
            let _ = writeln!(out, "error {} / {}: {}", c.instance, c.check, c.error.as_deref().unwrap_or(""));
        }
        let _ = writeln!(out, "{}", self.summary_line());
        out
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} checks, {} passed, {} failed",
            self.suite, self.summary.checks, self.summary.passed, self.summary.failed
        )
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Table => Ok(self.to_table()),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.6e}")
    } else {
        format!("{v:.9}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(v: f64, r: f64, cmp: Comparison, tol: f64) -> CheckResult {
        CheckResult::new(SuiteId::Adm, "x", "c").compare(cmp, v, Some(r), tol)
    }

    #[test]
    fn verdicts() {
        assert!(check(1.0005, 1.0, Comparison::Relative, 1e-3).pass);
        assert!(!check(1.002, 1.0, Comparison::Relative, 1e-3).pass);
        assert!(check(1e-9, 0.0, Comparison::Relative, 1e-8).pass);
        assert!(check(1e-9, 0.0, Comparison::Residual, 1e-8).pass);
        assert!(!check(0.6, 0.5, Comparison::Margin, 0.2).pass);
        assert!(check(0.6, 0.5, Comparison::Margin, 1e-3).pass);
        assert!(check(0.4999999, 0.5, Comparison::AtLeast, 1e-6).pass);
        assert!(!check(0.49, 0.5, Comparison::AtLeast, 1e-6).pass);
        assert!(!check(f64::NAN, 0.0, Comparison::Residual, 1.0).pass);
    }

    #[test]
    fn assembly_sorts_and_counts() {
        let checks = vec![
            check(1.0, 1.0, Comparison::Absolute, 0.0),
            CheckResult::new(SuiteId::Adm, "a", "c").failed(Comparison::Absolute, None, 0.0, "boom"),
        ];
        let r = VerificationReport::assemble(SuiteId::Adm, SuiteConfig::default(), checks);
        assert_eq!(r.checks[0].instance, "a");
        assert_eq!(r.summary, Summary { checks: 2, passed: 1, failed: 1 });
        assert!(r.to_table().contains("boom"));
        assert_eq!(r.to_csv().unwrap().lines().count(), 3);
    }
}
