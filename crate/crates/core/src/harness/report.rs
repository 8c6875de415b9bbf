use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conjdsl::{ConjectureSpec, Outcome, VerificationRecord};

use super::sweep::SweepConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(format!("unknown report format `{other}` (expected json, csv or text)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureSummary {
    pub id: String,
    pub status: String,
    pub low_confidence: bool,
    /// Primes at which at least one record was emitted.
    pub primes_tested: usize,
    pub records: usize,
    pub passes: usize,
    pub failures: usize,
    pub errors: usize,
    pub skips: BTreeMap<String, usize>,
    pub failure_records: Vec<VerificationRecord>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub records: usize,
    pub passes: usize,
    pub failures: usize,
    pub skipped: usize,
    pub errors: usize,
    /// Failures of entries tagged `low_confidence`, also counted in `failures`.
    pub low_confidence_failures: usize,
    pub conjectures: Vec<ConjectureSummary>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub engine_version: String,
    pub config: SweepConfig,
    pub results: Vec<VerificationRecord>,
    pub summary: Summary,
}

impl Report {
    /// Aggregate canonically ordered records; `timings` pairs entry ids with seconds.
    pub fn assemble(
        config: SweepConfig,
        specs: &[&ConjectureSpec],
        results: Vec<VerificationRecord>,
        timings: Vec<(String, f64)>,
        total_seconds: f64,
    ) -> Report {
        let mut per: Vec<ConjectureSummary> = specs
            .iter()
            .map(|s| ConjectureSummary {
                id: s.id.clone(),
                status: s.status.keyword().to_string(),
                low_confidence: s.has_tag("low_confidence"),
                primes_tested: 0,
                records: 0,
                passes: 0,
                failures: 0,
                errors: 0,
                skips: BTreeMap::new(),
                failure_records: vec![],
                seconds: 0.0,
            })
            .collect();
        let index: BTreeMap<&str, usize> = specs.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
        let mut last_prime: Vec<Option<u64>> = vec![None; per.len()];
        let mut summary = Summary {
            records: results.len(),
            passes: 0,
            failures: 0,
            skipped: 0,
            errors: 0,
            low_confidence_failures: 0,
            conjectures: vec![],
            total_seconds,
        };
        for r in &results {
            let i = index[r.id.as_str()];
            let c = &mut per[i];
            c.records += 1;
            if last_prime[i] != Some(r.prime) {
                last_prime[i] = Some(r.prime);
                c.primes_tested += 1;
            }
            match &r.outcome {
                Outcome::Pass => {
                    c.passes += 1;
                    summary.passes += 1;
                }
                Outcome::Fail { .. } => {
                    c.failures += 1;
                    c.failure_records.push(r.clone());
                    summary.failures += 1;
                    if c.low_confidence {
                        summary.low_confidence_failures += 1;
                    }
                }
                Outcome::Skipped { reason } => {
                    *c.skips.entry(reason.clone()).or_default() += 1;
                    summary.skipped += 1;
                }
                Outcome::Error { .. } => {
                    c.errors += 1;
                    summary.errors += 1;
                }
            }
        }
        for (id, secs) in timings {
            if let Some(&i) = index.get(id.as_str()) {
                per[i].seconds = secs;
            }
        }
        summary.conjectures = per;
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            results,
            summary,
        }
    }

    /// A copy with every timing field zeroed.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        r.summary.total_seconds = 0.0;
        for c in &mut r.summary.conjectures {
            c.seconds = 0.0;
        }
        r
    }
}

/// 0 when everything passed or was skipped, 1 on a failure, 2 on an engine error.
pub fn exit_code(report: &Report) -> i32 {
    if report.summary.errors > 0 {
        2
    } else if report.summary.failures > 0 {
        1
    } else {
        0
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    id: &'a str,
    case: usize,
    prime: u64,
    exponent: u32,
    outcome: &'a str,
    lhs: Option<u64>,
    rhs: Option<u64>,
    modulus: Option<u64>,
    reason: Option<&'a str>,
    kind: Option<&'a str>,
    message: Option<&'a str>,
}

fn to_csv(report: &Report) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.results {
        let mut row = CsvRow {
            id: &r.id,
            case: r.case,
            prime: r.prime,
            exponent: r.exponent,
            outcome: r.outcome.label(),
            lhs: None,
            rhs: None,
            modulus: None,
            reason: None,
            kind: None,
            message: None,
        };
        match &r.outcome {
            Outcome::Pass => {}
            Outcome::Fail { lhs, rhs, modulus } => {
                row.lhs = Some(*lhs);
                row.rhs = Some(*rhs);
                row.modulus = Some(*modulus);
            }
            Outcome::Skipped { reason } => row.reason = Some(reason),
            Outcome::Error { kind, message } => {
                row.kind = Some(kind);
                row.message = Some(message);
            }
        }
        w.serialize(row).map_err(io::Error::other)?;
    }
    if report.results.is_empty() {
        w.write_record([
            "id", "case", "prime", "exponent", "outcome", "lhs", "rhs", "modulus", "reason", "kind", "message",
        ])
        .map_err(io::Error::other)?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}

fn to_text(report: &Report) -> String {
    let s = &report.summary;
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "supercong {}  primes {}..{}  exponent cap {}",
        report.engine_version,
        c.lo,
        c.hi,
        c.effective_cap()
    );
    let _ = writeln!(
        out,
        "{:<28} {:>7} {:>7} {:>7} {:>7} {:>7} {:>9}",
        "id", "primes", "pass", "fail", "skip", "error", "seconds"
    );
    for e in &s.conjectures {
        let skips: usize = e.skips.values().sum();
        let flag = if e.low_confidence { " (low confidence)" } else { "" };
        let _ = writeln!(
            out,
            "{:<28} {:>7} {:>7} {:>7} {:>7} {:>7} {:>9.3}{flag}",
            e.id, e.primes_tested, e.passes, e.failures, skips, e.errors, e.seconds
        );
    }
    for e in &s.conjectures {
        for r in &e.failure_records {
            if let Outcome::Fail { lhs, rhs, modulus } = r.outcome {
                let _ = writeln!(
                    out,
                    "FAIL {} case {} p={}: lhs {} rhs {} mod {}",
                    r.id, r.case, r.prime, lhs, rhs, modulus
                );
            }
        }
    }
    for r in &report.results {
        if let Outcome::Error { kind, message } = &r.outcome {
            let _ = writeln!(out, "ERROR {} case {} p={}: {kind}: {message}", r.id, r.case, r.prime);
        }
    }
    let _ = writeln!(out, "records: {}", s.records);
    let _ = writeln!(out, "passes: {}", s.passes);
    let _ = writeln!(out, "skipped: {}", s.skipped);
    let _ = writeln!(out, "errors: {}", s.errors);
    let _ = writeln!(out, "failures: {}", s.failures);
    out
}

/// Render `report` in `format`.
pub fn render(report: &Report, format: ReportFormat) -> io::Result<String> {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).map(|s| s + "\n").map_err(io::Error::other),
        ReportFormat::Csv => to_csv(report),
        ReportFormat::Text => Ok(to_text(report)),
    }
}

pub fn write_report(report: &Report, format: ReportFormat, path: &Path) -> io::Result<()> {
    fs::write(path, render(report, format)?)
}

/// Read back a JSON report.
pub fn read_report(path: &Path) -> io::Result<Report> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(io::Error::other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjdsl::Registry;
    use crate::harness::{run_sweep_with, SweepConfig};

    fn failing() -> Report {
        let reg = Registry::load([(
            "t.cdsl",
            "conjecture \"ok\" { case all: p^2 === 0 (mod p^2); }\nconjecture \"bad\" { case p mod 4 in {3}: p + 1 === 1 (mod p^2); }",
        )])
        .unwrap();
        run_sweep_with(&reg, &SweepConfig { lo: 3, hi: 12, jobs: 1, ..Default::default() }).unwrap()
    }

    #[test]
    fn summary_counts() {
        let r = failing();
        assert_eq!(r.summary.records, r.summary.passes + r.summary.failures + r.summary.skipped + r.summary.errors);
        assert_eq!(r.summary.failures, 3);
        assert_eq!(exit_code(&r), 1);
        let bad = r.summary.conjectures.iter().find(|c| c.id == "bad").unwrap();
        assert_eq!(bad.failure_records.len(), 3);
        assert!(render(&r, ReportFormat::Text).unwrap().contains("failures: 3"));
    }

    #[test]
    fn csv_rows_carry_residues() {
        let r = failing();
        let csv = render(&r, ReportFormat::Csv).unwrap();
        let row = csv.lines().find(|l| l.starts_with("bad,0,3,")).unwrap();
        assert_eq!(row, "bad,0,3,2,fail,4,1,9,,,");
        assert!(csv.starts_with("id,case,prime,exponent,outcome,lhs,rhs,modulus,reason,kind,message"));
    }

    #[test]
    fn json_round_trip() {
        let r = failing();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_report(&r, ReportFormat::Json, &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), r);
    }

    #[test]
    fn zero_failures_line() {
        let reg = Registry::load([("t.cdsl", "conjecture \"ok\" { case all: p === 0 (mod p); }")]).unwrap();
        let r = run_sweep_with(&reg, &SweepConfig { lo: 3, hi: 30, ..Default::default() }).unwrap();
        assert!(render(&r, ReportFormat::Text).unwrap().contains("failures: 0"));
        assert_eq!(exit_code(&r), 0);
    }

    #[test]
    fn formats_parse() {
        assert_eq!("csv".parse::<ReportFormat>(), Ok(ReportFormat::Csv));
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
