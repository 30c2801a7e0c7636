//! JSON report and CSV emission. Every number in a report is
//! reproducible from the echoed config and seed; only `timing_ms`
//! varies between identical runs.

use crate::config::RunConfig;
use crate::error::Result;
use crate::transfer::IterationLog;
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed CSV header for iteration logs.
pub const CSV_HEADER: &str = "step,spread,off_identity,eta_estimate,seminorm_bound";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// Crate version that produced the report.
    pub version: String,
    /// Subcommand that produced the report.
    pub mode: String,
    /// Echo of the effective configuration.
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterate: Option<IterateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenstate: Option<EigenstateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<Vec<VerifyRow>>,
    pub passed: bool,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckSummary {
    pub aperiodic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aperiodicity_exponent: Option<usize>,
    pub normalization_deviation: f64,
    /// "analytic", "certified-true", "certified-false", "probably-true",
    /// or "none".
    pub positivity: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterateSummary {
    pub steps: usize,
    pub converged: bool,
    pub residual: f64,
    pub eta_estimate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub depth: usize,
    pub block_dim: usize,
    pub lambda1_re: f64,
    pub lambda1_im: f64,
    pub lambda2_modulus: f64,
    pub gap: f64,
    pub leading_multiplicity: usize,
    /// Eigenvalue moduli in descending order.
    pub moduli: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenstateSummary {
    pub depth: usize,
    pub residual: f64,
    pub shift_invariance_residual: f64,
    /// Pairing with the identity after normalization (should be 1).
    pub total_mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropySummary {
    pub h: f64,
    pub eta_log_j: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_lower_bound: Option<f64>,
    pub inequality_margins: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McSummary {
    pub seed: u64,
    pub samples: usize,
    pub entropy_estimate: f64,
    pub entropy_std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_sigma_distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyRow {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Report {
    pub fn new(mode: &str, config: RunConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            mode: mode.to_string(),
            config,
            check: None,
            iterate: None,
            spectrum: None,
            eigenstate: None,
            entropy: None,
            mc: None,
            verify: None,
            passed: false,
            timing_ms: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// Writes an iteration log as CSV with the fixed header.
pub fn write_csv(path: &Path, log: &[IterationLog<f64>]) -> Result<()> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in log {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.step, row.spread, row.off_identity, row.eta_estimate, row.seminorm_bound
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Renders the verify-paper rows as an aligned pass/fail table.
pub fn format_verify_table(rows: &[VerifyRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>12}  {:>9}  result", "name", "residual", "tol");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.3e}  {:>9.1e}  {}",
            r.name,
            r.residual,
            r.tol,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn config() -> RunConfig {
        RunConfig::from_json(
            r#"{
                "shift": {"k": 2},
                "algebra": {"kind": "matrix", "size": 2},
                "potential": {"family": "depolarizing", "params": {"p": 0.5}}
            }"#,
            "<test>",
        )
        .unwrap()
    }

    #[test]
    fn report_has_schema_version_at_top_level() {
        let report = Report::new("check", config());
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(value["schema_version"], SCHEMA_VERSION);
        assert_eq!(value["mode"], "check");
        assert!(value.get("spectrum").is_none());
    }

    #[test]
    fn reports_are_deterministic_modulo_timing() {
        let mut a = Report::new("entropy", config());
        let mut b = Report::new("entropy", config());
        a.timing_ms = 1.0;
        b.timing_ms = 2.0;
        a.timing_ms = 0.0;
        b.timing_ms = 0.0;
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn csv_has_fixed_header() {
        let dir = std::env::temp_dir().join("ncruelle-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("log.csv");
        let log = vec![IterationLog::<f64> {
            step: 1,
            spread: 0.5,
            off_identity: 0.25,
            eta_estimate: 1.0,
            seminorm_bound: 2.0,
        }];
        write_csv(&path, &log).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("step,spread,off_identity,eta_estimate,seminorm_bound\n"));
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn verify_table_lists_one_row_per_fixture() {
        let rows = vec![
            VerifyRow {
                name: "gg3".into(),
                residual: 1e-12,
                tol: 1e-9,
                passed: true,
            },
            VerifyRow {
                name: "gg6".into(),
                residual: 1e-3,
                tol: 1e-9,
                passed: false,
            },
        ];
        let table = format_verify_table(&rows);
        assert_eq!(table.lines().count(), 3);
        assert!(table.contains("FAIL"));
    }
}
