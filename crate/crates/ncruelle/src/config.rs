//! Run configuration: a single JSON key-tree, schema-validated before any
//! computation. Unknown keys are rejected so a typo cannot silently fall
//! back to a default.

use crate::algebra::{AlgebraDescriptor, Element};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::sft::TransitionMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_theta() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    200
}
fn default_samples() -> usize {
    1_000_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub shift: ShiftConfig,
    #[serde(default = "default_theta")]
    pub theta: f64,
    pub algebra: AlgebraConfig,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Source path, for error messages; not part of the schema.
    #[serde(skip)]
    pub source: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftConfig {
    pub k: usize,
    /// 0/1 rows of the transition matrix; omitted means the full shift.
    #[serde(default)]
    pub transition_rows: Option<Vec<Vec<u8>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    /// "matrix" for M_d(R) or "vector" for R^N.
    pub kind: String,
    /// d for matrices, N for vectors.
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// One of: trace_type, depolarizing, kraus_split, first_coordinate,
    /// vector_table, vector_uniform, vector_interpolated.
    pub family: String,
    #[serde(default)]
    pub params: PotentialParams,
    #[serde(default)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialParams {
    /// Scalar parameter (depolarizing p, interpolation p, first-coordinate p).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// 2x2 row-stochastic matrix for the Kraus split family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_matrix: Option<Vec<Vec<f64>>>,
    /// One d x d matrix per allowed word, row-major, for trace_type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<Vec<f64>>>>,
    /// One N x N matrix per allowed word for vector_table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Echo of the subcommand; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Working cylinder depth for sections/eigenstates; defaults to the
    /// minimal exact depth max(m - 1, 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder_depth: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_cap: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            mode: None,
            cylinder_depth: None,
            tol: default_tol(),
            max_iter: default_max_iter(),
            seed: 0,
            samples: default_samples(),
            capacity_cap: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
}

impl RunConfig {
    /// Loads and schema-validates a JSON config. Any parse or schema
    /// error carries the source path and the offending field.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config {
                path: source.to_string(),
                message: e.to_string(),
            })?;
        cfg.source = source.to_string();
        cfg.validate()?;
        Ok(cfg)
    }

    fn config_error(&self, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.source.clone(),
            message: message.into(),
        }
    }

    /// Pure schema-level checks; semantic checks happen while building.
    pub fn validate(&self) -> Result<()> {
        if self.shift.k == 0 {
            return Err(self.config_error("shift.k must be positive"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(self.config_error(format!(
                "theta must lie in (0,1), got {}",
                self.theta
            )));
        }
        match self.algebra.kind.as_str() {
            "matrix" | "vector" => {}
            other => {
                return Err(self.config_error(format!(
                    "algebra.kind must be \"matrix\" or \"vector\", got \"{other}\""
                )))
            }
        }
        if self.algebra.size == 0 {
            return Err(self.config_error("algebra.size must be positive"));
        }
        if !(self.run.tol > 0.0) {
            return Err(self.config_error("run.tol must be positive"));
        }
        if self.run.max_iter == 0 {
            return Err(self.config_error("run.max_iter must be positive"));
        }
        Ok(())
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        match self.algebra.kind.as_str() {
            "vector" => AlgebraDescriptor::Vector(self.algebra.size),
            _ => AlgebraDescriptor::Matrix(self.algebra.size),
        }
    }

    pub fn build_shift(&self) -> Result<TransitionMatrix> {
        match &self.shift.transition_rows {
            None => Ok(TransitionMatrix::full_shift(self.shift.k)),
            Some(rows) => {
                if rows.len() != self.shift.k {
                    return Err(self.config_error(format!(
                        "shift.transition_rows has {} rows, expected k = {}",
                        rows.len(),
                        self.shift.k
                    )));
                }
                TransitionMatrix::new(rows)
            }
        }
    }

    fn param_p(&self) -> Result<f64> {
        self.potential
            .params
            .p
            .ok_or_else(|| self.config_error("potential.params.p is required for this family"))
    }

    fn matrices(
        &self,
        raw: &Option<Vec<Vec<Vec<f64>>>>,
        field: &str,
        side: usize,
    ) -> Result<Vec<DMatrix<f64>>> {
        let raw = raw
            .as_ref()
            .ok_or_else(|| self.config_error(format!("potential.params.{field} is required")))?;
        raw.iter()
            .enumerate()
            .map(|(i, m)| {
                if m.len() != side || m.iter().any(|r| r.len() != side) {
                    return Err(self.config_error(format!(
                        "potential.params.{field}[{i}] is not {side}x{side}"
                    )));
                }
                Ok(DMatrix::from_fn(side, side, |r, c| m[r][c]))
            })
            .collect()
    }

    fn depth_or(&self, default: usize) -> usize {
        self.potential.depth.unwrap_or(default)
    }

    /// Assembles the configured potential, validating family/algebra
    /// consistency against the `shift` and `algebra` sections.
    pub fn build_potential(&self) -> Result<Potential<f64>> {
        let shift = self.build_shift()?;
        let k = self.shift.k;
        let size = self.algebra.size;
        let phi = match self.potential.family.as_str() {
            "trace_type" => {
                let factors = self
                    .matrices(&self.potential.params.factors, "factors", size)?
                    .into_iter()
                    .map(Element::from_matrix)
                    .collect();
                Potential::make_trace_type(shift, self.depth_or(1), factors)?
            }
            "depolarizing" => Potential::make_depolarizing(self.param_p()?, k, size)?,
            "kraus_split" => {
                let wrapped = self.potential.params.p_matrix.clone().map(|m| vec![m]);
                let mut rows = self.matrices(&wrapped, "p_matrix", 2)?;
                Potential::make_kraus_split(rows.remove(0))?
            }
            "first_coordinate" => Potential::make_first_coordinate(self.param_p()?)?,
            "vector_table" => {
                let tables = self.matrices(&self.potential.params.tables, "tables", size)?;
                Potential::make_vector_table(shift, self.depth_or(1), tables)?
            }
            "vector_uniform" => Potential::make_vector_uniform(k, size)?,
            "vector_interpolated" => {
                Potential::make_vector_interpolated(self.param_p()?, k, size)?
            }
            other => {
                return Err(self.config_error(format!(
                    "unknown potential.family \"{other}\""
                )))
            }
        };
        if phi.descriptor() != self.descriptor() {
            return Err(self.config_error(format!(
                "potential family \"{}\" produced algebra {:?}, config says {:?}",
                self.potential.family,
                phi.descriptor(),
                self.descriptor()
            )));
        }
        if phi.shift().symbol_count() != k {
            return Err(self.config_error(format!(
                "potential family \"{}\" is defined on a {}-symbol shift, config says k = {k}",
                self.potential.family,
                phi.shift().symbol_count()
            )));
        }
        Ok(phi)
    }

    /// Working depth for sections and eigenstates: configured value or
    /// the minimal exact depth max(m - 1, 1).
    pub fn cylinder_depth(&self, phi: &Potential<f64>) -> usize {
        self.run
            .cylinder_depth
            .unwrap_or_else(|| phi.depth().saturating_sub(1).max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEPOL: &str = r#"{
        "shift": {"k": 2},
        "theta": 0.5,
        "algebra": {"kind": "matrix", "size": 2},
        "potential": {"family": "depolarizing", "params": {"p": 0.5}},
        "run": {"tol": 1e-10, "max_iter": 200, "seed": 7}
    }"#;

    #[test]
    fn parses_and_builds_depolarizing() {
        let cfg = RunConfig::from_json(DEPOL, "<test>").unwrap();
        let phi = cfg.build_potential().unwrap();
        assert_eq!(phi.depth(), 1);
        assert!(phi.check_normalized() < 1e-12);
        assert_eq!(cfg.cylinder_depth(&phi), 1);
    }

    #[test]
    fn unknown_keys_are_rejected_with_field_path() {
        let bad = DEPOL.replace("\"theta\"", "\"thete\"");
        let err = RunConfig::from_json(&bad, "<test>").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("thete"), "{msg}");
        let nested = DEPOL.replace("\"p\"", "\"q\"");
        assert!(RunConfig::from_json(&nested, "<test>").is_err());
    }

    #[test]
    fn semantic_validation() {
        let bad_theta = DEPOL.replace("0.5,", "1.5,");
        assert!(RunConfig::from_json(&bad_theta, "<test>").is_err());
        let bad_kind = DEPOL.replace("\"matrix\"", "\"matrox\"");
        assert!(RunConfig::from_json(&bad_kind, "<test>").is_err());
    }

    #[test]
    fn trace_type_with_golden_mean_rows() {
        let text = r#"{
            "shift": {"k": 2, "transition_rows": [[1,1],[1,0]]},
            "algebra": {"kind": "matrix", "size": 2},
            "potential": {"family": "trace_type", "depth": 2, "params": {"factors": [
                [[0.3, 0.0],[0.0, 0.6]],
                [[1.0, 0.0],[0.0, 1.0]],
                [[0.7, 0.0],[0.0, 0.4]]
            ]}}
        }"#;
        let cfg = RunConfig::from_json(text, "<test>").unwrap();
        let phi = cfg.build_potential().unwrap();
        assert_eq!(phi.depth(), 2);
        assert!(phi.check_normalized() < 1e-12);
        assert!(!phi.shift().allows(2, 2));
    }

    #[test]
    fn vector_families() {
        let text = r#"{
            "shift": {"k": 2},
            "algebra": {"kind": "vector", "size": 3},
            "potential": {"family": "vector_interpolated", "params": {"p": 0.4}}
        }"#;
        let cfg = RunConfig::from_json(text, "<test>").unwrap();
        let phi = cfg.build_potential().unwrap();
        assert_eq!(phi.descriptor(), AlgebraDescriptor::Vector(3));
    }

    #[test]
    fn algebra_mismatch_is_caught() {
        let text = r#"{
            "shift": {"k": 2},
            "algebra": {"kind": "vector", "size": 2},
            "potential": {"family": "depolarizing", "params": {"p": 0.5}}
        }"#;
        let cfg = RunConfig::from_json(text, "<test>").unwrap();
        assert!(matches!(
            cfg.build_potential(),
            Err(Error::Config { .. })
        ));
    }
}
