//! JSON model configuration.
//!
//! ```json
//! { "frame": "coenergy", "axis1": {"linear": 2.0}, "axis2": {"csv": "td.csv"},
//!   "exponent": {"constant": 2.0}, "solver": {"rel_tol": 1e-12} }
//! ```
//!
//! or an explicit reference model:
//!
//! ```json
//! { "closed_form": { "pnorm": { "frame": "energy", "scales": [2.0, 1.0], "exponent": 1.3 } } }
//! ```
//!
//! CSV paths are resolved relative to the configuration file.

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::closed_form::PNormModel;
use crate::error::{Error, Result};
use crate::implicit_model::{ExponentRule, ImplicitModel, SolverOptions};
use crate::material_law::Potential;
use crate::principal_curves::PrincipalCurve;
use crate::tensor::SymTensor2;
use crate::Frame;

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AxisEntry {
    Linear(f64),
    Csv(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ExponentEntry {
    Constant(f64),
    Table(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PNormEntry {
    frame: Frame,
    scales: [f64; 2],
    exponent: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosedFormEntry {
    pnorm: PNormEntry,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    frame: Option<Frame>,
    axis1: Option<AxisEntry>,
    axis2: Option<AxisEntry>,
    exponent: Option<ExponentEntry>,
    solver: Option<SolverOptions>,
    closed_form: Option<ClosedFormEntry>,
}

/// Any model a configuration file can describe.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Implicit(ImplicitModel),
    PNorm(PNormModel),
}

impl Model {
    pub fn as_potential(&self) -> &dyn Potential {
        match self {
            Model::Implicit(m) => m,
            Model::PNorm(m) => m,
        }
    }
}

impl Potential for Model {
    fn frame(&self) -> Frame {
        self.as_potential().frame()
    }

    fn value(&self, x: [f64; 2]) -> Result<f64> {
        self.as_potential().value(x)
    }

    fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        self.as_potential().gradient(x)
    }

    fn hessian(&self, x: [f64; 2]) -> Result<SymTensor2> {
        self.as_potential().hessian(x)
    }

    fn value_gradient(&self, x: [f64; 2]) -> Result<(f64, [f64; 2])> {
        self.as_potential().value_gradient(x)
    }

    fn axis_inverse(&self, axis: usize, level: f64) -> Option<f64> {
        self.as_potential().axis_inverse(axis, level)
    }
}

fn axis(entry: &AxisEntry, base_dir: &Path) -> Result<PrincipalCurve> {
    match entry {
        AxisEntry::Linear(c) => PrincipalCurve::linear(*c),
        AxisEntry::Csv(path) => PrincipalCurve::from_csv_path(base_dir.join(path)),
    }
}

/// Parses a configuration document; relative CSV paths resolve against `base_dir`.
pub fn parse_model(json: &str, base_dir: &Path) -> Result<Model> {
    let raw: RawConfig = serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(cf) = raw.closed_form {
        if raw.frame.is_some() || raw.axis1.is_some() || raw.axis2.is_some() || raw.exponent.is_some() {
            return Err(Error::Config("`closed_form` cannot be combined with implicit model fields".into()));
        }
        let p = cf.pnorm;
        return PNormModel::new(p.frame, p.scales, p.exponent).map(Model::PNorm);
    }
    let missing = |name: &str| Error::Config(format!("missing field `{name}`"));
    let frame = raw.frame.ok_or_else(|| missing("frame"))?;
    let axis1 = axis(raw.axis1.as_ref().ok_or_else(|| missing("axis1"))?, base_dir)?;
    let axis2 = axis(raw.axis2.as_ref().ok_or_else(|| missing("axis2"))?, base_dir)?;
    let exponent = match raw.exponent.ok_or_else(|| missing("exponent"))? {
        ExponentEntry::Constant(e) => ExponentRule::constant(e)?,
        ExponentEntry::Table(rows) => {
            ExponentRule::tabulated(&rows.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>())?
        }
    };
    let solver = raw.solver.unwrap_or_default();
    Ok(Model::Implicit(ImplicitModel::new(frame, axis1, axis2, exponent).with_solver(solver)))
}

#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: Model,
    /// First 16 hex digits of the SHA-256 of the configuration file.
    pub hash: String,
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LoadedModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let model = parse_model(text, base)?;
    let digest = Sha256::digest(&bytes);
    let hash = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    Ok(LoadedModel { model, hash })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_linear_model() {
        let m = parse_model(
            r#"{"frame":"coenergy","axis1":{"linear":2},"axis2":{"linear":1},"exponent":{"constant":2}}"#,
            Path::new("."),
        )
        .unwrap();
        assert!((m.value([2.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parses_table_exponent_and_solver() {
        let m = parse_model(
            r#"{"frame":"energy","axis1":{"linear":2},"axis2":{"linear":1},
                "exponent":{"table":[[0.1,1.8],[1.0,1.9]]},"solver":{"max_iter":50}}"#,
            Path::new("."),
        )
        .unwrap();
        match m {
            Model::Implicit(im) => {
                assert_eq!(im.solver.max_iter, 50);
                assert_eq!(im.solver.rel_tol, 1e-12);
                assert!(!im.exponent.is_constant());
            }
            _ => panic!("expected implicit model"),
        }
    }

    #[test]
    fn parses_closed_form() {
        let m = parse_model(
            r#"{"closed_form":{"pnorm":{"frame":"energy","scales":[2,1],"exponent":1.3}}}"#,
            Path::new("."),
        )
        .unwrap();
        assert_eq!(m.frame(), Frame::Energy);
    }

    #[test]
    fn rejects_bad_documents() {
        for doc in [
            r#"{"frame":"coenergy","axis1":{"linear":2},"exponent":{"constant":2}}"#,
            r#"{"frame":"sideways","axis1":{"linear":2},"axis2":{"linear":1},"exponent":{"constant":2}}"#,
            r#"{"frame":"coenergy","axis1":{"linear":-2},"axis2":{"linear":1},"exponent":{"constant":2}}"#,
            r#"{"frame":"coenergy","axis1":{"csv":"does-not-exist.csv"},"axis2":{"linear":1},"exponent":{"constant":2}}"#,
            r#"{"frame":"coenergy","axis1":{"linear":2},"axis2":{"linear":1},"exponent":{"constant":2},"extra":1}"#,
        ] {
            assert!(parse_model(doc, Path::new(".")).is_err(), "{doc}");
        }
    }
}
