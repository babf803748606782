use std::io::Read;
use std::path::Path;

use minindex::dimension::validate_dimension_matrix;
use minindex::matrix::Matrix;
use minindex::multimatrix::{validate_bratteli, BratteliDiagram};
use minindex::{DimensionMatrix, ValidationOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Wire form of an inclusion: a matrix dimension, optionally with the
/// summand sizes of a multi-matrix inclusion.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<u64>>,
}

/// `{"D": ..., "parts": [...]}` for the additivity check.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdditivitySpec {
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    #[serde(default)]
    pub parts: Vec<Vec<Vec<f64>>>,
}

pub struct Inclusion {
    pub spec: InclusionSpec,
    pub matrix: DimensionMatrix,
    pub bratteli: Option<BratteliDiagram>,
}

/// Reads a file, or stdin when `path` is `-`.
pub fn read_source(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

pub fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, origin: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn parse_inclusion(text: &str, origin: &str, opts: ValidationOptions) -> Result<Inclusion, CliError> {
    let spec: InclusionSpec = parse_json(text, origin)?;
    let matrix = validate_dimension_matrix(&spec.d, opts)?;
    let bratteli = match (&spec.beta, &spec.alpha) {
        (None, None) => None,
        (Some(beta), Some(alpha)) => Some(validate_bratteli(matrix.clone(), beta.clone(), alpha.clone())?),
        _ => {
            return Err(CliError::Input(format!(
                "{origin}: \"beta\" and \"alpha\" must be given together"
            )))
        }
    };
    Ok(Inclusion { spec, matrix, bratteli })
}

pub fn load_inclusion(path: &Path, opts: ValidationOptions) -> Result<Inclusion, CliError> {
    let text = read_source(path)?;
    parse_inclusion(&text, &path.display().to_string(), opts)
}

pub fn parts_to_matrices(parts: &[Vec<Vec<f64>>]) -> Result<Vec<Matrix>, CliError> {
    parts
        .iter()
        .enumerate()
        .map(|(k, p)| Matrix::from_rows(p).ok_or_else(|| CliError::Input(format!("part {k} is not rectangular"))))
        .collect()
}
