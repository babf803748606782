//! Validated matrix dimensions and their support patterns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;
use crate::matrix::Matrix;
use crate::spectral::{self, PfConfig};

/// Absolute tolerance on row/column sums used by [`norm_diagnostics`].
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Reject entries in the open interval (0, 1). Every entry of a genuine
    /// matrix dimension is the square root of a subfactor index, hence ≥ 1.
    pub quantization_floor: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            quantization_floor: true,
        }
    }
}

impl ValidationOptions {
    pub fn relaxed() -> Self {
        Self {
            quantization_floor: false,
        }
    }
}

/// An m×n nonnegative matrix of scalar dimensions `d_ij`.
///
/// Rows index the minimal central projections of the larger algebra,
/// columns those of the smaller one. Entries are finite, either zero or
/// (unless validation was relaxed) at least one, and no row or column
/// vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionMatrix {
    inner: Matrix,
}

impl DimensionMatrix {
    pub fn new(raw: &[Vec<f64>]) -> Result<Self> {
        validate_dimension_matrix(raw, ValidationOptions::default())
    }

    pub fn from_matrix(m: Matrix, opts: ValidationOptions) -> Result<Self> {
        check(&m, opts)?;
        Ok(Self { inner: m })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.inner.cols()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    /// The matrix dimension of the conjugate inclusion.
    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    /// `t·D` for `t > 0`. The quantization floor is not re-checked.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::from_matrix(self.inner.scale(t), ValidationOptions::relaxed())
    }

    pub fn support(&self) -> SupportPattern {
        SupportPattern {
            rows: self.rows(),
            cols: self.cols(),
            cells: self.inner.as_slice().iter().map(|&x| x > 0.0).collect(),
        }
    }

    /// True when every entry is an exact nonnegative integer.
    pub fn is_integral(&self) -> bool {
        self.inner
            .as_slice()
            .iter()
            .all(|&x| x.fract() == 0.0 && x >= 0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&DimensionJson {
            d: self.to_rows(),
        })
        .expect("matrix of finite floats always serializes")
    }

    pub fn from_json(s: &str, opts: ValidationOptions) -> std::result::Result<Self, JsonError> {
        let parsed: DimensionJson = serde_json::from_str(s)?;
        Ok(validate_dimension_matrix(&parsed.d, opts)?)
    }
}

/// Wire form `{"D": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionJson {
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] Error),
}

/// Boolean support `S_ij = (d_ij > 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPattern {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl SupportPattern {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.cols + j]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row indices `i` with `S_ij` set.
    pub fn col_support(&self, j: usize) -> Vec<usize> {
        (0..self.rows).filter(|&i| self.get(i, j)).collect()
    }
}

pub fn validate_dimension_matrix(raw: &[Vec<f64>], opts: ValidationOptions) -> Result<DimensionMatrix> {
    let Some(first) = raw.first() else {
        return Err(Error::Empty);
    };
    if first.is_empty() {
        return Err(Error::Empty);
    }
    for (row, r) in raw.iter().enumerate() {
        if r.len() != first.len() {
            return Err(Error::NotRectangular {
                row,
                expected: first.len(),
                got: r.len(),
            });
        }
    }
    let m = Matrix::from_rows(raw).expect("rectangularity checked above");
    DimensionMatrix::from_matrix(m, opts)
}

fn check(m: &Matrix, opts: ValidationOptions) -> Result<()> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::Empty);
    }
    for (i, j, x) in m.iter_indexed() {
        if !x.is_finite() {
            return Err(Error::NonFinite(i, j));
        }
        if x < 0.0 {
            return Err(Error::NegativeEntry(i, j));
        }
        if opts.quantization_floor && x > 0.0 && x < 1.0 {
            return Err(Error::EntryBelowOne(i, j));
        }
    }
    if let Some(i) = (0..m.rows()).find(|&i| m.row(i).iter().all(|&x| x == 0.0)) {
        return Err(Error::ZeroRow(i));
    }
    if let Some(j) = (0..m.cols()).find(|&j| (0..m.rows()).all(|i| m[(i, j)] == 0.0)) {
        return Err(Error::ZeroColumn(j));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormDiagnostics {
    /// Maximum column sum.
    pub norm_1: f64,
    /// Maximum row sum.
    pub norm_inf: f64,
    /// l² operator norm, the scalar dimension.
    pub norm_2: f64,
    pub row_stochastic_after_scaling: bool,
    pub col_stochastic_after_scaling: bool,
}

/// Matrix norms of `D` and whether `D/‖D‖` is row- or column-stochastic.
///
/// When both flags hold, `‖D‖₁ = ‖D‖∞ = ‖D‖` and the unweighted direct sum
/// of standard solutions of the entries is itself standard.
pub fn norm_diagnostics(d: &DimensionMatrix) -> Result<NormDiagnostics> {
    let m = d.as_matrix();
    let row_sums = m.row_sums();
    let col_sums = m.col_sums();
    let norm_1 = col_sums.iter().copied().fold(0.0, f64::max);
    let norm_inf = row_sums.iter().copied().fold(0.0, f64::max);

    let cfg = PfConfig::default();
    let mut norm_2: f64 = 0.0;
    for block in graph::decompose_connected(d).blocks {
        norm_2 = norm_2.max(spectral::pf_data(&block.matrix, &cfg)?.d);
    }
    let stochastic = |sums: &[f64]| sums.iter().all(|s| (s / norm_2 - 1.0).abs() <= STOCHASTIC_TOL);
    Ok(NormDiagnostics {
        norm_1,
        norm_inf,
        norm_2,
        row_stochastic_after_scaling: stochastic(&row_sums),
        col_stochastic_after_scaling: stochastic(&col_sums),
    })
}
