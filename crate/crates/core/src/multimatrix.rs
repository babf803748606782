//! Inclusions of multi-matrix algebras `⊕_j M_{β_j} ⊂ ⊕_i M_{α_i}` given by
//! a Bratteli diagram. Here the matrix dimension is the integer inclusion
//! matrix and the minimal expectation preserves the Markov trace.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dimension::DimensionMatrix;
use crate::error::{Error, Result};
use crate::matrix::{max_abs_diff, Matrix};
use crate::spectral::{self, PfConfig, PfData};

/// Relative tolerance for the boolean classifications in this module.
pub const DEFAULT_CLASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BratteliDiagram {
    d: DimensionMatrix,
    beta: Vec<u64>,
    alpha: Vec<u64>,
}

impl BratteliDiagram {
    pub fn matrix(&self) -> &DimensionMatrix {
        &self.d
    }

    /// Sizes of the lower summands.
    pub fn beta(&self) -> &[u64] {
        &self.beta
    }

    /// Sizes of the upper summands.
    pub fn alpha(&self) -> &[u64] {
        &self.alpha
    }

    fn beta_f(&self) -> Vec<f64> {
        self.beta.iter().map(|&b| b as f64).collect()
    }

    fn alpha_f(&self) -> Vec<f64> {
        self.alpha.iter().map(|&a| a as f64).collect()
    }

    /// Graphviz rendering: lower summands on one rank, upper on another,
    /// one edge per nonzero entry labelled with its multiplicity.
    pub fn to_dot(&self) -> String {
        let (m, n) = self.d.shape();
        let mut out = String::from("graph bratteli {\n  rankdir=BT;\n");
        out.push_str("  subgraph lower {\n    rank=same;\n");
        for (j, b) in self.beta.iter().enumerate() {
            let _ = writeln!(out, "    n{j} [label=\"M_{b}\"];");
        }
        out.push_str("  }\n  subgraph upper {\n    rank=same;\n");
        for (i, a) in self.alpha.iter().enumerate() {
            let _ = writeln!(out, "    m{i} [label=\"M_{a}\"];");
        }
        out.push_str("  }\n");
        for j in 0..n {
            for i in 0..m {
                let mult = self.d.get(i, j);
                if mult > 0.0 {
                    let _ = writeln!(out, "  n{j} -- m{i} [label=\"{}\"];", mult as u64);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Checks that `D` is a nonnegative integer matrix and `Dβ = α` exactly.
pub fn validate_bratteli(d: DimensionMatrix, beta: Vec<u64>, alpha: Vec<u64>) -> Result<BratteliDiagram> {
    let (m, n) = d.shape();
    if beta.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "beta has length {}, D has {n} columns",
            beta.len()
        )));
    }
    if alpha.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "alpha has length {}, D has {m} rows",
            alpha.len()
        )));
    }
    if beta.contains(&0) || alpha.contains(&0) {
        return Err(Error::DimensionMismatch("summand sizes must be positive".into()));
    }
    for (i, j, x) in d.as_matrix().iter_indexed() {
        if x.fract() != 0.0 || x > u32::MAX as f64 {
            return Err(Error::NonIntegerEntry(i, j));
        }
    }
    for (i, &expected) in alpha.iter().enumerate() {
        let got = (0..n)
            .map(|j| d.get(i, j) as u64 * beta[j])
            .fold(0u64, u64::saturating_add);
        if got != expected {
            return Err(Error::BetaAlphaViolation { row: i, expected, got });
        }
    }
    Ok(BratteliDiagram { d, beta, alpha })
}

/// Trace vectors of the Markov trace `τ`: `s_i = τ(p_i)`, `t_j = τ(q_j)`.
///
/// These are weights of central projections. The trace of a minimal
/// projection in the i-th upper summand is `s_i / α_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovTraceData {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// `d²`.
    pub modulus: f64,
    /// `max_j |t_j − β_j Σ_i D_ij s_i/α_i|`.
    pub restriction_residual: f64,
}

impl MarkovTraceData {
    /// Traces of minimal projections in the upper summands.
    pub fn minimal_projection_traces(&self, diag: &BratteliDiagram) -> Vec<f64> {
        self.s.iter().zip(&diag.alpha).map(|(s, &a)| s / a as f64).collect()
    }
}

/// `t_j = β_j Σ_i D_ij s_i/α_i`.
pub fn restrict_trace(diag: &BratteliDiagram, s: &[f64]) -> Vec<f64> {
    let per_minimal: Vec<f64> = s.iter().zip(&diag.alpha).map(|(s, &a)| s / a as f64).collect();
    diag.d
        .as_matrix()
        .tmul_vec(&per_minimal)
        .into_iter()
        .zip(&diag.beta)
        .map(|(x, &b)| x * b as f64)
        .collect()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Markov trace from the Perron-Frobenius data: `s_i ∝ μ_i^{1/2} α_i`,
/// `t_j ∝ ν_j^{1/2} β_j`.
pub fn markov_trace(diag: &BratteliDiagram, pf: &PfData) -> Result<MarkovTraceData> {
    if pf.mu_sqrt.len() != diag.alpha.len() || pf.nu_sqrt.len() != diag.beta.len() {
        return Err(Error::ShapeMismatch {
            expected: diag.d.shape(),
            got: (pf.mu_sqrt.len(), pf.nu_sqrt.len()),
        });
    }
    let s = normalized(pf.mu_sqrt.iter().zip(diag.alpha_f()).map(|(m, a)| m * a).collect());
    let t = normalized(pf.nu_sqrt.iter().zip(diag.beta_f()).map(|(n, b)| n * b).collect());
    let restriction_residual = max_abs_diff(&t, &restrict_trace(diag, &s));
    Ok(MarkovTraceData {
        s,
        t,
        modulus: pf.index(),
        restriction_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperExtremality {
    pub is_super_extremal: bool,
    /// `Dᵗα`.
    pub lhs: Vec<f64>,
    /// `d²β`.
    pub rhs: Vec<f64>,
    pub index: f64,
    /// `‖α‖²/‖β‖²`.
    pub dim_ratio: f64,
    pub index_is_integer: bool,
}

/// Super-extremality test `Dᵗα = d²β`.
pub fn super_extremality(diag: &BratteliDiagram, tol: f64) -> Result<SuperExtremality> {
    let pf = spectral::pf_data(&diag.d, &PfConfig::default())?;
    let index = pf.index();
    let alpha = diag.alpha_f();
    let beta = diag.beta_f();
    let lhs = diag.d.as_matrix().tmul_vec(&alpha);
    let rhs: Vec<f64> = beta.iter().map(|b| index * b).collect();
    let alpha_inf = alpha.iter().copied().fold(0.0, f64::max);
    let is_super_extremal = max_abs_diff(&lhs, &rhs) <= tol * alpha_inf;
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let dim_ratio = sq(&alpha) / sq(&beta);
    let index_is_integer = (index - index.round()).abs() <= tol * index.max(1.0);
    Ok(SuperExtremality {
        is_super_extremal,
        lhs,
        rhs,
        index,
        dim_ratio,
        index_is_integer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtremalityReport {
    /// `ν_j = β_j²/Σ_k β_k²` for all j.
    pub omega_l_eq_trace: bool,
    /// `μ_i = α_i²/Σ_k α_k²` for all i.
    pub omega_r_eq_trace: bool,
}

/// Compares the left/right states with the restricted Markov trace.
/// Connected multi-matrix inclusions are always extremal, so only these two
/// refinements carry information.
pub fn extremality_report(diag: &BratteliDiagram, pf: &PfData, tol: f64) -> ExtremalityReport {
    let matches = |state: Vec<f64>, sizes: Vec<f64>| {
        let total: f64 = sizes.iter().map(|x| x * x).sum();
        let trace: Vec<f64> = sizes.iter().map(|x| x * x / total).collect();
        let scale = state.iter().chain(&trace).fold(0.0_f64, |m, x| m.max(x.abs()));
        max_abs_diff(&state, &trace) <= tol * scale
    };
    ExtremalityReport {
        omega_l_eq_trace: matches(pf.nu(), diag.beta_f()),
        omega_r_eq_trace: matches(pf.mu(), diag.alpha_f()),
    }
}

/// A connected super-extremal diagram of integer index `target`:
/// `M_1 ⊕ … ⊕ M_1 ⊂ M_target`.
pub fn realize_integer_index(target: u64) -> BratteliDiagram {
    assert!(target >= 1, "index must be at least 1");
    let n = target as usize;
    let d = DimensionMatrix::from_matrix(Matrix::from_fn(1, n, |_, _| 1.0), Default::default())
        .expect("row of ones is valid");
    validate_bratteli(d, vec![1; n], vec![target]).expect("D·1 = target")
}
