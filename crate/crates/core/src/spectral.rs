//! Perron-Frobenius data of a connected matrix dimension and everything
//! derived from it: minimal index, minimal expectation weights, canonical
//! states and the scalar identities satisfied by standard solutions.

use serde::Serialize;

use crate::dimension::DimensionMatrix;
use crate::error::{Error, Result};
use crate::graph;
use crate::matrix::{l2_norm, max_abs_diff, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfConfig {
    /// Bound on the coupled-equation residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PfConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

/// Perron-Frobenius eigendata of `DᵗD` and `DDᵗ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfData {
    /// Scalar dimension `‖D‖`.
    pub d: f64,
    /// `ν^{1/2}`, positive and l²-normalized, length n.
    pub nu_sqrt: Vec<f64>,
    /// `μ^{1/2}`, positive and l²-normalized, length m.
    pub mu_sqrt: Vec<f64>,
    /// `max(‖Dν^{1/2} − dμ^{1/2}‖∞, ‖Dᵗμ^{1/2} − dν^{1/2}‖∞)`.
    pub residual: f64,
    pub iterations: usize,
}

impl PfData {
    pub fn index(&self) -> f64 {
        self.d * self.d
    }

    /// `ν_j`, the left state on the lower center.
    pub fn nu(&self) -> Vec<f64> {
        self.nu_sqrt.iter().map(|x| x * x).collect()
    }

    /// `μ_i`, the right state on the upper center.
    pub fn mu(&self) -> Vec<f64> {
        self.mu_sqrt.iter().map(|x| x * x).collect()
    }
}

/// Power iteration on `AᵗA` started from the uniform vector.
///
/// Returns `(x, y, s)` with `Ax = s·y`, `Aᵗy ≈ s·x`, both unit vectors.
fn power_pair(a: &Matrix, cfg: &PfConfig) -> Result<(Vec<f64>, Vec<f64>, f64, usize)> {
    let q = a.cols();
    let mut x = vec![1.0 / (q as f64).sqrt(); q];
    for it in 1..=cfg.max_iter {
        let mut y = a.mul_vec(&x);
        let s = l2_norm(&y);
        y.iter_mut().for_each(|v| *v /= s);
        let z = a.tmul_vec(&y);
        let residual = z
            .iter()
            .zip(&x)
            .fold(0.0_f64, |r, (zi, xi)| r.max((zi - s * xi).abs()));
        if residual <= cfg.tol {
            return Ok((x, y, s, it));
        }
        let zn = l2_norm(&z);
        x = z.into_iter().map(|v| v / zn).collect();
    }
    Err(Error::NoConvergence(cfg.max_iter))
}

/// Coupled-equation residual of a candidate eigenpair.
pub fn coupled_residual(d: &DimensionMatrix, dim: f64, nu_sqrt: &[f64], mu_sqrt: &[f64]) -> f64 {
    let m = d.as_matrix();
    let dn: Vec<f64> = nu_sqrt.iter().map(|x| dim * x).collect();
    let dm: Vec<f64> = mu_sqrt.iter().map(|x| dim * x).collect();
    max_abs_diff(&m.mul_vec(nu_sqrt), &dm).max(max_abs_diff(&m.tmul_vec(mu_sqrt), &dn))
}

pub fn pf_data(d: &DimensionMatrix, cfg: &PfConfig) -> Result<PfData> {
    if !graph::is_connected(d) {
        return Err(Error::NotConnected);
    }
    // Iterate on the smaller Gram matrix. It has a positive diagonal and an
    // irreducible pattern, so it is primitive and the iteration cannot cycle.
    let (nu_sqrt, mu_sqrt, dim, iterations) = if d.cols() <= d.rows() {
        let (x, y, s, it) = power_pair(d.as_matrix(), cfg)?;
        (x, y, s, it)
    } else {
        let (x, y, s, it) = power_pair(&d.as_matrix().transpose(), cfg)?;
        (y, x, s, it)
    };
    let residual = coupled_residual(d, dim, &nu_sqrt, &mu_sqrt);
    Ok(PfData {
        d: dim,
        nu_sqrt,
        mu_sqrt,
        residual,
        iterations,
    })
}

/// The minimal index `‖D‖²` of a connected inclusion.
pub fn minimal_index(d: &DimensionMatrix) -> Result<f64> {
    Ok(pf_data(d, &PfConfig::default())?.index())
}

fn check_shape(d: &DimensionMatrix, pf: &PfData) -> Result<()> {
    let got = (pf.mu_sqrt.len(), pf.nu_sqrt.len());
    if got != d.shape() {
        return Err(Error::ShapeMismatch {
            expected: d.shape(),
            got,
        });
    }
    Ok(())
}

/// Weights `λ_ij` of a conditional expectation and `λ′_ji` of its dual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationMatrix {
    /// m×n, column-stochastic.
    pub lambda: Matrix,
    /// n×m, column-stochastic.
    pub dual_lambda: Matrix,
}

impl ExpectationMatrix {
    /// Largest deviation of a column sum of `Λ` or `Λ′` from 1.
    pub fn stochasticity_residual(&self) -> f64 {
        self.lambda
            .col_sums()
            .into_iter()
            .chain(self.dual_lambda.col_sums())
            .fold(0.0, |r, s| r.max((s - 1.0).abs()))
    }
}

/// `λ_ij = (d_ij/d)(μ_i^{1/2}/ν_j^{1/2})` and `λ′_ji = (d_ij/d)(ν_j^{1/2}/μ_i^{1/2})`.
pub fn minimal_expectation(d: &DimensionMatrix, pf: &PfData) -> Result<ExpectationMatrix> {
    check_shape(d, pf)?;
    let lambda = Matrix::from_fn(d.rows(), d.cols(), |i, j| {
        d.get(i, j) / pf.d * pf.mu_sqrt[i] / pf.nu_sqrt[j]
    });
    let dual_lambda = Matrix::from_fn(d.cols(), d.rows(), |j, i| {
        d.get(i, j) / pf.d * pf.nu_sqrt[j] / pf.mu_sqrt[i]
    });
    Ok(ExpectationMatrix { lambda, dual_lambda })
}

/// Largest deviation in `c_ij = c·λ_ij·λ′_ji` over all entries.
pub fn index_factorization_residual(d: &DimensionMatrix, pf: &PfData, e: &ExpectationMatrix) -> f64 {
    let c = pf.index();
    let mut r: f64 = 0.0;
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            let cij = d.get(i, j).powi(2);
            r = r.max((cij - c * e.lambda[(i, j)] * e.dual_lambda[(j, i)]).abs());
        }
    }
    r
}

/// Left, right and spherical states of the inclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalStates {
    /// `ν_j = ω_l(q_j)`.
    pub omega_l: Vec<f64>,
    /// `μ_i = ω_r(p_i)`.
    pub omega_r: Vec<f64>,
    /// `ω_s(p_i q_j) = d_ij μ_i^{1/2} ν_j^{1/2} / d`.
    pub omega_s: Matrix,
}

impl CanonicalStates {
    /// Deviation of the marginals of `ω_s` from `ω_r` and `ω_l`.
    pub fn marginal_residual(&self) -> f64 {
        max_abs_diff(&self.omega_s.row_sums(), &self.omega_r)
            .max(max_abs_diff(&self.omega_s.col_sums(), &self.omega_l))
    }
}

pub fn canonical_states(d: &DimensionMatrix, pf: &PfData) -> Result<CanonicalStates> {
    check_shape(d, pf)?;
    let omega_s = Matrix::from_fn(d.rows(), d.cols(), |i, j| {
        d.get(i, j) * pf.mu_sqrt[i] * pf.nu_sqrt[j] / pf.d
    });
    Ok(CanonicalStates {
        omega_l: pf.nu(),
        omega_r: pf.mu(),
        omega_s,
    })
}

/// `|d − Σ_ij d_ij ν_j^{1/2} μ_i^{1/2}|`.
pub fn weighted_additivity_check(d: &DimensionMatrix, pf: &PfData) -> f64 {
    let sum: f64 = d
        .as_matrix()
        .iter_indexed()
        .map(|(i, j, x)| x * pf.nu_sqrt[j] * pf.mu_sqrt[i])
        .sum();
    (pf.d - sum).abs()
}

/// Scalar coefficients of the standard solutions of the conjugate equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardSolutionWeights {
    /// `μ_i^{1/4}/ν_j^{1/4}` on the support, 0 elsewhere.
    pub r_coeffs: Matrix,
    /// `ν_j^{1/4}/μ_i^{1/4}` on the support, 0 elsewhere.
    pub rbar_coeffs: Matrix,
    /// `max_i |Σ_j (ν_j^{1/2}/μ_i^{1/2}) d_ij − d|`.
    pub row_identity_residual: f64,
    /// `max_j |Σ_i (μ_i^{1/2}/ν_j^{1/2}) d_ij − d|`.
    pub col_identity_residual: f64,
}

pub fn standard_solution_weights(d: &DimensionMatrix, pf: &PfData) -> Result<StandardSolutionWeights> {
    if !graph::is_connected(d) {
        return Err(Error::NotConnected);
    }
    check_shape(d, pf)?;
    let (m, n) = d.shape();
    let on_support = |i: usize, j: usize, v: f64| if d.get(i, j) > 0.0 { v } else { 0.0 };
    let r_coeffs = Matrix::from_fn(m, n, |i, j| {
        on_support(i, j, (pf.mu_sqrt[i] / pf.nu_sqrt[j]).sqrt())
    });
    let rbar_coeffs = Matrix::from_fn(m, n, |i, j| {
        on_support(i, j, (pf.nu_sqrt[j] / pf.mu_sqrt[i]).sqrt())
    });
    let row_identity_residual = (0..m)
        .map(|i| {
            let s: f64 = (0..n).map(|j| pf.nu_sqrt[j] / pf.mu_sqrt[i] * d.get(i, j)).sum();
            (s - pf.d).abs()
        })
        .fold(0.0, f64::max);
    let col_identity_residual = (0..n)
        .map(|j| {
            let s: f64 = (0..m).map(|i| pf.mu_sqrt[i] / pf.nu_sqrt[j] * d.get(i, j)).sum();
            (s - pf.d).abs()
        })
        .fold(0.0, f64::max);
    Ok(StandardSolutionWeights {
        r_coeffs,
        rbar_coeffs,
        row_identity_residual,
        col_identity_residual,
    })
}
