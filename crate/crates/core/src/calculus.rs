//! Composition of inclusions, Jones towers and additivity.
//!
//! For `L ⊂ N ⊂ M` with matrix dimensions `D1` (of `N ⊂ M`, m×n) and `D2`
//! (of `L ⊂ N`, n×l), the matrix dimension of `L ⊂ M` is `D1·D2`.

use serde::Serialize;

use crate::dimension::{DimensionMatrix, ValidationOptions};
use crate::error::{Error, Result};
use crate::graph;
use crate::matrix::{dot, l2_norm, max_abs_diff, Matrix};
use crate::spectral::{self, PfConfig, PfData};

/// ∞-norm tolerance for comparing Perron-Frobenius eigenvectors.
pub const EIGVEC_TOL: f64 = 1e-9;
/// Relative tolerance for declaring `c3 = c1·c2`.
pub const MULTIPLICATIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionReport {
    #[serde(rename = "D3")]
    pub d3: Matrix,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub multiplicative: bool,
    pub sufficient_condition_holds: bool,
    /// Present when both outer algebras are factors (m = l = 1).
    pub cos2_angle: Option<f64>,
    /// `‖Λ3 − Λ1·Λ2‖∞`, present when the sufficient condition holds.
    pub lambda_product_residual: Option<f64>,
}

fn check_composable(d1: &DimensionMatrix, d2: &DimensionMatrix) -> Result<()> {
    if d1.cols() != d2.rows() {
        return Err(Error::ShapeMismatch {
            expected: (d1.cols(), d2.cols()),
            got: d2.shape(),
        });
    }
    if !graph::is_connected(d1) {
        return Err(Error::OperandNotConnected(1));
    }
    if !graph::is_connected(d2) {
        return Err(Error::OperandNotConnected(2));
    }
    Ok(())
}

fn eigvec_match(upper: &PfData, lower: &PfData, tol: f64) -> bool {
    max_abs_diff(&upper.nu_sqrt, &lower.mu_sqrt) <= tol
}

/// Whether the left eigenvector of the upper inclusion equals the right
/// eigenvector of the lower one, which forces `c3 = c1·c2`.
pub fn sufficient_condition(d1: &DimensionMatrix, d2: &DimensionMatrix, tol: f64) -> Result<bool> {
    check_composable(d1, d2)?;
    let cfg = PfConfig::default();
    Ok(eigvec_match(&spectral::pf_data(d1, &cfg)?, &spectral::pf_data(d2, &cfg)?, tol))
}

/// Matrix product of two dimension matrices; entries stay 0 or ≥ 1.
pub fn product(d1: &DimensionMatrix, d2: &DimensionMatrix) -> DimensionMatrix {
    let p = d1.as_matrix().matmul(d2.as_matrix());
    DimensionMatrix::from_matrix(p, ValidationOptions::relaxed())
        .expect("product of matrices without zero rows/columns has none")
}

pub fn compose(d1: &DimensionMatrix, d2: &DimensionMatrix, tol: f64) -> Result<CompositionReport> {
    check_composable(d1, d2)?;
    let cfg = PfConfig::default();
    let pf1 = spectral::pf_data(d1, &cfg)?;
    let pf2 = spectral::pf_data(d2, &cfg)?;
    let d3 = product(d1, d2);
    // Connectedness is inherited by products of connected matrices.
    let pf3 = spectral::pf_data(&d3, &cfg)?;
    let (c1, c2, c3) = (pf1.index(), pf2.index(), pf3.index());
    let multiplicative = (c3 - c1 * c2).abs() <= MULTIPLICATIVE_TOL * c1 * c2;
    let sufficient_condition_holds = eigvec_match(&pf1, &pf2, tol);

    let cos2_angle = (d1.rows() == 1 && d2.cols() == 1).then(|| {
        let u = d1.as_matrix().row(0).to_vec();
        let v = d2.as_matrix().transpose().row(0).to_vec();
        (dot(&u, &v) / (l2_norm(&u) * l2_norm(&v))).powi(2)
    });

    let lambda_product_residual = if sufficient_condition_holds {
        let l1 = spectral::minimal_expectation(d1, &pf1)?.lambda;
        let l2 = spectral::minimal_expectation(d2, &pf2)?.lambda;
        let l3 = spectral::minimal_expectation(&d3, &pf3)?.lambda;
        Some(l3.max_abs_diff(&l1.matmul(&l2)))
    } else {
        None
    };

    Ok(CompositionReport {
        d3: d3.as_matrix().clone(),
        c1,
        c2,
        c3,
        multiplicative,
        sufficient_condition_holds,
        cos2_angle,
        lambda_product_residual,
    })
}

/// Jones tower `N ⊂ M ⊂ M_1 ⊂ …` truncated after `levels` inclusions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tower {
    /// Level k is `D` for even k and `Dᵗ` for odd k.
    pub levels: Vec<Matrix>,
    pub level_indices: Vec<f64>,
    /// Products of the per-level indices.
    pub cumulative_indices: Vec<f64>,
    /// `‖L_{k} ⋯ L_0‖²` from the composed matrices.
    pub composed_indices: Vec<f64>,
    /// Largest relative gap between the two cumulative columns.
    pub cross_check_residual: f64,
}

pub fn jones_tower(d: &DimensionMatrix, levels: usize) -> Result<Tower> {
    if !graph::is_connected(d) {
        return Err(Error::NotConnected);
    }
    let cfg = PfConfig::default();
    let dt = d.transpose();
    let mut mats = Vec::with_capacity(levels);
    let mut level_indices = Vec::with_capacity(levels);
    let mut cumulative_indices = Vec::with_capacity(levels);
    let mut composed_indices = Vec::with_capacity(levels);
    let mut composed: Option<DimensionMatrix> = None;
    let mut running = 1.0;
    let mut cross_check_residual: f64 = 0.0;
    for k in 0..levels {
        let level = if k % 2 == 0 { d } else { &dt };
        let c = spectral::pf_data(level, &cfg)?.index();
        running *= c;
        let next = match composed {
            None => level.clone(),
            Some(below) => product(level, &below),
        };
        let ck = spectral::pf_data(&next, &cfg)?.index();
        cross_check_residual = cross_check_residual.max((ck - running).abs() / running);
        mats.push(level.as_matrix().clone());
        level_indices.push(c);
        cumulative_indices.push(running);
        composed_indices.push(ck);
        composed = Some(next);
    }
    Ok(Tower {
        levels: mats,
        level_indices,
        cumulative_indices,
        composed_indices,
        cross_check_residual,
    })
}

/// `D − Σ parts`, entrywise.
///
/// Parts are plain nonnegative matrices: a summand cut by a projection in
/// the relative commutant may well have zero rows or columns.
pub fn additivity_check(d: &DimensionMatrix, parts: &[Matrix]) -> Result<Matrix> {
    let mut residual = d.as_matrix().clone();
    for p in parts {
        if p.shape() != d.shape() {
            return Err(Error::ShapeMismatch {
                expected: d.shape(),
                got: p.shape(),
            });
        }
        for (i, j, x) in p.iter_indexed() {
            residual[(i, j)] -= x;
        }
    }
    Ok(residual)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorCaseAdditivity {
    /// `d_k²/Σ_l d_l²`, the minimal-expectation weights on the non-factor side.
    pub lambda: Vec<f64>,
    /// `d²` from the Perron-Frobenius data.
    pub index: f64,
    /// `Σ_k d_k²`.
    pub sum_of_squares: f64,
}

/// When one side is a factor the index is the sum of the squared entries.
pub fn factor_case_additivity(d: &DimensionMatrix) -> Result<FactorCaseAdditivity> {
    let (m, n) = d.shape();
    if m > 1 && n > 1 {
        return Err(Error::NotFactorCase(m, n));
    }
    let entries = d.as_matrix().as_slice();
    let sum_of_squares: f64 = entries.iter().map(|x| x * x).sum();
    let lambda = entries.iter().map(|x| x * x / sum_of_squares).collect();
    let index = spectral::pf_data(d, &PfConfig::default())?.index();
    Ok(FactorCaseAdditivity {
        lambda,
        index,
        sum_of_squares,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(rows: &[&[f64]]) -> DimensionMatrix {
        DimensionMatrix::new(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn compose_row_with_column() {
        let r = compose(&dm(&[&[1.0, 1.0]]), &dm(&[&[1.0], &[1.0]]), EIGVEC_TOL).unwrap();
        assert_eq!(r.d3.to_rows(), vec![vec![2.0]]);
        assert!((r.c1 - 2.0).abs() < 1e-12 && (r.c2 - 2.0).abs() < 1e-12);
        assert!((r.c3 - 4.0).abs() < 1e-12);
        assert!(r.multiplicative && r.sufficient_condition_holds);
        assert!((r.cos2_angle.unwrap() - 1.0).abs() < 1e-12);
        assert!(r.lambda_product_residual.unwrap() < 1e-12);
    }

    #[test]
    fn compose_strictly_submultiplicative() {
        let r = compose(&dm(&[&[1.0, 1.0]]), &dm(&[&[1.0], &[2.0]]), EIGVEC_TOL).unwrap();
        assert_eq!(r.d3.to_rows(), vec![vec![3.0]]);
        assert!((r.c3 - 9.0).abs() < 1e-12);
        assert!((r.c1 * r.c2 - 10.0).abs() < 1e-12);
        assert!(!r.multiplicative && !r.sufficient_condition_holds);
        assert!((r.cos2_angle.unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(r.lambda_product_residual, None);
    }

    #[test]
    fn compose_factors() {
        let r = compose(&dm(&[&[3.0]]), &dm(&[&[2.0]]), EIGVEC_TOL).unwrap();
        assert_eq!(r.d3.to_rows(), vec![vec![6.0]]);
        assert_eq!(r.c3, 36.0);
        assert!(r.multiplicative);
    }

    #[test]
    fn compose_errors() {
        let e = compose(&dm(&[&[1.0, 1.0]]), &dm(&[&[1.0]]), EIGVEC_TOL).unwrap_err();
        assert!(matches!(e, Error::ShapeMismatch { .. }));
        let split = dm(&[&[2.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(
            compose(&split, &dm(&[&[1.0], &[1.0]]), EIGVEC_TOL),
            Err(Error::OperandNotConnected(1))
        );
        assert_eq!(
            compose(&dm(&[&[1.0, 1.0]]), &split, EIGVEC_TOL),
            Err(Error::OperandNotConnected(2))
        );
    }

    #[test]
    fn sufficient_condition_examples() {
        let row = dm(&[&[1.0, 1.0]]);
        assert!(sufficient_condition(&row, &dm(&[&[1.0], &[1.0]]), EIGVEC_TOL).unwrap());
        let d = dm(&[&[1.0, 2.0, 0.0], &[3.0, 1.0, 1.0]]);
        assert!(sufficient_condition(&d, &d.transpose(), EIGVEC_TOL).unwrap());
        assert!(!sufficient_condition(&dm(&[&[1.0, 2.0]]), &dm(&[&[1.0], &[1.0]]), EIGVEC_TOL).unwrap());
    }

    #[test]
    fn tower_examples() {
        let t = jones_tower(&dm(&[&[1.0, 1.0]]), 2).unwrap();
        assert_eq!(t.levels[1].to_rows(), vec![vec![1.0], vec![1.0]]);
        assert!((t.cumulative_indices[0] - 2.0).abs() < 1e-12);
        assert!((t.cumulative_indices[1] - 4.0).abs() < 1e-12);
        assert!(t.cross_check_residual < 1e-10);

        let t = jones_tower(&dm(&[&[2.0]]), 3).unwrap();
        assert_eq!(t.cumulative_indices, vec![4.0, 16.0, 64.0]);
        assert_eq!(t.composed_indices, vec![4.0, 16.0, 64.0]);

        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        let t = jones_tower(&dm(&[&[1.0, 1.0], &[1.0, 0.0]]), 2).unwrap();
        assert!((t.cumulative_indices[0] - phi2).abs() < 1e-10);
        assert!((t.composed_indices[1] - phi2 * phi2).abs() < 1e-9);
    }

    #[test]
    fn additivity_examples() {
        let m = |rows: &[&[f64]]| Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        let r = additivity_check(&dm(&[&[2.0]]), &[m(&[&[1.0]]), m(&[&[1.0]])]).unwrap();
        assert_eq!(r.max_abs(), 0.0);

        let cells: Vec<Matrix> = (0..4)
            .map(|k| Matrix::from_fn(2, 2, |a, b| if 2 * a + b == k { 1.0 } else { 0.0 }))
            .collect();
        let r = additivity_check(&dm(&[&[1.0, 1.0], &[1.0, 1.0]]), &cells).unwrap();
        assert_eq!(r.max_abs(), 0.0);

        let r = additivity_check(&dm(&[&[2.0, 1.0]]), &[m(&[&[1.0, 1.0]]), m(&[&[1.0, 1.0]])]).unwrap();
        assert_eq!(r.to_rows(), vec![vec![0.0, -1.0]]);

        let e = additivity_check(&dm(&[&[2.0]]), &[m(&[&[1.0, 1.0]])]).unwrap_err();
        assert!(matches!(e, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn factor_case_examples() {
        let r = factor_case_additivity(&dm(&[&[1.0, 1.0]])).unwrap();
        assert!((r.index - 2.0).abs() < 1e-12 && r.sum_of_squares == 2.0);
        assert_eq!(r.lambda, vec![0.5, 0.5]);

        let r = factor_case_additivity(&dm(&[&[1.0], &[2.0]])).unwrap();
        assert!((r.index - 5.0).abs() < 1e-10);
        assert!(max_abs_diff(&r.lambda, &[0.2, 0.8]) < 1e-15);

        let r = factor_case_additivity(&dm(&[&[3.0]])).unwrap();
        assert_eq!((r.index, r.lambda.clone()), (9.0, vec![1.0]));

        assert_eq!(
            factor_case_additivity(&dm(&[&[1.0, 1.0], &[1.0, 1.0]])),
            Err(Error::NotFactorCase(2, 2))
        );
    }
}
