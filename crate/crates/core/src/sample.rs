//! Seeded generators for random connected dimension matrices and Bratteli
//! diagrams, used by property campaigns.

use rand::Rng;

use crate::dimension::DimensionMatrix;
use crate::graph;
use crate::matrix::Matrix;
use crate::multimatrix::{self, BratteliDiagram};

/// Random connected integer matrix with `1..=max_rows` rows,
/// `1..=max_cols` columns and entries in `0..=max_entry`, by rejection.
pub fn connected_integer_matrix<R: Rng>(
    rng: &mut R,
    max_rows: usize,
    max_cols: usize,
    max_entry: u32,
) -> DimensionMatrix {
    let m = rng.random_range(1..=max_rows);
    let n = rng.random_range(1..=max_cols);
    connected_integer_matrix_of_shape(rng, m, n, max_entry)
}

/// Same as [`connected_integer_matrix`] with a fixed shape.
pub fn connected_integer_matrix_of_shape<R: Rng>(rng: &mut R, m: usize, n: usize, max_entry: u32) -> DimensionMatrix {
    assert!(max_entry >= 1);
    loop {
        let raw = Matrix::from_fn(m, n, |_, _| rng.random_range(0..=max_entry) as f64);
        if let Ok(d) = DimensionMatrix::from_matrix(raw, Default::default()) {
            if graph::is_connected(&d) {
                return d;
            }
        }
    }
}

/// Random connected diagram with `β_j ∈ 1..=max_beta` and `α = Dβ`.
pub fn connected_bratteli<R: Rng>(
    rng: &mut R,
    max_rows: usize,
    max_cols: usize,
    max_entry: u32,
    max_beta: u64,
) -> BratteliDiagram {
    let d = connected_integer_matrix(rng, max_rows, max_cols, max_entry);
    let beta: Vec<u64> = (0..d.cols()).map(|_| rng.random_range(1..=max_beta)).collect();
    let alpha = (0..d.rows())
        .map(|i| (0..d.cols()).map(|j| d.get(i, j) as u64 * beta[j]).sum())
        .collect();
    multimatrix::validate_bratteli(d, beta, alpha).expect("alpha = D beta by construction")
}
