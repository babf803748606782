//! Connectivity of the bipartite support graph.
//!
//! Vertices are the rows (upper minimal central projections) followed by
//! the columns (lower ones); `i ~ j` whenever `d_ij > 0`. The inclusion is
//! connected exactly when this graph is, equivalently when `S Sᵗ` is an
//! irreducible square matrix.

use std::collections::VecDeque;

use crate::dimension::{DimensionMatrix, ValidationOptions};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::spectral::{self, PfConfig};

/// One connected component, with indices into the original matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub matrix: DimensionMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectedDecomposition {
    /// Ordered by smallest row index.
    pub blocks: Vec<Block>,
}

impl ConnectedDecomposition {
    pub fn is_connected(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Scalar dimension of each block.
    pub fn vector_dimension(&self, cfg: &PfConfig) -> Result<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| spectral::pf_data(&b.matrix, cfg).map(|pf| pf.d))
            .collect()
    }

    /// `max_k d_k`, which is the operator norm of the whole matrix.
    pub fn scalar_dimension(&self, cfg: &PfConfig) -> Result<f64> {
        Ok(self.vector_dimension(cfg)?.into_iter().fold(0.0, f64::max))
    }

    /// Puts the blocks back together in the original index positions.
    pub fn reassemble(&self, rows: usize, cols: usize) -> Matrix {
        let mut out = Matrix::zeros(rows, cols);
        for b in &self.blocks {
            for (bi, &i) in b.rows.iter().enumerate() {
                for (bj, &j) in b.cols.iter().enumerate() {
                    out[(i, j)] = b.matrix.get(bi, bj);
                }
            }
        }
        out
    }
}

/// Component label for every vertex; rows are `0..m`, columns `m..m+n`.
fn component_labels(d: &DimensionMatrix) -> (Vec<usize>, usize) {
    let (m, n) = d.shape();
    let mut label = vec![usize::MAX; m + n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..m + n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            let neighbours: Vec<usize> = if v < m {
                (0..n).filter(|&j| d.get(v, j) > 0.0).map(|j| m + j).collect()
            } else {
                (0..m).filter(|&i| d.get(i, v - m) > 0.0).collect()
            };
            for w in neighbours {
                if label[w] == usize::MAX {
                    label[w] = count;
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

pub fn is_connected(d: &DimensionMatrix) -> bool {
    component_labels(d).1 == 1
}

pub fn decompose_connected(d: &DimensionMatrix) -> ConnectedDecomposition {
    let (m, n) = d.shape();
    let (label, count) = component_labels(d);
    // Rows are visited first, so component labels already follow the
    // smallest row index; every component owns a row since none is empty.
    let blocks = (0..count)
        .map(|c| {
            let rows: Vec<usize> = (0..m).filter(|&i| label[i] == c).collect();
            let cols: Vec<usize> = (0..n).filter(|&j| label[m + j] == c).collect();
            let sub = Matrix::from_fn(rows.len(), cols.len(), |a, b| d.get(rows[a], cols[b]));
            let matrix = DimensionMatrix::from_matrix(sub, ValidationOptions::relaxed())
                .expect("a component of a valid matrix is valid");
            Block { rows, cols, matrix }
        })
        .collect();
    ConnectedDecomposition { blocks }
}
