//! Minimal index and dimension calculus for inclusions of von Neumann
//! algebras with finite-dimensional centers.
//!
//! A connected inclusion `N ⊂ M` is described numerically by its matrix
//! dimension `D` (rows: minimal central projections of `M`, columns: those
//! of `N`). From `D` alone this crate computes the minimal index `‖D‖²`,
//! the Perron-Frobenius eigenvectors, the minimal expectation weights, the
//! canonical states and, for multi-matrix inclusions, the Markov trace and
//! super-extremality. [`oracle`] minimises the index functional directly to
//! cross-check the closed form.

pub mod calculus;
pub mod classify;
pub mod dimension;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod multimatrix;
pub mod oracle;
pub mod sample;
pub mod spectral;

pub use classify::{classify_index, IndexClass};
pub use dimension::{validate_dimension_matrix, DimensionMatrix, ValidationOptions};
pub use error::{Error, Result};
pub use graph::{decompose_connected, is_connected, ConnectedDecomposition};
pub use matrix::Matrix;
pub use multimatrix::{validate_bratteli, BratteliDiagram};
pub use spectral::{pf_data, PfConfig, PfData};
