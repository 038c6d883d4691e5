//! Dense complex linear algebra for small Hermitian problems.

mod eigen;
mod lu;
mod matrix;
mod vectors;

pub use eigen::{eigenvalues, eigh, operator_norm, psd_sqrt, Eigh, SpectrumReport};
pub use lu::{det, inverse, Lu};
pub use matrix::{char_poly, CMatrix, HermitianMatrix};
pub use vectors::{frame_operator, gram_matrix, VectorSystem};

use crate::C64;

/// Inner product `<x, y> = sum x_k conj(y_k)`, linear in the first slot.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}
