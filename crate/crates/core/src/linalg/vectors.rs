use serde::{Deserialize, Serialize};

use super::{eigh, inner, norm_sqr, CMatrix, HermitianMatrix};
use crate::error::{Error, Result};
use crate::C64;

/// Ordered family of `m >= 1` vectors in `C^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::VectorSystemJson", into = "crate::io::VectorSystemJson")]
pub struct VectorSystem {
    dim: usize,
    vectors: Vec<Vec<C64>>,
}

impl VectorSystem {
    pub fn new(dim: usize, vectors: Vec<Vec<C64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("vector dimension must be positive"));
        }
        if vectors.is_empty() {
            return Err(Error::invalid("vector system must contain at least one vector"));
        }
        if let Some(i) = vectors.iter().position(|v| v.len() != dim) {
            return Err(Error::invalid(format!("vector {i} does not have length {dim}")));
        }
        if vectors
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("vector entries must be finite"));
        }
        Ok(VectorSystem { dim, vectors })
    }

    pub fn from_real(vectors: &[Vec<f64>]) -> Result<Self> {
        let dim = vectors.first().map_or(0, |v| v.len());
        let vs = vectors
            .iter()
            .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::new(dim, vs)
    }

    /// Three vectors in R^2 at 120 degrees with squared norm 2/3; a Parseval frame.
    pub fn mercedes_benz() -> Self {
        let r = (2.0f64 / 3.0).sqrt();
        let vectors = (0..3)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                vec![C64::new(r * t.cos(), 0.0), C64::new(r * t.sin(), 0.0)]
            })
            .collect();
        VectorSystem { dim: 2, vectors }
    }

    /// Columns of a matrix as a system in `C^n`.
    pub fn columns_of(m: &CMatrix) -> Result<Self> {
        Self::new(m.dim(), (0..m.dim()).map(|j| m.column(j)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[C64] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn norms_sqr(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| norm_sqr(v)).collect()
    }

    pub fn max_norm_sqr(&self) -> f64 {
        self.norms_sqr().into_iter().fold(0.0, f64::max)
    }

    /// Subsystem indexed by `idx` (in that order). `None` when `idx` is empty.
    pub fn subset(&self, idx: &[usize]) -> Option<VectorSystem> {
        if idx.is_empty() {
            return None;
        }
        Some(VectorSystem {
            dim: self.dim,
            vectors: idx.iter().map(|&i| self.vectors[i].clone()).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> VectorSystem {
        VectorSystem {
            dim: self.dim,
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|z| z * s).collect())
                .collect(),
        }
    }

    /// Applies `m` to every vector.
    pub fn mapped(&self, m: &CMatrix) -> VectorSystem {
        VectorSystem {
            dim: m.dim(),
            vectors: self.vectors.iter().map(|v| m.mul_vec(v)).collect(),
        }
    }

    /// Appends `extra` (same ambient dimension).
    pub fn extended(&self, extra: &[Vec<C64>]) -> Result<VectorSystem> {
        let mut vectors = self.vectors.clone();
        vectors.extend_from_slice(extra);
        Self::new(self.dim, vectors)
    }

    /// Coordinates of the system with respect to an orthonormal basis of the
    /// range of its frame operator. Inner products are preserved, so Gram
    /// matrices and all partition norms are unchanged. `None` if every vector
    /// is (numerically) zero.
    pub fn reduce_to_span(&self) -> Option<VectorSystem> {
        let e = eigh(&frame_operator(self));
        let top = e.max();
        if top <= 1e-300 {
            return None;
        }
        let keep: Vec<usize> = (0..self.dim)
            .filter(|&k| e.values[k] > 1e-9 * top)
            .collect();
        let basis: Vec<Vec<C64>> = keep.iter().map(|&k| e.vector(k)).collect();
        let vectors = self
            .vectors
            .iter()
            .map(|v| basis.iter().map(|b| inner(v, b)).collect())
            .collect();
        Some(VectorSystem {
            dim: keep.len(),
            vectors,
        })
    }
}

/// `S = sum_i u_i u_i*`.
pub fn frame_operator(v: &VectorSystem) -> HermitianMatrix {
    let d = v.dim();
    let mut s = CMatrix::zeros(d);
    for u in v.vectors() {
        for i in 0..d {
            if u[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                s[(i, j)] += u[i] * u[j].conj();
            }
        }
    }
    HermitianMatrix::symmetrized(&s)
}

/// `G_ij = <u_j, u_i>`.
pub fn gram_matrix(v: &VectorSystem) -> HermitianMatrix {
    let us = v.vectors();
    HermitianMatrix::symmetrized(&CMatrix::from_fn(us.len(), |i, j| inner(&us[j], &us[i])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator_norm;

    fn assert_matrix(m: &HermitianMatrix, expected: &[Vec<f64>], tol: f64) {
        for (i, row) in expected.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert!((m.get(i, j) - C64::new(x, 0.0)).norm() <= tol, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn frame_operator_examples() {
        let basis = VectorSystem::from_real(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_matrix(&frame_operator(&basis), &[vec![1.0, 0.0], vec![0.0, 1.0]], 0.0);
        let rep = VectorSystem::from_real(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_matrix(&frame_operator(&rep), &[vec![2.0, 0.0], vec![0.0, 0.0]], 0.0);
        assert_matrix(&gram_matrix(&rep), &[vec![1.0, 1.0], vec![1.0, 1.0]], 0.0);
        let mb = VectorSystem::mercedes_benz();
        assert_matrix(&frame_operator(&mb), &[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-15);
    }

    #[test]
    fn mercedes_benz_gram() {
        let g = gram_matrix(&VectorSystem::mercedes_benz());
        let third = 1.0 / 3.0;
        assert_matrix(
            &g,
            &[
                vec![2.0 * third, -third, -third],
                vec![-third, 2.0 * third, -third],
                vec![-third, -third, 2.0 * third],
            ],
            1e-15,
        );
        assert!((operator_norm(g.as_matrix()) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gram_orthonormal_pair_is_identity() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = VectorSystem::new(
            2,
            vec![
                vec![C64::new(h, 0.0), C64::new(0.0, h)],
                vec![C64::new(h, 0.0), C64::new(0.0, -h)],
            ],
        )
        .unwrap();
        assert_matrix(&gram_matrix(&v), &[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-15);
    }

    #[test]
    fn validation() {
        assert!(VectorSystem::new(0, vec![vec![]]).is_err());
        assert!(VectorSystem::new(2, vec![]).is_err());
        assert!(VectorSystem::new(2, vec![vec![C64::new(1.0, 0.0)]]).is_err());
        assert!(VectorSystem::new(1, vec![vec![C64::new(f64::NAN, 0.0)]]).is_err());
    }

    #[test]
    fn reduce_to_span_preserves_gram() {
        let v = VectorSystem::from_real(&[
            vec![1.0, 1.0, 0.0],
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let r = v.reduce_to_span().unwrap();
        assert_eq!(r.dim(), 1);
        let (g0, g1) = (gram_matrix(&v), gram_matrix(&r));
        for i in 0..3 {
            for j in 0..3 {
                assert!((g0.get(i, j) - g1.get(i, j)).norm() < 1e-14);
            }
        }
        let zero = VectorSystem::from_real(&[vec![0.0, 0.0]]).unwrap();
        assert!(zero.reduce_to_span().is_none());
    }
}
