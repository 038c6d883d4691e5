use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::RealPolynomial;
use crate::{tol, C64};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must all have length equal to the row count"));
        }
        Ok(Self::from_fn(n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix must be square"));
        }
        let data: Vec<C64> = rows.into_iter().flatten().collect();
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(CMatrix { n, data })
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    /// Principal compression onto the coordinates in `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (i..self.n).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol)
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `[[a, b], [c, d]]` assembled from four equally sized blocks.
    pub fn block2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
        let n = a.n;
        CMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => c[(i - n, j)],
            (false, false) => d[(i - n, j - n)],
        })
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// A complex matrix that equals its conjugate transpose (checked at construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::MatrixJson", into = "crate::io::MatrixJson")]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates Hermitian symmetry within `tol::HERMITIAN` and symmetrizes the
    /// rounding residue away.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if !m.is_finite() {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        if !m.is_hermitian(tol::HERMITIAN) {
            return Err(Error::invalid("matrix is not Hermitian"));
        }
        Ok(Self::symmetrized(&m))
    }

    /// `(M + M*) / 2` without any check; for internal use on matrices that are
    /// Hermitian by construction.
    pub(crate) fn symmetrized(m: &CMatrix) -> Self {
        let n = m.dim();
        let mut out = CMatrix::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        for i in 0..n {
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
        }
        HermitianMatrix(out)
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(CMatrix::from_real(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(CMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(n))
    }

    pub fn diag(values: &[f64]) -> Self {
        HermitianMatrix(CMatrix::diag(values))
    }

    /// `u u*`.
    pub fn rank_one(u: &[C64]) -> Self {
        HermitianMatrix(CMatrix::from_fn(u.len(), |i, j| u[i] * u[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.sub(&other.0))
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale_real(s))
    }

    pub fn principal(&self, idx: &[usize]) -> HermitianMatrix {
        HermitianMatrix(self.0.principal(idx))
    }

    pub fn sum<'a>(dim: usize, mats: impl IntoIterator<Item = &'a HermitianMatrix>) -> Self {
        mats.into_iter()
            .fold(HermitianMatrix::zeros(dim), |acc, m| acc.add(m))
    }

    /// Block-diagonal matrix with the given diagonal blocks.
    pub fn block_diag(blocks: &[HermitianMatrix]) -> HermitianMatrix {
        let n: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut out = CMatrix::zeros(n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    out[(off + i, off + j)] = b.get(i, j);
                }
            }
            off += b.dim();
        }
        HermitianMatrix(out)
    }
}

/// `det(zI - A)` by the Faddeev–LeVerrier recurrence.
///
/// `M_0 = 0`, `M_k = A M_{k-1} + c_{d-k+1} I`, `c_{d-k} = -tr(A M_k) / k`.
/// Independent of the eigensolver, so the two can cross-check each other.
pub fn char_poly(a: &HermitianMatrix) -> RealPolynomial {
    let d = a.dim();
    let am = a.as_matrix();
    let mut coeffs = vec![0.0; d + 1];
    coeffs[d] = 1.0;
    let mut m = CMatrix::zeros(d);
    for k in 1..=d {
        let mut next = am.matmul(&m);
        let c_prev = coeffs[d + 1 - k];
        for i in 0..d {
            next[(i, i)] += C64::new(c_prev, 0.0);
        }
        let t = am.matmul(&next).trace();
        coeffs[d - k] = -t.re / k as f64;
        m = next;
    }
    RealPolynomial::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_small_cases() {
        assert_eq!(char_poly(&HermitianMatrix::zeros(2)).coeffs(), &[0.0, 0.0, 1.0]);
        let p = char_poly(&HermitianMatrix::diag(&[1.0, 0.0]));
        assert_eq!(p.coeffs(), &[0.0, -1.0, 1.0]);
        let half = HermitianMatrix::from_real(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let p = char_poly(&half);
        assert!(p.coeffs()[0].abs() < 1e-15);
        assert!((p.coeffs()[1] + 1.0).abs() < 1e-15);
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::InvalidInput(_))));
        assert!(HermitianMatrix::new(CMatrix::zeros(0)).is_err());
    }

    #[test]
    fn char_poly_complex_entries() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = CMatrix::from_rows(vec![
            vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        ])
        .unwrap();
        let p = char_poly(&HermitianMatrix::new(m).unwrap());
        assert!((p.coeffs()[0] - 3.0).abs() < 1e-14);
        assert!((p.coeffs()[1] + 4.0).abs() < 1e-14);
    }
}
