//! JSON shapes for matrices, vector systems and polynomials, plus a writer
//! that keeps 17 significant digits for every float.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix, VectorSystem};
use crate::poly::RealPolynomial;
use crate::C64;

/// `{"dim": d, "entries": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

/// `{"dim": d, "vectors": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSystemJson {
    pub dim: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

/// `{"coeffs": [c0, c1, ...]}`, ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub coeffs: Vec<f64>,
}

fn to_c(z: &[f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

fn from_c(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

impl MatrixJson {
    /// General square matrix (no Hermitian check).
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.dim {
            return Err(Error::invalid(format!(
                "matrix declares dim {} but has {} rows",
                self.dim,
                self.entries.len()
            )));
        }
        if self.dim == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        CMatrix::from_rows(
            self.entries
                .iter()
                .map(|row| row.iter().map(to_c).collect())
                .collect(),
        )
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixJson {
            dim: m.dim(),
            entries: m.rows().iter().map(|r| r.iter().map(from_c).collect()).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        HermitianMatrix::new(j.to_matrix()?)
    }
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(h: HermitianMatrix) -> Self {
        MatrixJson::from_matrix(h.as_matrix())
    }
}

impl TryFrom<VectorSystemJson> for VectorSystem {
    type Error = Error;

    fn try_from(j: VectorSystemJson) -> Result<Self> {
        VectorSystem::new(
            j.dim,
            j.vectors
                .iter()
                .map(|v| v.iter().map(to_c).collect())
                .collect(),
        )
    }
}

impl From<VectorSystem> for VectorSystemJson {
    fn from(v: VectorSystem) -> Self {
        VectorSystemJson {
            dim: v.dim(),
            vectors: v
                .vectors()
                .iter()
                .map(|u| u.iter().map(from_c).collect())
                .collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for RealPolynomial {
    type Error = Error;

    fn try_from(j: PolynomialJson) -> Result<Self> {
        if j.coeffs.is_empty() || j.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("polynomial coefficients must be finite and non-empty"));
        }
        Ok(RealPolynomial::new(j.coeffs))
    }
}

impl From<RealPolynomial> for PolynomialJson {
    fn from(p: RealPolynomial) -> Self {
        PolynomialJson {
            coeffs: p.coeffs().to_vec(),
        }
    }
}

/// Compact JSON formatter printing floats as `{:.16e}` (17 significant digits).
#[derive(Debug, Default, Clone, Copy)]
pub struct PreciseFormatter;

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
}
