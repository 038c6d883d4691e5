use serde::{Deserialize, Serialize};

use super::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};
use crate::{tol, C64};

/// Eigenvalues (non-increasing) and a residual `max ||A v - lambda v||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub residual: f64,
}

/// Full eigendecomposition `A = V diag(values) V*`, values non-increasing,
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(f(values)) V*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        let m = CMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fv[k] * v[(j, k)].conj()).sum()
        });
        HermitianMatrix::symmetrized(&m)
    }
}

/// Cyclic Jacobi with complex rotations.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary and
/// then applies the real symmetric Jacobi rotation, so `A <- G* A G` with
/// `G = diag(1, conj(e^{i phi})) R`.
pub fn eigh(a: &HermitianMatrix) -> Eigh {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius();
    if scale == 0.0 || n == 1 {
        return sorted(m, v);
    }
    let threshold = tol::JACOBI_OFFDIAG * scale;
    for _sweep in 0..tol::JACOBI_MAX_SWEEPS {
        if off_diagonal(&m) < threshold {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    sorted(m, v)
}

fn off_diagonal(m: &CMatrix) -> f64 {
    let n = m.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = m.dim();
    let b = m[(p, q)];
    let g = b.norm();
    if g == 0.0 {
        return;
    }
    let a = m[(p, p)].re;
    let c = m[(q, q)].re;
    // Negligible relative to both diagonal entries: zero it outright.
    if g < 1e-300 || (a.abs() + c.abs() > 0.0 && g <= f64::EPSILON * 1e-3 * (a.abs() + c.abs())) {
        m[(p, q)] = C64::new(0.0, 0.0);
        m[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase_conj = (b / g).conj();
    let theta = (c - a) / (2.0 * g);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;
    let g_pp = C64::new(cs, 0.0);
    let g_pq = C64::new(sn, 0.0);
    let g_qp = phase_conj * (-sn);
    let g_qq = phase_conj * cs;

    for i in 0..n {
        let mip = m[(i, p)];
        let miq = m[(i, q)];
        m[(i, p)] = mip * g_pp + miq * g_qp;
        m[(i, q)] = mip * g_pq + miq * g_qq;
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * g_pp + viq * g_qp;
        v[(i, q)] = vip * g_pq + viq * g_qq;
    }
    for j in 0..n {
        let mpj = m[(p, j)];
        let mqj = m[(q, j)];
        m[(p, j)] = g_pp.conj() * mpj + g_qp.conj() * mqj;
        m[(q, j)] = g_pq.conj() * mpj + g_qq.conj() * mqj;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(a - t * g, 0.0);
    m[(q, q)] = C64::new(c + t * g, 0.0);
}

fn sorted(m: CMatrix, v: CMatrix) -> Eigh {
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Eigh { values, vectors }
}

/// All eigenvalues, non-increasing, plus the residual of the computed pairs.
pub fn eigenvalues(a: &HermitianMatrix) -> Result<SpectrumReport> {
    if a.dim() == 0 {
        return Err(Error::invalid("dimension zero"));
    }
    let e = eigh(a);
    let am = a.as_matrix();
    let mut residual: f64 = 0.0;
    for (k, &lambda) in e.values.iter().enumerate() {
        let x = e.vector(k);
        let ax = am.mul_vec(&x);
        let r: f64 = ax
            .iter()
            .zip(&x)
            .map(|(y, xi)| (y - xi * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
    }
    Ok(SpectrumReport {
        eigenvalues: e.values,
        residual,
    })
}

/// Largest singular value. Hermitian input takes the max |eigenvalue| route;
/// anything else goes through `A* A`.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.dim() == 0 {
        return 0.0;
    }
    if a.is_hermitian(tol::HERMITIAN * (1.0 + a.max_abs())) {
        let e = eigh(&HermitianMatrix::symmetrized(a));
        e.max().abs().max(e.min().abs())
    } else {
        let ata = HermitianMatrix::symmetrized(&a.adjoint().matmul(a));
        eigh(&ata).max().max(0.0).sqrt()
    }
}

/// Principal square root of a PSD matrix. Eigenvalues in `[-1e-10, 0)` are
/// clamped to zero.
pub fn psd_sqrt(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eigh(a);
    let min = e.min();
    if min < -tol::PSD_CLAMP {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(e.apply(|x| x.max(0.0).sqrt()))
}
