use crate::error::{Error, Result};
use crate::linalg::{eigh, frame_operator, CMatrix, VectorSystem};
use crate::{tol, C64};

/// `M` vectors in `C^M` with frame operator `diag(spectrum)` and squared norms
/// `norms`, for non-increasing `spectrum` majorizing non-increasing `norms`.
///
/// Starts from `diag(spectrum)` and applies two-coordinate unitary rotations,
/// each moving one diagonal entry onto its target, until the diagonal equals
/// `norms`. With `A = W* diag(spectrum) W` the vectors are the columns of
/// `diag(spectrum)^{1/2} W`.
pub fn schur_horn_frame(spectrum: &[f64], norms: &[f64]) -> Result<VectorSystem> {
    let m = spectrum.len();
    if norms.len() != m || m == 0 {
        return Err(Error::invalid("spectrum and norms must be nonempty and of equal length"));
    }
    let scale = spectrum.iter().chain(norms).fold(1.0f64, |a, &x| a.max(x.abs()));
    let slack = tol::MAJORIZATION * scale;
    for w in [spectrum, norms] {
        if w.windows(2).any(|p| p[1] > p[0] + slack) {
            return Err(Error::invalid("sequences must be non-increasing"));
        }
        if w.iter().any(|&x| !x.is_finite() || x < -slack) {
            return Err(Error::invalid("entries must be finite and non-negative"));
        }
    }
    let (mut ps, mut pn) = (0.0, 0.0);
    for k in 0..m {
        ps += spectrum[k];
        pn += norms[k];
        if pn > ps + slack * (k + 1) as f64 {
            return Err(Error::invalid(format!("majorization fails at position {}", k + 1)));
        }
    }
    if (ps - pn).abs() > slack * m as f64 {
        return Err(Error::invalid("spectrum and norms have different sums"));
    }

    let mut a = CMatrix::diag(spectrum);
    let mut w = CMatrix::identity(m);
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-14 * scale;
    for _ in 0..m {
        let diag: Vec<f64> = (0..m).map(|i| a[(i, i)].re).collect();
        let Some(j) = (0..m).rev().find(|&i| diag[i] > norms[i] && !close(diag[i], norms[i])) else {
            break;
        };
        let Some(k) = (j + 1..m).find(|&i| diag[i] < norms[i] && !close(diag[i], norms[i])) else {
            break;
        };
        let shift = (diag[j] - norms[j]).min(norms[k] - diag[k]);
        let gap = diag[j] - diag[k];
        let c2 = ((diag[j] - shift - diag[k]) / gap).clamp(0.0, 1.0);
        let (c, s) = (c2.sqrt(), (1.0 - c2).sqrt());
        let b = a[(j, k)];
        let phase = if b.norm() > 0.0 {
            C64::from_polar(1.0, std::f64::consts::FRAC_PI_2 - b.arg())
        } else {
            C64::new(1.0, 0.0)
        };
        // Columns j and k of the rotation: (c, s e^{i phi}) and (-s, c e^{i phi}).
        let mut u = CMatrix::identity(m);
        u[(j, j)] = C64::new(c, 0.0);
        u[(k, j)] = phase * s;
        u[(j, k)] = C64::new(-s, 0.0);
        u[(k, k)] = phase * c;
        a = u.adjoint().matmul(&a).matmul(&u);
        w = w.matmul(&u);
        a[(j, j)] = C64::new(diag[j] - shift, 0.0);
        a[(k, k)] = C64::new(diag[k] + shift, 0.0);
    }
    let vectors = (0..m)
        .map(|i| (0..m).map(|r| w[(r, i)] * spectrum[r].max(0.0).sqrt()).collect())
        .collect();
    VectorSystem::new(m, vectors)
}

/// Completes a Bessel system with bound one to a Parseval frame of `C^{d+N}`
/// by padding the vectors with zeros and appending `d + N` vectors of equal
/// squared norm `C >= eps`, `N` minimal.
pub fn parseval_completion(v: &VectorSystem, eps: f64) -> Result<VectorSystem> {
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if v.norms_sqr().iter().any(|&n| n < eps - tol::BESSEL_ONE) {
        return Err(Error::invalid("a vector has squared norm below eps"));
    }
    let d = v.dim();
    let e = eigh(&frame_operator(v));
    if e.max() > 1.0 + tol::BESSEL_ONE {
        return Err(Error::invalid(format!("Bessel bound {} exceeds one", e.max())));
    }
    let lambdas: Vec<f64> = e.values.iter().map(|&x| x.clamp(0.0, 1.0)).collect();
    let tau: f64 = lambdas.iter().map(|l| 1.0 - l).sum();
    let mut n = ((eps * d as f64 - tau) / (1.0 - eps)).ceil().max(0.0) as usize;
    let enough = |n: usize| (n as f64 + tau) / ((d + n) as f64) >= eps - 1e-12;
    while !enough(n) {
        n += 1;
    }
    while n > 0 && enough(n - 1) {
        n -= 1;
    }
    if n == 0 && tau <= 0.0 {
        n = 1;
    }
    let total = d + n;
    let c = (n as f64 + tau) / total as f64;
    // Target spectrum: N ones, then 1 - lambda in increasing lambda order.
    let mut spectrum = vec![1.0; n];
    spectrum.extend(lambdas.iter().rev().map(|l| 1.0 - l));
    let norms = vec![c; total];
    let raw = schur_horn_frame(&spectrum, &norms)?;
    // Map coordinate slots to eigenvectors: slots 0..n are the new axes,
    // slot n + t is the eigenvector with the (t+1)-th smallest eigenvalue.
    let basis = |slot: usize| -> Vec<C64> {
        let mut b = vec![C64::new(0.0, 0.0); total];
        if slot < n {
            b[d + slot] = C64::new(1.0, 0.0);
        } else {
            let col = e.vector(d - 1 - (slot - n));
            b[..d].copy_from_slice(&col);
        }
        b
    };
    let bases: Vec<Vec<C64>> = (0..total).map(basis).collect();
    let mut vectors: Vec<Vec<C64>> = v
        .vectors()
        .iter()
        .map(|u| {
            let mut p = u.clone();
            p.resize(total, C64::new(0.0, 0.0));
            p
        })
        .collect();
    for x in raw.vectors() {
        let mut out = vec![C64::new(0.0, 0.0); total];
        for (coef, b) in x.iter().zip(&bases) {
            for (o, bb) in out.iter_mut().zip(b) {
                *o += coef * bb;
            }
        }
        vectors.push(out);
    }
    VectorSystem::new(total, vectors)
}
