//! Frame bounds, Naimark complements, biorthogonal duals, Schur–Horn
//! constructions and the Riesz partition pipelines built on Weaver partitions.

mod riesz;
mod schur_horn;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, frame_operator, gram_matrix, inner, CMatrix, HermitianMatrix, VectorSystem};
use crate::partition::{is_parseval, Partition};
use crate::{tol, C64};

pub use riesz::{
    bt_partition, feichtinger_partition, fourier_partition, r_epsilon_partition, FrameConfig, RPolicy,
};
pub use schur_horn::{parseval_completion, schur_horn_frame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub riesz_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub riesz_upper: Option<f64>,
}

/// Extreme eigenvalues of the frame operator and, when `riesz` is set, of the
/// Gram matrix.
pub fn frame_bounds(v: &VectorSystem, riesz: bool) -> FrameBounds {
    let e = eigh(&frame_operator(v));
    let (riesz_lower, riesz_upper) = if riesz && !v.is_empty() {
        let (l, u) = riesz_bounds(v);
        (Some(l), Some(u))
    } else {
        (None, None)
    };
    FrameBounds {
        lower: e.min().max(0.0),
        upper: e.max().max(0.0),
        riesz_lower,
        riesz_upper,
    }
}

/// `(lambda_min, lambda_max)` of the Gram matrix. `(1, 1)` for an empty system.
pub fn riesz_bounds(v: &VectorSystem) -> (f64, f64) {
    if v.is_empty() {
        return (1.0, 1.0);
    }
    let e = eigh(&gram_matrix(v));
    (e.min().max(0.0), e.max())
}

/// Riesz bounds of the subsystem indexed by `idx`.
pub fn subsystem_riesz(v: &VectorSystem, idx: &[usize]) -> (f64, f64) {
    match v.subset(idx) {
        Some(s) => riesz_bounds(&s),
        None => (1.0, 1.0),
    }
}

/// Partition together with Riesz bounds of every block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszPartitionCertificate {
    #[serde(flatten)]
    pub partition: Partition,
    /// `(lower, upper)` Riesz bounds per block.
    pub per_block_riesz: Vec<(f64, f64)>,
    /// `(lower, upper)` bounds the construction promises for every block.
    pub guaranteed: (f64, f64),
    pub epsilon: f64,
    /// Blocks used by the first Weaver partition of the pipeline.
    pub outer_r: usize,
    /// Smallest block count for which the closed-form bound alone suffices.
    pub required_r: usize,
    /// Explicit sufficient block count from the simplified estimate, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sufficient_r: Option<usize>,
}

impl RieszPartitionCertificate {
    pub fn worst_lower(&self) -> f64 {
        self.per_block_riesz.iter().map(|b| b.0).fold(f64::INFINITY, f64::min)
    }

    pub fn worst_upper(&self) -> f64 {
        self.per_block_riesz.iter().map(|b| b.1).fold(0.0, f64::max)
    }

    pub fn meets_guarantee(&self) -> bool {
        self.worst_lower() >= self.guaranteed.0 - tol::CERTIFICATE
            && self.worst_upper() <= self.guaranteed.1 + tol::CERTIFICATE
    }
}

/// Partition from a list of nonempty blocks, sorted by smallest index.
pub(crate) fn compact_partition(m: usize, mut blocks: Vec<Vec<usize>>) -> Result<Partition> {
    blocks.retain(|b| !b.is_empty());
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort();
    let mut assignment = vec![usize::MAX; m];
    for (k, b) in blocks.iter().enumerate() {
        for &i in b {
            assignment[i] = k;
        }
    }
    if assignment.iter().any(|&k| k == usize::MAX) {
        return Err(Error::Internal("blocks do not cover every index".into()));
    }
    Partition::new(blocks.len().max(1), assignment)
}

fn require_parseval(v: &VectorSystem) -> Result<()> {
    if !is_parseval(v) {
        return Err(Error::invalid("system is not a Parseval frame"));
    }
    Ok(())
}

/// Columns of `I_m - G` for the Gram matrix `G` of a Parseval frame: a
/// Parseval frame for the orthogonal complement of its Naimark embedding.
pub fn naimark_complement(v: &VectorSystem) -> Result<VectorSystem> {
    require_parseval(v)?;
    let m = v.len();
    let g = gram_matrix(v);
    let c = HermitianMatrix::identity(m).sub(&g);
    VectorSystem::columns_of(c.as_matrix())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementCheck {
    /// `max |Gram_J(V) + Gram_J(W) - I|`.
    pub identity_error: f64,
    /// `lambda_max(Gram_J(V))`.
    pub bessel: f64,
    /// `lambda_min(Gram_J(W))`.
    pub complement_riesz_lower: f64,
    pub passed: bool,
}

/// Checks that `{u_i}_J` is Bessel with bound `1 - delta` exactly when the
/// complement `{w_i}_J` is Riesz with lower bound `delta`.
pub fn bessel_riesz_complement_check(v: &VectorSystem, j: &[usize], delta: f64) -> Result<ComplementCheck> {
    let w = naimark_complement(v)?;
    if j.iter().any(|&i| i >= v.len()) {
        return Err(Error::invalid("subset index out of range"));
    }
    let (Some(vj), Some(wj)) = (v.subset(j), w.subset(j)) else {
        return Ok(ComplementCheck {
            identity_error: 0.0,
            bessel: 0.0,
            complement_riesz_lower: 1.0,
            passed: true,
        });
    };
    let gv = gram_matrix(&vj);
    let gw = gram_matrix(&wj);
    let identity_error = gv.add(&gw).sub(&HermitianMatrix::identity(j.len())).as_matrix().max_abs();
    let bessel = eigh(&gv).max();
    let lower = eigh(&gw).min();
    let slack = 1e-9;
    let bessel_side = bessel <= 1.0 - delta + slack;
    let riesz_side = lower >= delta - slack;
    let consistent = (lower - (1.0 - bessel)).abs() <= slack;
    Ok(ComplementCheck {
        identity_error,
        bessel,
        complement_riesz_lower: lower,
        passed: identity_error <= 1e-10 && bessel_side == riesz_side && consistent,
    })
}

/// Biorthogonal system `u*_i = sum_j (G^-1)_{ji} u_j` of the subsystem `J`
/// inside its own span.
pub fn dual_riesz_system(v: &VectorSystem, j: &[usize]) -> Result<VectorSystem> {
    if j.iter().any(|&i| i >= v.len()) {
        return Err(Error::invalid("subset index out of range"));
    }
    let sub = v.subset(j).ok_or_else(|| Error::invalid("empty subset has no dual"))?;
    let e = eigh(&gram_matrix(&sub));
    let condition = if e.min() > 0.0 { e.max() / e.min() } else { f64::INFINITY };
    if condition > tol::GRAM_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let ginv = e.apply(|x| 1.0 / x);
    let n = j.len();
    let us = sub.vectors();
    let duals = (0..n)
        .map(|i| {
            let mut out = vec![C64::new(0.0, 0.0); v.dim()];
            for (l, u) in us.iter().enumerate() {
                let c = ginv.get(l, i);
                for (o, x) in out.iter_mut().zip(u) {
                    *o += c * x;
                }
            }
            out
        })
        .collect();
    VectorSystem::new(v.dim(), duals)
}

/// `max |<u_i, u*_j> - delta_ij|`.
pub fn biorthogonality_error(v: &VectorSystem, dual: &VectorSystem) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, u) in v.vectors().iter().enumerate() {
        for (j, w) in dual.vectors().iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(u, w) - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Gram matrix of the exponentials `e^{2 pi i n t}` restricted to a union of
/// intervals, `n = -N..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierGram {
    pub intervals: Vec<(f64, f64)>,
    pub frequencies: Vec<i64>,
    /// Entry `(a, b)` is `<phi_{n_a}, phi_{n_b}>`.
    pub gram: HermitianMatrix,
}

impl FourierGram {
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Vectors `u_a` with `<u_b, u_a> = <phi_{n_b}, phi_{n_a}>`, in coordinates of
    /// the range of the Gram matrix.
    pub fn realize(&self) -> Result<VectorSystem> {
        let g = self.gram.as_matrix();
        let n = g.dim();
        let transposed = HermitianMatrix::new(CMatrix::from_fn(n, |i, j| g[(j, i)]))?;
        let root = eigh(&transposed).apply(|x| x.max(0.0).sqrt());
        VectorSystem::columns_of(root.as_matrix())?
            .reduce_to_span()
            .ok_or_else(|| Error::invalid("empty exponential system"))
    }
}

pub fn fourier_frame_gram(intervals: &[(f64, f64)], n: usize) -> Result<FourierGram> {
    if n == 0 {
        return Err(Error::invalid("N must be at least one"));
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    for &(a, b) in &sorted {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::invalid(format!("interval [{a}, {b}] is not a proper subinterval of [0, 1]")));
        }
    }
    if sorted.is_empty() {
        return Err(Error::invalid("at least one interval is required"));
    }
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::invalid("intervals overlap"));
        }
    }
    let freqs: Vec<i64> = (-(n as i64)..=n as i64).collect();
    let two_pi = 2.0 * std::f64::consts::PI;
    let entry = |kappa: i64| -> C64 {
        if kappa == 0 {
            return C64::new(sorted.iter().map(|(a, b)| b - a).sum(), 0.0);
        }
        let k = kappa as f64;
        let denom = C64::new(0.0, two_pi * k);
        sorted
            .iter()
            .map(|&(a, b)| (C64::from_polar(1.0, two_pi * k * b) - C64::from_polar(1.0, two_pi * k * a)) / denom)
            .sum()
    };
    let size = freqs.len();
    let gram = HermitianMatrix::new(CMatrix::from_fn(size, |i, j| entry(freqs[i] - freqs[j])))?;
    Ok(FourierGram {
        intervals: sorted,
        frequencies: freqs,
        gram,
    })
}
