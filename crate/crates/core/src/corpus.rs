//! Random instance generators. Every generator draws only from the supplied
//! RNG, so a seeded RNG reproduces the same instances.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{eigh, frame_operator, CMatrix, HermitianMatrix, VectorSystem};
use crate::mixed::{MatrixTuple, RandomRankOneModel};
use crate::paving::reflection_dilation;
use crate::{linalg, C64};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    (0..d).map(|_| gaussian(rng)).collect()
}

/// Gram–Schmidt (applied twice) on columns drawn from `draw`, redrawing
/// nearly dependent ones.
fn orthonormal_columns<R: Rng + ?Sized>(rng: &mut R, n: usize, mut draw: impl FnMut(&mut R, usize) -> Vec<C64>) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = draw(rng, cols.len());
        for _ in 0..2 {
            for c in &cols {
                let p = linalg::inner(&v, c);
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= p * y;
                }
            }
        }
        let norm = linalg::norm_sqr(&v).sqrt();
        if norm < 1e-6 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    CMatrix::from_fn(n, |i, j| cols[j][i])
}

/// Haar-like unitary from Gram–Schmidt on a Gaussian matrix; columns are
/// orthonormal.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    orthonormal_columns(rng, n, |r, _| gaussian_vector(r, n))
}

/// Unitary within roughly `spread` of the identity: Gram–Schmidt on
/// `I + spread * G` with Gaussian `G`.
pub fn near_identity_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> CMatrix {
    orthonormal_columns(rng, n, |r, j| {
        let mut v: Vec<C64> = gaussian_vector(r, n).into_iter().map(|z| z * spread).collect();
        v[j] += C64::new(1.0, 0.0);
        v
    })
}

/// Unitary DFT matrix `F_{ij} = e^{2 pi i ij/n} / sqrt(n)`.
pub fn fourier_matrix(n: usize) -> CMatrix {
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, |i, j| {
        C64::from_polar(s, 2.0 * std::f64::consts::PI * ((i * j) % n) as f64 / n as f64)
    })
}

/// `m` vectors in `C^d` with frame operator `I`: rows of `d` orthonormal
/// columns of an `m x m` unitary.
pub fn parseval_frame<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> VectorSystem {
    assert!(d <= m && d > 0);
    let u = unitary(rng, m);
    let vectors = (0..m).map(|i| (0..d).map(|k| u[(i, k)]).collect()).collect();
    VectorSystem::new(d, vectors).expect("rows have dimension d")
}

/// Random PSD matrix `G G*` with `rank` Gaussian columns.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> HermitianMatrix {
    let mut acc = HermitianMatrix::zeros(d);
    for _ in 0..rank {
        acc = acc.add(&HermitianMatrix::rank_one(&gaussian_vector(rng, d)));
    }
    acc
}

/// `m` PSD matrices of random rank summing to the identity.
pub fn identity_tuple<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> MatrixTuple {
    loop {
        let raw: Vec<HermitianMatrix> = (0..m)
            .map(|_| {
                let rank = rng.gen_range(1..=d);
                psd(rng, d, rank)
            })
            .collect();
        let s = HermitianMatrix::sum(d, &raw);
        if eigh(&s).min() < 1e-3 {
            continue;
        }
        let inv_root = eigh(&s).apply(|x| 1.0 / x.sqrt());
        let w = inv_root.as_matrix();
        let mats: Vec<HermitianMatrix> = raw
            .iter()
            .map(|a| HermitianMatrix::symmetrized(&w.matmul(a.as_matrix()).matmul(w)))
            .collect();
        if let Ok(t) = MatrixTuple::new(mats) {
            return t;
        }
    }
}

/// `m` rank-one matrices `v v*` with Gaussian `v`.
pub fn rank_one_tuple<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> (Vec<Vec<C64>>, MatrixTuple) {
    let vs: Vec<Vec<C64>> = (0..m).map(|_| gaussian_vector(rng, d)).collect();
    let mats = vs.iter().map(|v| HermitianMatrix::rank_one(v)).collect();
    (vs, MatrixTuple::new(mats).expect("rank-one matrices are PSD"))
}

/// Independent indices, each with `1..=max_values` Gaussian vectors and random
/// probabilities.
pub fn rank_one_model<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize, max_values: usize) -> RandomRankOneModel {
    let values = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=max_values);
            let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = w.iter().sum();
            let mut probs: Vec<f64> = w.iter().map(|x| x / total).collect();
            let head: f64 = probs[..k - 1].iter().sum();
            probs[k - 1] = 1.0 - head;
            probs
                .into_iter()
                .map(|p| (gaussian_vector(rng, d), p))
                .collect()
        })
        .collect();
    RandomRankOneModel::from_values(d, values).expect("probabilities sum to one")
}

/// Hermitian matrix with zero diagonal and Gaussian off-diagonal entries.
pub fn zero_diagonal_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let z = gaussian(rng);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::new(m).expect("constructed Hermitian")
}

/// Projection with constant diagonal `1/2` in dimension `2n`: `(I + R)/2`
/// for the reflection dilation `R` of a normalized zero-diagonal matrix.
pub fn half_projection<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    loop {
        let s = zero_diagonal_hermitian(rng, n);
        let norm = linalg::operator_norm(s.as_matrix());
        if norm < 1e-6 {
            continue;
        }
        let r = reflection_dilation(&s.scale(1.0 / norm)).expect("normalized input");
        return HermitianMatrix::identity(2 * n).add(&r).scale(0.5);
    }
}

/// Rank-`k` projection `U E_k U*` with every diagonal entry at most `delta`,
/// retried up to `tries` times.
fn filtered_projection<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    delta: f64,
    tries: usize,
    mut draw: impl FnMut(&mut R) -> CMatrix,
) -> Option<HermitianMatrix> {
    for _ in 0..tries {
        let u = draw(rng);
        let p = CMatrix::from_fn(n, |i, j| (0..k).map(|l| u[(i, l)] * u[(j, l)].conj()).sum());
        let p = HermitianMatrix::symmetrized(&p);
        if (0..n).all(|i| p.get(i, i).re <= delta) {
            return Some(p);
        }
    }
    None
}

/// Rank-`k` projection in `C^n` conjugated by a random unitary, retried until
/// every diagonal entry is at most `delta`. `None` after `tries` failures.
pub fn small_diagonal_projection<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    delta: f64,
    tries: usize,
) -> Option<HermitianMatrix> {
    filtered_projection(rng, n, k, delta, tries, |r| unitary(r, n))
}

/// Like [`small_diagonal_projection`] but conjugating by `F V` with `F` the
/// DFT and `V` within `spread` of the identity, so the diagonal stays close
/// to the flat value `k/n`. Haar conjugation almost never reaches
/// `delta < 1/8` below twelve dimensions.
pub fn near_flat_projection<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    spread: f64,
    delta: f64,
    tries: usize,
) -> Option<HermitianMatrix> {
    let f = fourier_matrix(n);
    filtered_projection(rng, n, k, delta, tries, |r| f.matmul(&near_identity_unitary(r, n, spread)))
}

/// Standard basis followed by the columns of a random unitary, all scaled by
/// `1/sqrt(2)`: an equal-norm Parseval frame with squared norms `1/2`.
pub fn two_scaled_bases<R: Rng + ?Sized>(rng: &mut R, d: usize) -> VectorSystem {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = unitary(rng, d);
    let mut vectors: Vec<Vec<C64>> = (0..d)
        .map(|i| (0..d).map(|j| C64::new(if i == j { s } else { 0.0 }, 0.0)).collect())
        .collect();
    vectors.extend((0..d).map(|j| u.column(j).into_iter().map(|z| z * s).collect()));
    VectorSystem::new(d, vectors).expect("dimension d")
}

/// Random unit vectors rescaled to a common norm so the Bessel bound is one.
pub fn equal_norm_bessel<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> VectorSystem {
    let unit: Vec<Vec<C64>> = (0..m)
        .map(|_| {
            let v = gaussian_vector(rng, d);
            let n = linalg::norm_sqr(&v).sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();
    let v = VectorSystem::new(d, unit).expect("dimension d");
    let b = eigh(&frame_operator(&v)).max();
    v.scaled(1.0 / b.sqrt())
}

/// `m <= d` Gaussian vectors (a Riesz sequence almost surely).
pub fn riesz_system<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> VectorSystem {
    VectorSystem::new(d, (0..m).map(|_| gaussian_vector(rng, d)).collect()).expect("dimension d")
}

/// Non-increasing `(spectrum, norms)` with `spectrum` majorizing `norms`:
/// `norms` is a random convex combination of permutations of `spectrum`.
pub fn majorizing_pair<R: Rng + ?Sized>(rng: &mut R, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut spectrum: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0)).collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let mut norms = vec![0.0; m];
    let terms = 3;
    let w: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    for wk in w {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(rng);
        for (i, &p) in perm.iter().enumerate() {
            norms[i] += wk / total * spectrum[p];
        }
    }
    norms.sort_by(|a, b| b.total_cmp(a));
    // Equalize the totals exactly.
    let diff: f64 = spectrum.iter().sum::<f64>() - norms.iter().sum::<f64>();
    let last = norms.len() - 1;
    norms[last] = (norms[last] + diff).max(0.0);
    (spectrum, norms)
}
