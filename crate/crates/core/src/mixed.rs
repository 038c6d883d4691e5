//! Mixed characteristic polynomials of PSD tuples and expected characteristic
//! polynomials of finite random rank-one sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{char_poly, det, eigh, CMatrix, HermitianMatrix};
use crate::poly::RealPolynomial;
use crate::{tol, C64};

/// Non-empty tuple of PSD matrices of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    dim: usize,
    mats: Vec<HermitianMatrix>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = mats
            .first()
            .ok_or_else(|| Error::invalid("matrix tuple must be non-empty"))?
            .dim();
        for (i, a) in mats.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::invalid(format!("matrix {i} has dimension {} not {dim}", a.dim())));
            }
            let min = eigh(a).min();
            if min < -tol::PSD_CLAMP {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
        }
        Ok(MatrixTuple { dim, mats })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[HermitianMatrix] {
        &self.mats
    }

    pub fn sum(&self) -> HermitianMatrix {
        HermitianMatrix::sum(self.dim, &self.mats)
    }

    /// Largest trace in the tuple.
    pub fn max_trace(&self) -> f64 {
        self.mats.iter().map(|a| a.trace()).fold(f64::MIN, f64::max)
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of `k x k` determinants the polarization evaluator needs.
pub fn polarization_work(m: usize, d: usize) -> f64 {
    (1..=m.min(d))
        .map(|k| binomial(m, k) * binomial(d, k) * 2f64.powi(k as i32))
        .sum()
}

/// `mu[A_1..A_m](z)` with the default work budget.
pub fn mixed_char_poly(t: &MatrixTuple) -> Result<RealPolynomial> {
    mixed_char_poly_with_budget(t, tol::POLARIZATION_BUDGET)
}

/// Polarization evaluator.
///
/// The coefficient of `z^{d-k}` is `(-1)^k` times the sum, over `k`-subsets
/// `S` of the tuple and `k`-subsets `R` of coordinates, of the multilinear
/// coefficient of `det(sum_{i in S} t_i A_i[R])`, which is extracted exactly by
/// the finite difference `sum_{T subset S} (-1)^{k-|T|} det(sum_{i in T} A_i[R])`.
pub fn mixed_char_poly_with_budget(t: &MatrixTuple, budget: u64) -> Result<RealPolynomial> {
    let (m, d) = (t.len(), t.dim());
    let work = polarization_work(m, d);
    if work > budget as f64 {
        return Err(Error::budget("polarization evaluator", work, budget as f64));
    }
    let mut coeffs = vec![0.0; d + 1];
    coeffs[d] = 1.0;
    for k in 1..=m.min(d) {
        let rows = combinations(d, k);
        let per_subset: Vec<f64> = combinations(m, k)
            .par_iter()
            .map(|s| {
                rows.iter()
                    .map(|r| {
                        let blocks: Vec<CMatrix> =
                            s.iter().map(|&i| t.mats[i].as_matrix().principal(r)).collect();
                        multilinear_coefficient(&blocks)
                    })
                    .sum::<f64>()
            })
            .collect();
        let total: f64 = per_subset.iter().sum();
        coeffs[d - k] = if k % 2 == 0 { total } else { -total };
    }
    Ok(RealPolynomial::new(coeffs))
}

/// Coefficient of `t_1 t_2 ... t_k` in `det(sum t_i B_i)` for `k x k` blocks.
fn multilinear_coefficient(blocks: &[CMatrix]) -> f64 {
    let k = blocks.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << k) {
        let mut s = CMatrix::zeros(k);
        for (i, b) in blocks.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s = s.add(b);
            }
        }
        let v = det(&s).re;
        if (k - mask.count_ones() as usize) % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    total
}

/// One value of a random vector and its probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneValue {
    pub vector: Vec<C64>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexDistribution {
    pub values: Vec<RankOneValue>,
}

/// Independent random vectors `v_1..v_m` in `C^dim`, each with finitely many
/// values. Only the marginals are stored; independence is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson")]
pub struct RandomRankOneModel {
    dim: usize,
    indices: Vec<IndexDistribution>,
}

#[derive(Deserialize)]
struct ModelJson {
    dim: usize,
    indices: Vec<IndexDistribution>,
}

impl TryFrom<ModelJson> for RandomRankOneModel {
    type Error = Error;

    fn try_from(j: ModelJson) -> Result<Self> {
        RandomRankOneModel::new(j.dim, j.indices)
    }
}

impl RandomRankOneModel {
    pub fn new(dim: usize, indices: Vec<IndexDistribution>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("model dimension must be positive"));
        }
        if indices.is_empty() {
            return Err(Error::invalid("model needs at least one index"));
        }
        for (i, ix) in indices.iter().enumerate() {
            if ix.values.is_empty() {
                return Err(Error::invalid(format!("index {i} has no values")));
            }
            let mut total = 0.0;
            for v in &ix.values {
                if v.vector.len() != dim {
                    return Err(Error::invalid(format!("index {i}: vector length differs from {dim}")));
                }
                if v.vector.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::invalid(format!("index {i}: non-finite vector entry")));
                }
                if !(v.prob >= 0.0) || !v.prob.is_finite() {
                    return Err(Error::invalid(format!("index {i}: negative probability")));
                }
                total += v.prob;
            }
            if (total - 1.0).abs() > tol::PROB_SUM {
                return Err(Error::invalid(format!("index {i}: probabilities sum to {total}")));
            }
        }
        Ok(RandomRankOneModel { dim, indices })
    }

    /// Convenience constructor from `(vector, prob)` lists.
    pub fn from_values(dim: usize, values: Vec<Vec<(Vec<C64>, f64)>>) -> Result<Self> {
        Self::new(
            dim,
            values
                .into_iter()
                .map(|vs| IndexDistribution {
                    values: vs
                        .into_iter()
                        .map(|(vector, prob)| RankOneValue { vector, prob })
                        .collect(),
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[IndexDistribution] {
        &self.indices
    }

    /// `E[v_i v_i*]`.
    pub fn expectation(&self, i: usize) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim);
        for v in &self.indices[i].values {
            acc = acc.add(&HermitianMatrix::rank_one(&v.vector).scale(v.prob));
        }
        acc
    }

    pub fn expectations(&self) -> Result<MatrixTuple> {
        MatrixTuple::new((0..self.len()).map(|i| self.expectation(i)).collect())
    }

    /// Product of the support sizes.
    pub fn assignment_count(&self) -> f64 {
        self.indices.iter().map(|ix| ix.values.len() as f64).product()
    }

    /// The model with `fixed[i] = Some(k)` replaced by its `k`-th value with
    /// probability one.
    pub fn conditioned(&self, fixed: &[Option<usize>]) -> Result<Self> {
        if fixed.len() != self.len() {
            return Err(Error::invalid("partial assignment length differs from model length"));
        }
        let mut indices = self.indices.clone();
        for (i, f) in fixed.iter().enumerate() {
            if let Some(k) = *f {
                let v = self.indices[i].values.get(k).ok_or_else(|| {
                    Error::invalid(format!("index {i} has no value {k}"))
                })?;
                indices[i] = IndexDistribution {
                    values: vec![RankOneValue { vector: v.vector.clone(), prob: 1.0 }],
                };
            }
        }
        Ok(RandomRankOneModel { dim: self.dim, indices })
    }
}

/// `E det(zI - sum v_i v_i*)` as `mu` of the marginal expectations.
pub fn expected_char_poly(model: &RandomRankOneModel) -> Result<RealPolynomial> {
    mixed_char_poly(&model.expectations()?)
}

/// `E det(zI - sum v_i v_i*)` by averaging `char_poly` over every assignment.
pub fn expected_char_poly_enumeration(model: &RandomRankOneModel, cap: u64) -> Result<RealPolynomial> {
    let count = model.assignment_count();
    if count > cap as f64 {
        return Err(Error::budget("assignment enumeration", count, cap as f64));
    }
    let total = count as usize;
    let d = model.dim;
    let sizes: Vec<usize> = model.indices.iter().map(|ix| ix.values.len()).collect();
    const CHUNK: usize = 1024;
    let partials: Vec<Vec<f64>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; d + 1];
            for code in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let mut rest = code;
                let mut prob = 1.0;
                let mut sum = CMatrix::zeros(d);
                for (i, &n) in sizes.iter().enumerate() {
                    let v = &model.indices[i].values[rest % n];
                    rest /= n;
                    prob *= v.prob;
                    if prob == 0.0 {
                        break;
                    }
                    sum = sum.add(HermitianMatrix::rank_one(&v.vector).as_matrix());
                }
                if prob == 0.0 {
                    continue;
                }
                let p = char_poly(&HermitianMatrix::new(sum).expect("sum of rank-one terms is Hermitian"));
                for (a, &b) in acc.iter_mut().zip(p.coeffs()) {
                    *a += prob * b;
                }
            }
            acc
        })
        .collect();
    let mut coeffs = vec![0.0; d + 1];
    for part in partials {
        for (a, b) in coeffs.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(RealPolynomial::new(coeffs))
}

/// Expected characteristic polynomial with some indices fixed to given values.
pub fn conditional_expected_char_poly(
    model: &RandomRankOneModel,
    fixed: &[Option<usize>],
) -> Result<RealPolynomial> {
    expected_char_poly(&model.conditioned(fixed)?)
}
