//! Weaver partitions of Parseval frames: the block lift, the greedy
//! interlacing-family partitioner and an exhaustive oracle.

mod lifted;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, frame_operator, operator_norm, HermitianMatrix, VectorSystem};
use crate::mixed::{
    expected_char_poly_enumeration, mixed_char_poly_with_budget, RandomRankOneModel,
};
use crate::poly::maxroot;
use crate::{tol, C64};

use lifted::{greedy_work, LiftedEvaluator};

/// Assignment of indices `0..m` to blocks `0..r`. Blocks may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub block_count: usize,
    pub assignment: Vec<usize>,
}

impl Partition {
    pub fn new(block_count: usize, assignment: Vec<usize>) -> Result<Self> {
        if block_count == 0 {
            return Err(Error::invalid("a partition needs at least one block"));
        }
        if assignment.iter().any(|&k| k >= block_count) {
            return Err(Error::invalid("assignment refers to a block beyond the block count"));
        }
        Ok(Partition { block_count, assignment })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Indices of each block, in increasing order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count];
        for (i, &k) in self.assignment.iter().enumerate() {
            out[k].push(i);
        }
        out
    }

    /// Number of blocks with at least one index.
    pub fn nonempty_blocks(&self) -> usize {
        self.blocks().iter().filter(|b| !b.is_empty()).count()
    }
}

/// Largest eigenvalue of each block's frame operator (zero for empty blocks).
pub fn per_block_bessel(v: &VectorSystem, p: &Partition) -> Vec<f64> {
    p.blocks()
        .iter()
        .map(|b| match v.subset(b) {
            Some(s) => eigh(&frame_operator(&s)).max().max(0.0),
            None => 0.0,
        })
        .collect()
}

/// Smallest eigenvalue of each block's frame operator on the ambient space.
pub fn per_block_lower(v: &VectorSystem, p: &Partition) -> Vec<f64> {
    p.blocks()
        .iter()
        .map(|b| match v.subset(b) {
            Some(s) => eigh(&frame_operator(&s)).min(),
            None => 0.0,
        })
        .collect()
}

/// `(1/sqrt(r) + sqrt(delta))^2`.
pub fn weaver_bound(r: usize, delta: f64) -> f64 {
    (1.0 / (r as f64).sqrt() + delta.sqrt()).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub r: usize,
    pub assignment: Vec<usize>,
    pub per_block_bessel: Vec<f64>,
    pub per_block_lower: Vec<f64>,
    pub delta: f64,
    pub guaranteed_bound: f64,
    /// Largest root of the conditional expected characteristic polynomial of
    /// the lift before any index is fixed and after each index is fixed.
    pub maxroot_trace: Vec<f64>,
    /// Vectors appended to reach a Parseval frame before partitioning.
    pub appended: usize,
}

impl PartitionCertificate {
    pub fn partition(&self) -> Partition {
        Partition {
            block_count: self.r,
            assignment: self.assignment.clone(),
        }
    }

    pub fn max_block_bessel(&self) -> f64 {
        self.per_block_bessel.iter().copied().fold(0.0, f64::max)
    }

    pub fn meets_bound(&self) -> bool {
        self.max_block_bessel() <= self.guaranteed_bound + tol::CERTIFICATE
    }

    fn build(v: &VectorSystem, r: usize, assignment: Vec<usize>, trace: Vec<f64>, appended: usize) -> Self {
        let delta = v.max_norm_sqr();
        let p = Partition { block_count: r, assignment };
        PartitionCertificate {
            r,
            per_block_bessel: per_block_bessel(v, &p),
            per_block_lower: per_block_lower(v, &p),
            assignment: p.assignment,
            delta,
            guaranteed_bound: weaver_bound(r, delta),
            maxroot_trace: trace,
            appended,
        }
    }
}

/// Random model for the block lift: index `i` is `sqrt(r) u_i` placed in block
/// slot `k` of `C^{r d}` with probability `1/r` for each `k`.
pub fn lift_to_blocks(v: &VectorSystem, r: usize) -> Result<RandomRankOneModel> {
    if r == 0 {
        return Err(Error::invalid("block count must be positive"));
    }
    let d = v.dim();
    let s = (r as f64).sqrt();
    let values = v
        .vectors()
        .iter()
        .map(|u| {
            (0..r)
                .map(|k| {
                    let mut x = vec![C64::new(0.0, 0.0); r * d];
                    for (j, z) in u.iter().enumerate() {
                        x[k * d + j] = z * s;
                    }
                    (x, 1.0 / r as f64)
                })
                .collect()
        })
        .collect();
    RandomRankOneModel::from_values(r * d, values)
}

/// Appends scaled eigenvectors of `I - S` so the system becomes Parseval.
/// Each eigenvalue `w` is split into `ceil(w / delta)` equal copies so no
/// appended vector has squared norm above `delta = max |u_i|^2`.
pub fn extend_to_parseval(v: &VectorSystem) -> Result<VectorSystem> {
    let d = v.dim();
    let s = frame_operator(v);
    let e = eigh(&s);
    if e.max() > 1.0 + tol::BESSEL_ONE {
        return Err(Error::invalid(format!(
            "Bessel bound {} exceeds one; cannot extend to Parseval",
            e.max()
        )));
    }
    let delta = v.max_norm_sqr();
    let complement = eigh(&HermitianMatrix::identity(d).sub(&s));
    let mut extra = Vec::new();
    for (k, &w) in complement.values.iter().enumerate() {
        if w <= tol::PSD_CLAMP {
            continue;
        }
        if delta <= 0.0 {
            return Err(Error::invalid("cannot extend a system of zero vectors"));
        }
        let copies = (w / delta - 1e-9).ceil().max(1.0) as usize;
        let scale = (w / copies as f64).sqrt();
        let vec: Vec<C64> = complement.vector(k).iter().map(|z| z * scale).collect();
        for _ in 0..copies {
            extra.push(vec.clone());
        }
    }
    v.extended(&extra)
}

pub fn is_parseval(v: &VectorSystem) -> bool {
    let s = frame_operator(v);
    operator_norm(s.sub(&HermitianMatrix::identity(v.dim())).as_matrix()) <= tol::PARSEVAL
}

/// How candidate conditionings are scored during the greedy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    /// Closed-form block expansion of the lifted polynomial (default).
    BlockLifted,
    /// Average of characteristic polynomials over every completion.
    Enumeration,
    /// Mixed characteristic polynomial of the conditional expectations.
    Polarization,
    /// Enumeration while `r^(free indices) <= 10^4`, polarization otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    /// Extend Bessel (non-Parseval) inputs to Parseval first. When false, a
    /// non-Parseval input is partitioned as given and the bound is reported
    /// but not guaranteed.
    pub extend_bessel: bool,
    pub evaluator: Evaluator,
    /// Cap on the estimated multiply-adds of the block-lifted evaluator.
    pub work_budget: f64,
    /// Cap for the enumeration and polarization evaluators.
    pub evaluator_budget: u64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            extend_bessel: true,
            evaluator: Evaluator::BlockLifted,
            work_budget: 5e9,
            evaluator_budget: tol::POLARIZATION_BUDGET,
        }
    }
}

enum Scorer {
    Lifted(LiftedEvaluator),
    Model {
        model: RandomRankOneModel,
        mode: Evaluator,
        budget: u64,
    },
}

impl Scorer {
    /// Largest root, in the original variable, of the conditional expected
    /// characteristic polynomial.
    fn score(&self, r: usize, assignment: &[Option<usize>]) -> Result<f64> {
        match self {
            Scorer::Lifted(ev) => Ok(r as f64 * ev.poly(assignment)?.maxroot()?),
            Scorer::Model { model, mode, budget } => {
                let cond = model.conditioned(
                    &assignment.iter().map(|a| a.map(|k| k)).collect::<Vec<_>>(),
                )?;
                let free = assignment.iter().filter(|a| a.is_none()).count();
                let enumerate = match mode {
                    Evaluator::Enumeration => true,
                    Evaluator::Polarization => false,
                    _ => (r as f64).powi(free as i32) <= 1e4,
                };
                let p = if enumerate {
                    expected_char_poly_enumeration(&cond, *budget)?
                } else {
                    mixed_char_poly_with_budget(&cond.expectations()?, *budget)?
                };
                maxroot(&p)
            }
        }
    }

    fn candidates(&self, r: usize, assignment: &[Option<usize>], i: usize) -> Result<Vec<(usize, f64)>> {
        match self {
            Scorer::Lifted(ev) => ev
                .candidates(assignment, i)?
                .into_iter()
                .map(|(k, p)| Ok((k, r as f64 * p.maxroot()?)))
                .collect(),
            Scorer::Model { .. } => {
                let mut seen_empty = false;
                let mut out = Vec::new();
                for k in 0..r {
                    let empty = !assignment.iter().any(|a| *a == Some(k));
                    if empty {
                        if seen_empty {
                            continue;
                        }
                        seen_empty = true;
                    }
                    let mut a = assignment.to_vec();
                    a[i] = Some(k);
                    out.push((k, self.score(r, &a)?));
                }
                Ok(out)
            }
        }
    }
}

/// Lowest block whose score is within rounding of the minimum.
fn argmin(cands: &[(usize, f64)]) -> (usize, f64) {
    let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * (1.0 + best.abs());
    *cands
        .iter()
        .filter(|c| c.1 <= best + tie)
        .min_by_key(|c| c.0)
        .unwrap()
}

/// Greedy interlacing-family partition into `r` blocks.
///
/// Indices are fixed in input order; each goes to the block minimizing the
/// largest root of the conditional expected characteristic polynomial of the
/// block lift, ties going to the lowest block. The recorded trace of those
/// roots must be non-increasing. Bessel inputs are first extended to Parseval
/// and the partition is restricted back to the original indices.
pub fn greedy_partition(v: &VectorSystem, r: usize, config: &GreedyConfig) -> Result<PartitionCertificate> {
    if r == 0 {
        return Err(Error::invalid("block count must be positive"));
    }
    let m0 = v.len();
    let work_system = if is_parseval(v) || !config.extend_bessel {
        v.clone()
    } else {
        extend_to_parseval(v)?
    };
    let appended = work_system.len() - m0;
    if r == 1 {
        let trace = vec![eigh(&frame_operator(&work_system)).max(); 2];
        return Ok(PartitionCertificate::build(v, 1, vec![0; m0], trace, appended));
    }
    let m = work_system.len();
    let scorer = match config.evaluator {
        Evaluator::BlockLifted => {
            let work = greedy_work(m, r);
            if work > config.work_budget {
                return Err(Error::budget("greedy partition work", work, config.work_budget));
            }
            Scorer::Lifted(LiftedEvaluator::new(&work_system, r)?)
        }
        mode => Scorer::Model {
            model: lift_to_blocks(&work_system, r)?,
            mode,
            budget: config.evaluator_budget,
        },
    };
    let mut assignment: Vec<Option<usize>> = vec![None; m];
    let mut trace = vec![scorer.score(r, &assignment)?];
    for i in 0..m {
        let cands = scorer.candidates(r, &assignment, i)?;
        let (k, value) = argmin(&cands);
        let prev = *trace.last().unwrap();
        if value > prev + tol::TRACE_MONOTONE * (1.0 + prev.abs()) {
            return Err(Error::Internal(format!(
                "greedy maxroot increased from {prev} to {value} at index {i}"
            )));
        }
        assignment[i] = Some(k);
        trace.push(value);
    }
    let full: Vec<usize> = assignment.into_iter().map(|a| a.unwrap()).collect();
    Ok(PartitionCertificate::build(v, r, full[..m0].to_vec(), trace, appended))
}

/// Exhaustive minimization of the largest block Bessel bound over all
/// assignments, up to relabelling of blocks.
pub fn brute_force_partition(v: &VectorSystem, r: usize, cap: u64) -> Result<PartitionCertificate> {
    if r == 0 {
        return Err(Error::invalid("block count must be positive"));
    }
    let m = v.len();
    let count = (r as f64).powi(m as i32);
    if count > cap as f64 || m > 30 {
        return Err(Error::budget("brute-force assignments", count, cap as f64));
    }
    // Largest eigenvalue of every subset's frame operator.
    let mut top = vec![0.0f64; 1 << m];
    for mask in 1usize..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        top[mask] = eigh(&frame_operator(&v.subset(&idx).unwrap())).max().max(0.0);
    }
    let mut search = Search {
        m,
        r,
        top: &top,
        masks: vec![0; r],
        assignment: vec![0; m],
        best: f64::INFINITY,
        best_assignment: vec![0; m],
    };
    search.descend(0, 0, 0.0);
    let assignment = search.best_assignment;
    Ok(PartitionCertificate::build(v, r, assignment, Vec::new(), 0))
}

struct Search<'a> {
    m: usize,
    r: usize,
    top: &'a [f64],
    masks: Vec<usize>,
    assignment: Vec<usize>,
    best: f64,
    best_assignment: Vec<usize>,
}

impl Search<'_> {
    /// Restricted-growth enumeration: index `i` may open at most one new block.
    fn descend(&mut self, i: usize, used: usize, current: f64) {
        if current >= self.best {
            return;
        }
        if i == self.m {
            self.best = current;
            self.best_assignment = self.assignment.clone();
            return;
        }
        let limit = (used + 1).min(self.r);
        for k in 0..limit {
            let mask = self.masks[k] | (1 << i);
            let value = current.max(self.top[mask]);
            if value >= self.best {
                continue;
            }
            let old = self.masks[k];
            self.masks[k] = mask;
            self.assignment[i] = k;
            self.descend(i + 1, used.max(k + 1), value);
            self.masks[k] = old;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(d: usize) -> VectorSystem {
        VectorSystem::from_real(
            &(0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn lift_examples() {
        let one = VectorSystem::from_real(&[vec![1.0]]).unwrap();
        let m = lift_to_blocks(&one, 2).unwrap();
        let vals = &m.indices()[0].values;
        let s = 2f64.sqrt();
        assert_eq!(vals.len(), 2);
        assert!((vals[0].vector[0].re - s).abs() < 1e-15 && vals[0].vector[1].re == 0.0);
        assert!((vals[1].vector[1].re - s).abs() < 1e-15 && vals[1].prob == 0.5);
        let single = lift_to_blocks(&VectorSystem::mercedes_benz(), 1).unwrap();
        assert_eq!(single.indices()[0].values.len(), 1);
        let mb = VectorSystem::mercedes_benz();
        let lifted = lift_to_blocks(&mb, 3).unwrap();
        for i in 0..3 {
            assert!((lifted.expectation(i).trace() - 3.0 * 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn greedy_examples() {
        let cfg = GreedyConfig::default();
        let c = greedy_partition(&basis(2), 2, &cfg).unwrap();
        assert!((c.guaranteed_bound - (1.0 / 2f64.sqrt() + 1.0).powi(2)).abs() < 1e-12);
        assert!(c.meets_bound());
        let c = greedy_partition(&VectorSystem::mercedes_benz(), 2, &cfg).unwrap();
        assert!((c.max_block_bessel() - 1.0).abs() < 1e-12, "{c:?}");
        assert!((c.guaranteed_bound - (0.5f64.sqrt() + (2.0f64 / 3.0).sqrt()).powi(2)).abs() < 1e-12);
        assert!((c.guaranteed_bound - 2.3214).abs() < 1e-4);
        let single = VectorSystem::from_real(&[vec![0.6, 0.0]]).unwrap();
        let c = greedy_partition(&single, 2, &cfg).unwrap();
        assert_eq!(Partition::new(2, c.assignment.clone()).unwrap().nonempty_blocks(), 1);
        assert!((c.max_block_bessel() - 0.36).abs() < 1e-12);
    }

    #[test]
    fn trace_starts_at_expectation_and_ends_at_realized() {
        let mb = VectorSystem::mercedes_benz();
        for r in [2, 3] {
            let c = greedy_partition(&mb, r, &GreedyConfig::default()).unwrap();
            let mu = crate::mixed::expected_char_poly(&lift_to_blocks(&mb, r).unwrap()).unwrap();
            assert!((c.maxroot_trace[0] - maxroot(&mu).unwrap()).abs() < 1e-9);
            let last = *c.maxroot_trace.last().unwrap();
            assert!((last - r as f64 * c.max_block_bessel()).abs() < 1e-8, "{c:?}");
            assert!(c.maxroot_trace.windows(2).all(|w| w[1] <= w[0] + 1e-8));
        }
    }

    #[test]
    fn lifted_matches_model_evaluators() {
        let mb = VectorSystem::mercedes_benz();
        let ev = LiftedEvaluator::new(&mb, 3).unwrap();
        let model = lift_to_blocks(&mb, 3).unwrap();
        let partials: [[Option<usize>; 3]; 4] = [
            [None, None, None],
            [Some(0), None, None],
            [Some(0), Some(2), None],
            [Some(1), Some(1), Some(0)],
        ];
        for a in partials {
            let lifted = 3.0 * ev.poly(&a).unwrap().maxroot().unwrap();
            let cond = model.conditioned(&a).unwrap();
            let en = maxroot(&expected_char_poly_enumeration(&cond, 1000).unwrap()).unwrap();
            assert!((lifted - en).abs() < 1e-9, "{a:?}: {lifted} vs {en}");
        }
        for mode in [Evaluator::Enumeration, Evaluator::Polarization, Evaluator::Auto] {
            let cfg = GreedyConfig { evaluator: mode, ..GreedyConfig::default() };
            let a = greedy_partition(&mb, 2, &cfg).unwrap();
            let b = greedy_partition(&mb, 2, &GreedyConfig::default()).unwrap();
            assert_eq!(a.assignment, b.assignment);
            for (x, y) in a.maxroot_trace.iter().zip(&b.maxroot_trace) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn extend_examples() {
        let mb = VectorSystem::mercedes_benz();
        assert_eq!(extend_to_parseval(&mb).unwrap().len(), 3);
        let h = 0.5f64.sqrt();
        let one = VectorSystem::from_real(&[vec![h, 0.0]]).unwrap();
        let ext = extend_to_parseval(&one).unwrap();
        assert_eq!(ext.len(), 4);
        assert!(is_parseval(&ext));
        assert!(ext.norms_sqr().iter().all(|&n| n <= 0.5 + 1e-12));
        let unit = VectorSystem::from_real(&[vec![1.0]]).unwrap();
        assert_eq!(extend_to_parseval(&unit).unwrap().len(), 1);
        let big = VectorSystem::from_real(&[vec![1.5]]).unwrap();
        assert!(extend_to_parseval(&big).is_err());
    }

    #[test]
    fn bessel_input_is_restricted_back() {
        let h = 0.5f64.sqrt();
        let v = VectorSystem::from_real(&[vec![h, 0.0], vec![0.0, h]]).unwrap();
        let c = greedy_partition(&v, 2, &GreedyConfig::default()).unwrap();
        assert_eq!(c.assignment.len(), 2);
        assert!(c.appended > 0);
        assert!(c.meets_bound());
    }

    #[test]
    fn brute_force_examples() {
        let c = brute_force_partition(&VectorSystem::mercedes_benz(), 2, 1_000_000).unwrap();
        assert!((c.max_block_bessel() - 1.0).abs() < 1e-12);
        let c = brute_force_partition(&basis(3), 3, 1_000_000).unwrap();
        assert!((c.max_block_bessel() - 1.0).abs() < 1e-12);
        let twin = VectorSystem::from_real(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let c = brute_force_partition(&twin, 2, 1_000_000).unwrap();
        assert!((c.max_block_bessel() - 1.0).abs() < 1e-12);
        assert_ne!(c.assignment[0], c.assignment[1]);
        assert!(matches!(
            brute_force_partition(&basis(3), 3, 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
