use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    compact_partition, dual_riesz_system, naimark_complement, parseval_completion, subsystem_riesz,
    fourier_frame_gram, RieszPartitionCertificate,
};
use crate::error::{Error, Result};
use crate::linalg::{eigh, frame_operator, CMatrix, VectorSystem};
use crate::partition::{
    brute_force_partition, greedy_partition, per_block_bessel, weaver_bound, GreedyConfig, Partition,
};
use crate::tol;

/// How the outer block count of the Feichtinger pipeline is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RPolicy {
    /// Smallest `r <= block_cap` whose greedy blocks already have Bessel bound
    /// at most `eps / knob`.
    Adaptive,
    /// The explicit sufficient `r`; fails when it exceeds `block_cap`.
    Guaranteed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    /// Norm threshold of the two-way Riesz split; any value in `(3/4, 1)`.
    pub knob: f64,
    pub policy: RPolicy,
    pub block_cap: usize,
    pub greedy: GreedyConfig,
    pub brute_force_cap: u64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            knob: 0.92,
            policy: RPolicy::Adaptive,
            block_cap: tol::BLOCK_CAP,
            greedy: GreedyConfig::default(),
            brute_force_cap: tol::ENUMERATION_CAP,
        }
    }
}

impl FrameConfig {
    fn check(&self) -> Result<()> {
        if !(self.knob > 0.75 && self.knob < 1.0) {
            return Err(Error::invalid(format!("knob must lie in (3/4, 1), got {}", self.knob)));
        }
        Ok(())
    }

    fn plain_greedy(&self) -> GreedyConfig {
        GreedyConfig {
            extend_bessel: false,
            ..self.greedy.clone()
        }
    }

    /// Bessel bound of each half of the two-way split of the complement.
    fn split_bound(&self) -> f64 {
        weaver_bound(2, 1.0 - self.knob)
    }
}

/// Smallest `r` with `eps >= knob (1/sqrt(r) + sqrt(eps))^2`.
fn feichtinger_minimal_r(eps: f64, knob: f64) -> usize {
    let gap = (eps / knob).sqrt() - eps.sqrt();
    let mut r = (1.0 / (gap * gap)).floor().max(1.0) as usize;
    while knob * weaver_bound(r, eps) > eps {
        r += 1;
    }
    r
}

/// `(9 / eps) (knob / (1 - knob))^2`, rounded up.
fn feichtinger_sufficient_r(eps: f64, knob: f64) -> usize {
    (9.0 / eps * (knob / (1.0 - knob)).powi(2)).ceil() as usize
}

fn bessel_of(v: &VectorSystem, idx: &[usize]) -> f64 {
    v.subset(idx).map(|s| eigh(&frame_operator(&s)).max()).unwrap_or(0.0)
}

fn greedy_or_plain(v: &VectorSystem, r: usize, cfg: &FrameConfig) -> Result<Partition> {
    match greedy_partition(v, r, &cfg.greedy) {
        Ok(c) => Ok(c.partition()),
        Err(Error::BudgetExceeded { .. }) if cfg.greedy.extend_bessel => {
            Ok(greedy_partition(v, r, &cfg.plain_greedy())?.partition())
        }
        Err(e) => Err(e),
    }
}

/// Partition of a Bessel-one system with `|u_i|^2 >= eps` into Riesz sequences
/// with bounds `eps (1 - b) / knob` and `eps / knob`, where `b` is the two-way
/// split bound of the complement. Bounds refer to the normalized system
/// `sqrt(eps) u_i / |u_i|`.
pub fn feichtinger_partition(v: &VectorSystem, eps: f64, cfg: &FrameConfig) -> Result<RieszPartitionCertificate> {
    cfg.check()?;
    if !(eps.is_finite() && eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    if v.is_empty() {
        return Err(Error::invalid("empty system"));
    }
    let norms = v.norms_sqr();
    if norms.iter().any(|&n| n < eps - tol::BESSEL_ONE) {
        return Err(Error::invalid("a vector has squared norm below eps"));
    }
    let bessel = eigh(&frame_operator(v)).max();
    if bessel > 1.0 + tol::BESSEL_ONE {
        return Err(Error::invalid(format!("Bessel bound {bessel} exceeds one")));
    }
    let w = VectorSystem::new(
        v.dim(),
        v.vectors()
            .iter()
            .zip(&norms)
            .map(|(u, n)| u.iter().map(|z| z * (eps / n).sqrt()).collect())
            .collect(),
    )?;
    let required = feichtinger_minimal_r(eps, cfg.knob);
    let sufficient = feichtinger_sufficient_r(eps, cfg.knob);
    let upper = eps / cfg.knob;
    let lower = eps * (1.0 - cfg.split_bound()) / cfg.knob;

    let (outer_r, outer) = match cfg.policy {
        RPolicy::Guaranteed => {
            if sufficient > cfg.block_cap {
                return Err(Error::budget(
                    format!("outer Weaver blocks (the norm condition already holds from r = {required})"),
                    sufficient as f64,
                    cfg.block_cap as f64,
                ));
            }
            (sufficient, greedy_or_plain(&w, sufficient, cfg)?)
        }
        RPolicy::Adaptive => {
            let limit = cfg.block_cap.min(required);
            let mut found = None;
            for r in 1..=limit {
                let p = if r == 1 {
                    Partition::new(1, vec![0; w.len()])?
                } else {
                    greedy_or_plain(&w, r, cfg)?
                };
                if per_block_bessel(&w, &p).into_iter().all(|b| b <= upper) {
                    found = Some((r, p));
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::budget(
                    format!("outer Weaver blocks (the norm condition holds from r = {required})"),
                    sufficient as f64,
                    cfg.block_cap as f64,
                )
            })?
        }
    };

    let parts: Vec<Vec<usize>> = outer.blocks().into_iter().filter(|b| !b.is_empty()).collect();
    let split: Vec<Vec<Vec<usize>>> = parts
        .par_iter()
        .map(|idx| split_block(&w, idx, eps, lower, upper, cfg))
        .collect::<Result<_>>()?;
    let blocks: Vec<Vec<usize>> = split.into_iter().flatten().collect();
    let partition = compact_partition(w.len(), blocks)?;
    let per_block_riesz = partition.blocks().iter().map(|b| subsystem_riesz(&w, b)).collect();
    Ok(RieszPartitionCertificate {
        partition,
        per_block_riesz,
        guaranteed: (lower, upper),
        epsilon: eps,
        outer_r,
        required_r: required,
        sufficient_r: Some(sufficient),
    })
}

/// Two-way Riesz split of one outer block. Blocks that already satisfy the
/// target bounds are kept whole.
fn split_block(
    w: &VectorSystem,
    idx: &[usize],
    eps: f64,
    lower: f64,
    upper: f64,
    cfg: &FrameConfig,
) -> Result<Vec<Vec<usize>>> {
    let (lo, hi) = subsystem_riesz(w, idx);
    if lo >= lower && hi <= upper {
        return Ok(vec![idx.to_vec()]);
    }
    let scaled = w.subset(idx).unwrap().scaled((cfg.knob / eps).sqrt());
    let completed = parseval_completion(&scaled, cfg.knob)?;
    let complement = naimark_complement(&completed)?;
    let own: Vec<usize> = (0..idx.len()).collect();
    let c = complement
        .subset(&own)
        .unwrap()
        .reduce_to_span()
        .ok_or_else(|| Error::Internal("complement vanished".into()))?;
    let bound = cfg.split_bound();
    let mut p = greedy_partition(&c, 2, &cfg.plain_greedy())?.partition();
    if per_block_bessel(&c, &p).into_iter().any(|b| b > bound) {
        p = brute_force_partition(&c, 2, cfg.brute_force_cap)?.partition();
    }
    Ok(p
        .blocks()
        .into_iter()
        .filter(|b| !b.is_empty())
        .map(|b| b.into_iter().map(|k| idx[k]).collect())
        .collect())
}

/// Blocks needed so that a unit-norm Riesz part with upper bound `1 / knob`
/// splits into blocks with upper bound `1 + eps`.
fn r_epsilon_required(eps: f64, knob: f64) -> usize {
    let gap = (1.0 + eps).sqrt() - 1.0;
    (1.0 / (knob * gap * gap)).ceil() as usize
}

/// Partition of a unit-norm Bessel system into Riesz sequences with bounds
/// `1 - eps` and `1 + eps`.
pub fn r_epsilon_partition(v: &VectorSystem, eps: f64, cfg: &FrameConfig) -> Result<RieszPartitionCertificate> {
    cfg.check()?;
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if v.is_empty() {
        return Err(Error::invalid("empty system"));
    }
    if v.norms_sqr().iter().any(|n| (n - 1.0).abs() > tol::PROJECTION) {
        return Err(Error::invalid("vectors must have unit norm"));
    }
    let required = r_epsilon_required(eps, cfg.knob);
    if required > cfg.block_cap {
        return Err(Error::budget("Weaver blocks per Riesz part", required as f64, cfg.block_cap as f64));
    }
    let b = eigh(&frame_operator(v)).max();
    let normalized = v.scaled(1.0 / b.sqrt());
    let outer = feichtinger_partition(&normalized, 1.0 / b, cfg)?;
    let parts = outer.partition.blocks();
    let tightened: Vec<Vec<Vec<usize>>> = parts
        .par_iter()
        .map(|idx| tighten(v, idx, eps, cfg))
        .collect::<Result<_>>()?;
    let partition = compact_partition(v.len(), tightened.into_iter().flatten().collect())?;
    let per_block_riesz = partition.blocks().iter().map(|b| subsystem_riesz(v, b)).collect();
    Ok(RieszPartitionCertificate {
        partition,
        per_block_riesz,
        guaranteed: (1.0 - eps, 1.0 + eps),
        epsilon: eps,
        outer_r: outer.partition.block_count,
        required_r: required,
        sufficient_r: None,
    })
}

/// Splits a Riesz block until every piece has bounds in `[1 - eps, 1 + eps]`:
/// Weaver partitions of the block and of its biorthogonal dual cut both upper
/// bounds, and their common refinement is processed recursively.
fn tighten(v: &VectorSystem, idx: &[usize], eps: f64, cfg: &FrameConfig) -> Result<Vec<Vec<usize>>> {
    let (lo, hi) = subsystem_riesz(v, idx);
    if idx.len() <= 1 || (lo >= 1.0 - eps && hi <= 1.0 + eps) {
        return Ok(vec![idx.to_vec()]);
    }
    let sys = v.subset(idx).unwrap();
    let all: Vec<usize> = (0..idx.len()).collect();
    let dual = dual_riesz_system(&sys, &all)?;
    let r_max = idx.len().min(cfg.block_cap);
    let p1 = cut_upper(&sys, 1.0 + eps, r_max, cfg)?;
    let p2 = cut_upper(&dual, 1.0 + eps, r_max, cfg)?;
    let mut pieces: Vec<Vec<usize>> = crate::paving::refine(&p1, &p2)?
        .blocks()
        .into_iter()
        .filter(|b| !b.is_empty())
        .collect();
    if pieces.len() == 1 {
        let halves = greedy_partition(&sys, 2, &cfg.plain_greedy())?.partition().blocks();
        pieces = if halves.iter().all(|h| !h.is_empty()) {
            halves
        } else {
            let mid = idx.len() / 2;
            vec![all[..mid].to_vec(), all[mid..].to_vec()]
        };
    }
    let mut out = Vec::new();
    for piece in pieces {
        let global: Vec<usize> = piece.into_iter().map(|k| idx[k]).collect();
        out.extend(tighten(v, &global, eps, cfg)?);
    }
    Ok(out)
}

/// Smallest greedy partition (up to `r_max` blocks) whose blocks have Bessel
/// bound at most `target`; the best one tried if none does.
fn cut_upper(sys: &VectorSystem, target: f64, r_max: usize, cfg: &FrameConfig) -> Result<Partition> {
    let whole = Partition::new(1, vec![0; sys.len()])?;
    let mut best = (bessel_of(sys, &(0..sys.len()).collect::<Vec<_>>()), whole);
    if best.0 <= target {
        return Ok(best.1);
    }
    for r in 2..=r_max {
        let p = match greedy_partition(sys, r, &cfg.plain_greedy()) {
            Ok(c) => c.partition(),
            Err(Error::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        };
        let worst = per_block_bessel(sys, &p).into_iter().fold(0.0, f64::max);
        if worst < best.0 {
            best = (worst, p);
        }
        if best.0 <= target {
            break;
        }
    }
    Ok(best.1)
}

/// Coordinate partition on which `T` is a `(1 ± eps)`-isometry: the Riesz
/// bounds of a block of columns are the extreme values of `|T f|^2 / |f|^2`
/// over `f` supported on that block.
pub fn bt_partition(t: &CMatrix, eps: f64, cfg: &FrameConfig) -> Result<RieszPartitionCertificate> {
    let cols = VectorSystem::columns_of(t)?;
    r_epsilon_partition(&cols, eps, cfg)
}

/// Greedy `r`-block partition of the exponentials `e^{2 pi i n t}` on a union
/// of intervals, `|n| <= N`, with per-block Riesz bounds. The upper guarantee
/// is the Weaver bound for squared norms `|E|`; no lower bound is promised.
pub fn fourier_partition(
    intervals: &[(f64, f64)],
    n: usize,
    r: usize,
    cfg: &FrameConfig,
) -> Result<(super::FourierGram, RieszPartitionCertificate)> {
    let fg = fourier_frame_gram(intervals, n)?;
    let sys = fg.realize()?;
    let greedy = greedy_partition(&sys, r, &cfg.plain_greedy())?.partition();
    let p = compact_partition(sys.len(), greedy.blocks())?;
    let per_block_riesz = p.blocks().iter().map(|b| subsystem_riesz(&sys, b)).collect();
    let measure = fg.measure();
    let cert = RieszPartitionCertificate {
        partition: p,
        per_block_riesz,
        guaranteed: (0.0, weaver_bound(r, measure)),
        epsilon: measure,
        outer_r: r,
        required_r: r,
        sufficient_r: None,
    };
    Ok((fg, cert))
}
