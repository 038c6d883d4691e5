//! Pavings of projections, reflections, self-adjoint and bounded matrices,
//! each derived from the previous one through Weaver partitions.
//!
//! Block counts follow the reduction exactly: a projection paving with `r`
//! blocks gives reflection and self-adjoint pavings with `r^2` blocks and a
//! bounded paving with `r^4` blocks. Block labels of a refinement are
//! `a * r2 + b`, so most labels of the larger pavings are empty; certificates
//! list compressions for nonempty blocks only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, operator_norm, psd_sqrt, CMatrix, HermitianMatrix, VectorSystem};
use crate::partition::{brute_force_partition, greedy_partition, GreedyConfig, Partition};
use crate::{tol, C64};

/// Compression norm of one nonempty block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockNorm {
    pub block: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PavingCertificate {
    pub target_eps: f64,
    /// `||P_A T P_A||` for every nonempty block `A`; empty blocks have norm 0.
    pub achieved: Vec<BlockNorm>,
    #[serde(flatten)]
    pub partition: Partition,
    pub input_norm: f64,
    /// `max(achieved) <= target_eps * input_norm + 1e-9`.
    pub met: bool,
}

impl PavingCertificate {
    /// Builds a certificate by measuring every block compression of `t`.
    pub fn measure(t: &CMatrix, partition: Partition, target_eps: f64, input_norm: f64) -> Self {
        let achieved = block_indices(&partition)
            .into_iter()
            .map(|(block, idx)| BlockNorm {
                block,
                norm: operator_norm(&t.principal(&idx)),
            })
            .collect();
        let mut cert = PavingCertificate {
            target_eps,
            achieved,
            partition,
            input_norm,
            met: false,
        };
        cert.met = cert.max_achieved() <= cert.bound() + tol::CERTIFICATE;
        cert
    }

    pub fn max_achieved(&self) -> f64 {
        self.achieved.iter().map(|b| b.norm).fold(0.0, f64::max)
    }

    /// `target_eps * input_norm`.
    pub fn bound(&self) -> f64 {
        self.target_eps * self.input_norm
    }

    pub fn block_count(&self) -> usize {
        self.partition.block_count
    }
}

/// Nonempty blocks keyed by label, without allocating the empty ones.
fn block_indices(p: &Partition) -> BTreeMap<usize, Vec<usize>> {
    let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &k) in p.assignment.iter().enumerate() {
        map.entry(k).or_default().push(i);
    }
    map
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PavingConfig {
    /// Use this many blocks for projection pavings instead of `ceil(36/eps^2)`.
    pub r_override: Option<usize>,
    /// Largest projection block count accepted.
    pub block_cap: usize,
    pub greedy: GreedyConfig,
    /// Assignment cap for the brute-force fallback of `pave_projection_delta`.
    pub brute_force_cap: u64,
}

impl Default for PavingConfig {
    fn default() -> Self {
        PavingConfig {
            r_override: None,
            block_cap: tol::BLOCK_CAP,
            greedy: GreedyConfig::default(),
            brute_force_cap: tol::ENUMERATION_CAP,
        }
    }
}

impl PavingConfig {
    /// Projection block count for `eps`: `ceil(36 / eps^2)` unless overridden.
    pub fn blocks_for(&self, eps: f64) -> Result<usize> {
        check_eps(eps)?;
        let r = match self.r_override {
            Some(r) if r == 0 => return Err(Error::invalid("block count must be positive")),
            Some(r) => r,
            None => {
                let r = (36.0 / (eps * eps)).ceil();
                if r > self.block_cap as f64 {
                    return Err(Error::budget(format!("paving blocks for eps = {eps}"), r, self.block_cap as f64));
                }
                r as usize
            }
        };
        if r > self.block_cap {
            return Err(Error::budget("paving blocks", r as f64, self.block_cap as f64));
        }
        Ok(r)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

fn check_projection(q: &HermitianMatrix) -> Result<()> {
    let m = q.as_matrix();
    let dev = m.matmul(m).sub(m).max_abs();
    if dev > tol::PROJECTION {
        return Err(Error::invalid(format!("not a projection: |Q^2 - Q| = {dev:e}")));
    }
    Ok(())
}

fn check_diagonal(a: &HermitianMatrix, value: f64, what: &str) -> Result<()> {
    for i in 0..a.dim() {
        let d = a.get(i, i).re;
        if (d - value).abs() > tol::PROJECTION {
            return Err(Error::invalid(format!("{what}: diagonal entry {i} is {d}, expected {value}")));
        }
    }
    Ok(())
}

fn check_nonempty(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be positive"));
    }
    Ok(())
}

/// Columns `Q e_i` in coordinates of an orthonormal basis of their span.
/// Inner products are those of the columns, so the Gram matrix is `Q`.
pub fn projection_columns(q: &HermitianMatrix) -> Result<VectorSystem> {
    VectorSystem::columns_of(q.as_matrix())?
        .reduce_to_span()
        .ok_or_else(|| Error::invalid("projection is zero"))
}

/// Paves a projection with constant diagonal `1/2` into `r = ceil(36/eps^2)`
/// blocks with compressions at most `(1 + eps) / 2`.
pub fn pave_projection_half(q: &HermitianMatrix, eps: f64, config: &PavingConfig) -> Result<PavingCertificate> {
    check_nonempty(q.dim())?;
    check_projection(q)?;
    check_diagonal(q, 0.5, "projection")?;
    let r = config.blocks_for(eps)?;
    let cols = projection_columns(q)?;
    let cert = greedy_partition(&cols, r, &config.greedy)?;
    Ok(PavingCertificate::measure(q.as_matrix(), cert.partition(), (1.0 + eps) / 2.0, 1.0))
}

/// `1/2 + sqrt(2 delta (1 - 2 delta))`.
pub fn projection_delta_target(delta: f64) -> f64 {
    0.5 + (2.0 * delta * (1.0 - 2.0 * delta)).sqrt()
}

/// Two-block paving of a projection whose diagonal is at most `delta < 1/4`.
///
/// Tries the greedy first and falls back to exhaustive search. When neither
/// meets `projection_delta_target(delta)` the certificate has `met == false`.
pub fn pave_projection_delta(p: &HermitianMatrix, delta: f64, config: &PavingConfig) -> Result<PavingCertificate> {
    if !(delta.is_finite() && delta > 0.0 && delta < 0.25) {
        return Err(Error::invalid(format!("delta must lie in (0, 1/4), got {delta}")));
    }
    check_nonempty(p.dim())?;
    check_projection(p)?;
    for i in 0..p.dim() {
        let d = p.get(i, i).re;
        if d > delta + tol::PROJECTION {
            return Err(Error::invalid(format!("diagonal entry {i} is {d}, above delta = {delta}")));
        }
    }
    let target = projection_delta_target(delta);
    let cols = projection_columns(p)?;
    let greedy = greedy_partition(&cols, 2, &config.greedy)?;
    let cert = PavingCertificate::measure(p.as_matrix(), greedy.partition(), target, 1.0);
    if cert.met {
        return Ok(cert);
    }
    let brute = brute_force_partition(&cols, 2, config.brute_force_cap)?;
    Ok(PavingCertificate::measure(p.as_matrix(), brute.partition(), target, 1.0))
}

/// Common refinement `{A_a ∩ B_b}` labelled `a * r2 + b`.
pub fn refine(p1: &Partition, p2: &Partition) -> Result<Partition> {
    if p1.len() != p2.len() {
        return Err(Error::invalid(format!(
            "partitions cover {} and {} indices",
            p1.len(),
            p2.len()
        )));
    }
    let r2 = p2.block_count;
    let assignment = p1
        .assignment
        .iter()
        .zip(&p2.assignment)
        .map(|(&a, &b)| a * r2 + b)
        .collect();
    Partition::new(p1.block_count * r2, assignment)
}

/// Paves a zero-diagonal reflection into `r^2` blocks with compressions at
/// most `eps`, from pavings of `(I + R)/2` and `(I - R)/2`.
pub fn pave_reflection(r: &HermitianMatrix, eps: f64, config: &PavingConfig) -> Result<PavingCertificate> {
    let n = r.dim();
    check_nonempty(n)?;
    let m = r.as_matrix();
    let dev = m.matmul(m).sub(&CMatrix::identity(n)).max_abs();
    if dev > tol::PROJECTION {
        return Err(Error::invalid(format!("not a reflection: |R^2 - I| = {dev:e}")));
    }
    check_diagonal(r, 0.0, "reflection")?;
    let id = HermitianMatrix::identity(n);
    let q = id.add(r).scale(0.5);
    let q1 = id.sub(r).scale(0.5);
    let (a, b) = rayon::join(
        || pave_projection_half(&q, eps, config),
        || pave_projection_half(&q1, eps, config),
    );
    let p = refine(&a?.partition, &b?.partition)?;
    Ok(PavingCertificate::measure(m, p, eps, 1.0))
}

/// `[[S, sqrt(I - S^2)], [sqrt(I - S^2), -S]]` for Hermitian `S` with `||S|| <= 1`.
pub fn reflection_dilation(s: &HermitianMatrix) -> Result<HermitianMatrix> {
    let n = s.dim();
    let sm = s.as_matrix();
    let s2 = HermitianMatrix::new(sm.matmul(sm))?;
    let root = psd_sqrt(&HermitianMatrix::identity(n).sub(&s2))?;
    let rm = root.as_matrix();
    HermitianMatrix::new(CMatrix::block2(sm, rm, rm, &sm.scale_real(-1.0)))
}

/// Paves a zero-diagonal Hermitian matrix into `r^2` blocks with compressions
/// at most `eps * ||S||`, by paving a reflection dilation of `S / ||S||` and
/// restricting to the first copy of the indices.
pub fn pave_selfadjoint(s: &HermitianMatrix, eps: f64, config: &PavingConfig) -> Result<PavingCertificate> {
    let n = s.dim();
    check_nonempty(n)?;
    let r = config.blocks_for(eps)?;
    for i in 0..n {
        if s.get(i, i).norm() > tol::PROJECTION {
            return Err(Error::invalid(format!("diagonal entry {i} is not zero")));
        }
    }
    let norm = operator_norm(s.as_matrix());
    if norm <= tol::PROJECTION {
        let p = Partition::new(r * r, vec![0; n])?;
        return Ok(PavingCertificate::measure(s.as_matrix(), p, eps, norm));
    }
    let unit = zero_diagonal(&s.scale(1.0 / norm));
    let dilation = reflection_dilation(&unit)?;
    let cert = pave_reflection(&dilation, eps, config)?;
    let p = Partition::new(cert.partition.block_count, cert.partition.assignment[..n].to_vec())?;
    Ok(PavingCertificate::measure(s.as_matrix(), p, eps, norm))
}

fn zero_diagonal(s: &HermitianMatrix) -> HermitianMatrix {
    let mut m = s.as_matrix().clone();
    for i in 0..m.dim() {
        m[(i, i)] = C64::new(0.0, 0.0);
    }
    HermitianMatrix::new(m).expect("diagonal change keeps symmetry")
}

/// Paves an arbitrary zero-diagonal matrix into `r^4` blocks with compressions
/// at most `2 eps ||T||`, through its Hermitian and skew-Hermitian parts.
pub fn pave_bounded(t: &CMatrix, eps: f64, config: &PavingConfig) -> Result<PavingCertificate> {
    let n = t.dim();
    check_nonempty(n)?;
    check_eps(eps)?;
    for i in 0..n {
        if t[(i, i)].norm() > tol::PROJECTION {
            return Err(Error::invalid(format!("diagonal entry {i} is not zero")));
        }
    }
    let ta = t.adjoint();
    let s1 = HermitianMatrix::new(t.add(&ta).scale_real(0.5))?;
    let is2 = HermitianMatrix::new(t.sub(&ta).scale(C64::new(0.0, 0.5)))?;
    let (a, b) = rayon::join(
        || pave_selfadjoint(&s1, eps, config),
        || pave_selfadjoint(&is2, eps, config),
    );
    let p = refine(&a?.partition, &b?.partition)?;
    Ok(PavingCertificate::measure(t, p, 2.0 * eps, operator_norm(t)))
}

/// Recomputes the largest block compression of `t` under the certificate's
/// partition and checks it against the certified bound.
pub fn verify_paving(t: &CMatrix, cert: &PavingCertificate) -> Result<f64> {
    if t.dim() != cert.partition.len() {
        return Err(Error::invalid("certificate covers a different number of indices"));
    }
    let worst = block_indices(&cert.partition)
        .values()
        .map(|idx| operator_norm(&t.principal(idx)))
        .fold(0.0, f64::max);
    Ok(worst)
}

/// Checks `-eps P_C <= P_C A P_C <= eps P_C` on every block: all eigenvalues of
/// each compression lie in `[-eps - slack, eps + slack]`.
pub fn compression_within(a: &HermitianMatrix, p: &Partition, eps: f64, slack: f64) -> bool {
    block_indices(p).values().all(|idx| {
        let e = eigh(&a.principal(idx));
        e.max() <= eps + slack && e.min() >= -eps - slack
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(rows: &[Vec<f64>]) -> HermitianMatrix {
        HermitianMatrix::from_real(rows).unwrap()
    }

    fn with_r(r: usize) -> PavingConfig {
        PavingConfig {
            r_override: Some(r),
            ..PavingConfig::default()
        }
    }

    fn sorted_blocks(p: &Partition) -> Vec<Vec<usize>> {
        let mut b = p.blocks();
        b.sort();
        b
    }

    #[test]
    fn half_projection_rank_one() {
        let q = herm(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let cert = pave_projection_half(&q, 0.5, &with_r(2)).unwrap();
        assert_eq!(sorted_blocks(&cert.partition), vec![vec![0], vec![1]]);
        for b in &cert.achieved {
            assert!((b.norm - 0.5).abs() < 1e-12);
        }
        assert!(cert.met);
    }

    #[test]
    fn half_projection_rejects_non_projection() {
        let q = herm(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert!(matches!(
            pave_projection_half(&q, 0.5, &with_r(2)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn half_projection_two_pairs() {
        let q = herm(&[
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ]);
        let cert = pave_projection_half(&q, 0.5, &with_r(2)).unwrap();
        assert_eq!(sorted_blocks(&cert.partition), vec![vec![0, 2], vec![1, 3]]);
        assert!((cert.max_achieved() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn block_count_from_eps() {
        let c = PavingConfig::default();
        assert_eq!(c.blocks_for(0.9).unwrap(), 45);
        assert_eq!(c.blocks_for(1.0).unwrap(), 36);
        assert!(matches!(c.blocks_for(0.5), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(c.blocks_for(0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn delta_projection() {
        let half = herm(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(
            pave_projection_delta(&half, 0.5, &PavingConfig::default()),
            Err(Error::InvalidInput(_))
        ));
        assert!((projection_delta_target(0.1) - 0.9).abs() < 1e-15);

        let p = HermitianMatrix::from_real(&vec![vec![0.2; 5]; 5]).unwrap();
        let cols = projection_columns(&p).unwrap();
        let brute = brute_force_partition(&cols, 2, 1000).unwrap();
        assert!((brute.max_block_bessel() - 0.6).abs() < 1e-12);
        let cert = pave_projection_delta(&p, 0.2, &PavingConfig::default()).unwrap();
        assert!(cert.met);
        assert!((cert.max_achieved() - 0.6).abs() < 1e-12);
        assert!(cert.max_achieved() <= projection_delta_target(0.2));
    }

    #[test]
    fn refine_examples() {
        let p = Partition::new(2, vec![0, 0, 1]).unwrap();
        let q = Partition::new(2, vec![0, 1, 1]).unwrap();
        let r = refine(&p, &q).unwrap();
        assert_eq!(r.block_count, 4);
        assert_eq!(sorted_blocks(&r), vec![vec![], vec![0], vec![1], vec![2]]);

        let single = Partition::new(1, vec![0; 3]).unwrap();
        assert_eq!(refine(&p, &single).unwrap(), p);

        let pp = refine(&p, &p).unwrap();
        let nonempty: Vec<_> = sorted_blocks(&pp).into_iter().filter(|b| !b.is_empty()).collect();
        let orig: Vec<_> = sorted_blocks(&p);
        assert_eq!(nonempty, orig);

        let short = Partition::new(1, vec![0; 2]).unwrap();
        assert!(refine(&p, &short).is_err());
    }

    #[test]
    fn reflection_swap() {
        let r = herm(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let cert = pave_reflection(&r, 0.5, &with_r(2)).unwrap();
        assert_eq!(cert.block_count(), 4);
        assert_eq!(cert.partition.nonempty_blocks(), 2);
        assert_eq!(cert.max_achieved(), 0.0);

        let bad = herm(&[vec![0.1, 1.0], vec![1.0, -0.1]]);
        assert!(matches!(pave_reflection(&bad, 0.5, &with_r(2)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn selfadjoint_examples() {
        let s = herm(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let cert = pave_selfadjoint(&s, 0.9, &PavingConfig::default()).unwrap();
        assert_eq!(sorted_blocks(&cert.partition).iter().filter(|b| !b.is_empty()).count(), 2);
        assert_eq!(cert.max_achieved(), 0.0);
        assert_eq!(cert.block_count(), 45 * 45);

        let zero = HermitianMatrix::zeros(3);
        let cert = pave_selfadjoint(&zero, 0.9, &PavingConfig::default()).unwrap();
        assert_eq!(cert.partition.nonempty_blocks(), 1);
        assert_eq!(cert.input_norm, 0.0);
        assert!(cert.met);
    }

    #[test]
    fn selfadjoint_random_three() {
        let s = herm(&[
            vec![0.0, 0.7, -0.3],
            vec![0.7, 0.0, 0.4],
            vec![-0.3, 0.4, 0.0],
        ]);
        let cert = pave_selfadjoint(&s, 0.5, &with_r(16)).unwrap();
        assert_eq!(cert.block_count(), 256);
        assert!(cert.met, "{cert:?}");
        let worst = verify_paving(s.as_matrix(), &cert).unwrap();
        assert!(worst <= 0.5 * operator_norm(s.as_matrix()) + 1e-9);
    }

    #[test]
    fn dilation_is_reflection() {
        let s = herm(&[vec![0.0, 0.6], vec![0.6, 0.0]]);
        let r = reflection_dilation(&s).unwrap();
        let m = r.as_matrix();
        assert!(m.matmul(m).sub(&CMatrix::identity(4)).max_abs() <= 1e-12);
        for i in 0..4 {
            assert!(r.get(i, i).norm() <= 1e-15);
        }
    }

    #[test]
    fn bounded_examples() {
        let t = CMatrix::from_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let cert = pave_bounded(&t, 0.9, &PavingConfig::default()).unwrap();
        assert_eq!(cert.block_count(), 45usize.pow(4));
        assert_eq!(cert.max_achieved(), 0.0);
        assert!((cert.target_eps - 1.8).abs() < 1e-15);

        let h = CMatrix::from_real(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let hs = pave_selfadjoint(&HermitianMatrix::new(h.clone()).unwrap(), 0.9, &PavingConfig::default()).unwrap();
        let hb = pave_bounded(&h, 0.9, &PavingConfig::default()).unwrap();
        assert_eq!(hb.block_count(), hs.block_count().pow(2));
        assert!(hb.met && hs.met);

        let skew = CMatrix::from_real(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let cert = pave_bounded(&skew, 0.9, &PavingConfig::default()).unwrap();
        assert!(cert.met);
        assert_eq!(cert.max_achieved(), 0.0);
    }

    #[test]
    fn sandwich_check() {
        let r = herm(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let whole = Partition::new(1, vec![0, 0]).unwrap();
        assert!(!compression_within(&r, &whole, 0.5, 1e-9));
        let split = Partition::new(2, vec![0, 1]).unwrap();
        assert!(compression_within(&r, &split, 0.0, 1e-12));
    }
}
