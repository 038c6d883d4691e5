//! Real univariate polynomials: arithmetic, Sturm counting, real-rootedness
//! verdicts and largest-root extraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Polynomial with real coefficients in ascending degree order.
///
/// Coefficients below `tol::COEFF_ZERO` times the largest absolute coefficient
/// are zeroed on construction and trailing zeros are dropped, so the last
/// stored coefficient is the leading one. The zero polynomial is `[0.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::PolynomialJson", into = "crate::io::PolynomialJson")]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootStatus {
    RealRooted,
    NotRealRooted,
    Inconclusive,
}

/// Outcome of [`is_real_rooted`]. `real_root_count` counts multiplicity and
/// equals the degree exactly when the status is real-rooted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootednessVerdict {
    pub status: RootStatus,
    pub real_root_count: usize,
    pub distinct_real_roots: usize,
    pub witness: Option<(f64, f64)>,
}

impl RootednessVerdict {
    pub fn is_real_rooted(&self) -> bool {
        self.status == RootStatus::RealRooted
    }
}

impl RealPolynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if max == 0.0 {
            return RealPolynomial { coeffs: vec![0.0] };
        }
        let cut = tol::COEFF_ZERO * max;
        for c in coeffs.iter_mut() {
            if c.abs() < cut {
                *c = 0.0;
            }
        }
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        RealPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        RealPolynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `prod (z - r_i)`.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= r * a;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_monic(&self) -> bool {
        (self.leading() - 1.0).abs() <= tol::MONIC
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `sum |c_l| |x|^l`, the natural scale of rounding error in `eval(x)`.
    pub fn eval_scale(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn differentiate(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + other.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// Polynomial long division, `self = q * divisor + r`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(Error::invalid("division by the zero polynomial"));
        }
        let (q, r) = div_rem_raw(&self.coeffs, &divisor.coeffs);
        Ok((Self::new(q), Self::new(r)))
    }

    /// Number of roots at zero (lowest nonzero coefficient index) and the
    /// quotient `p / z^k`.
    pub fn strip_zero_roots(&self) -> (usize, Self) {
        if self.is_zero() {
            return (0, self.clone());
        }
        let k = self.coeffs.iter().position(|&c| c != 0.0).unwrap();
        (k, RealPolynomial { coeffs: self.coeffs[k..].to_vec() })
    }

    /// `p(s x)` as a polynomial in `x`.
    pub fn rescale_argument(&self, s: f64) -> Self {
        let mut f = 1.0;
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    let v = c * f;
                    f *= s;
                    v
                })
                .collect(),
        )
    }

    /// Same polynomial scaled so that the largest coefficient has absolute
    /// value one. Positive scaling preserves signs and roots.
    fn normalized(&self) -> Self {
        let m = self.max_abs_coeff();
        if m == 0.0 {
            return self.clone();
        }
        RealPolynomial {
            coeffs: self.coeffs.iter().map(|c| c / m).collect(),
        }
    }

    /// Cauchy bound `1 + max |c_i / lead|`; every root has modulus below it.
    pub fn cauchy_bound(&self) -> f64 {
        let lead = self.leading().abs();
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs() / lead))
    }
}

fn div_rem_raw(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let db = b.len() - 1;
    if a.len() < b.len() {
        return (vec![0.0], a.to_vec());
    }
    let mut r = a.to_vec();
    let lead = b[db];
    let mut q = vec![0.0; a.len() - db];
    for k in (0..q.len()).rev() {
        let f = r[k + db] / lead;
        q[k] = f;
        for (j, &bj) in b.iter().enumerate() {
            r[k + j] -= f * bj;
        }
        r[k + db] = 0.0;
    }
    r.truncate(db.max(1));
    (q, r)
}

/// Sturm chain of `p` together with a flag raised when some remainder had a
/// relative size in the ambiguous band between `EUCLID_ZERO` and
/// `EUCLID_AMBIGUOUS`. The last element is (a multiple of) `gcd(p, p')`.
fn sturm_chain(p: &RealPolynomial) -> (Vec<RealPolynomial>, bool) {
    let mut chain = vec![p.normalized()];
    let dp = p.differentiate();
    if dp.is_zero() {
        return (chain, false);
    }
    chain.push(dp.normalized());
    let mut ambiguous = false;
    loop {
        let n = chain.len();
        let (a, b) = (&chain[n - 2], &chain[n - 1]);
        if b.degree() == 0 {
            break;
        }
        let (_, mut r) = div_rem_raw(&a.coeffs, &b.coeffs);
        let scale = a.max_abs_coeff().max(b.max_abs_coeff());
        let rmax = r.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if rmax < tol::EUCLID_ZERO * scale {
            break;
        }
        if rmax < tol::EUCLID_AMBIGUOUS * scale {
            ambiguous = true;
        }
        for c in r.iter_mut() {
            if c.abs() < tol::EUCLID_ZERO * scale {
                *c = 0.0;
            }
            *c = -*c;
        }
        chain.push(RealPolynomial::new(r).normalized());
    }
    (chain, ambiguous)
}

fn sign_changes(chain: &[RealPolynomial], x: f64) -> usize {
    let mut changes = 0;
    let mut last = 0.0f64;
    for q in chain {
        let v = q.eval(x);
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}

fn nudge_off_root(p: &RealPolynomial, x: f64, dir: f64) -> f64 {
    if p.eval(x).abs() <= tol::EUCLID_ZERO * p.eval_scale(x) {
        x + dir * 1e-9 * (1.0 + x.abs())
    } else {
        x
    }
}

/// Number of distinct real roots of `p` in `(lo, hi]`, or `None` when the
/// floating-point chain degenerates (a remainder landed in the ambiguous band).
pub fn sturm_real_root_count(p: &RealPolynomial, lo: f64, hi: f64) -> Result<Option<usize>> {
    if !(lo < hi) {
        return Err(Error::invalid("sturm interval requires lo < hi"));
    }
    if p.is_zero() {
        return Err(Error::invalid("the zero polynomial has no finite root count"));
    }
    let lo = nudge_off_root(p, lo, 1.0);
    let hi = nudge_off_root(p, hi, 1.0);
    let (chain, ambiguous) = sturm_chain(p);
    if ambiguous {
        return Ok(None);
    }
    Ok(Some(sign_changes(&chain, lo).saturating_sub(sign_changes(&chain, hi))))
}

/// Tri-state real-rootedness certificate.
///
/// Roots at zero are split off exactly. For the rest, the Sturm chain of `q`
/// ends at `g = gcd(q, q')`, so `q / g` is the square-free part and
/// `deg q - deg g` is the number of distinct roots; `q` is real-rooted exactly
/// when Sturm finds that many in the Cauchy interval.
pub fn is_real_rooted(p: &RealPolynomial) -> RootednessVerdict {
    let (zeros, q) = p.strip_zero_roots();
    if p.is_zero() || q.degree() == 0 {
        return RootednessVerdict {
            status: RootStatus::RealRooted,
            real_root_count: zeros,
            distinct_real_roots: usize::from(zeros > 0),
            witness: (zeros > 0).then_some((0.0, 0.0)),
        };
    }
    let (chain, ambiguous) = sturm_chain(&q);
    let gcd_degree = chain.last().unwrap().degree();
    let distinct = q.degree() - gcd_degree;
    let b = q.cauchy_bound();
    let found = sign_changes(&chain, -b).saturating_sub(sign_changes(&chain, b));
    let total_distinct = found + usize::from(zeros > 0);
    let witness = Some((-b.max(0.0), b));
    if ambiguous {
        return RootednessVerdict {
            status: RootStatus::Inconclusive,
            real_root_count: found + zeros,
            distinct_real_roots: total_distinct,
            witness,
        };
    }
    if found == distinct {
        RootednessVerdict {
            status: RootStatus::RealRooted,
            real_root_count: p.degree(),
            distinct_real_roots: total_distinct,
            witness,
        }
    } else {
        RootednessVerdict {
            status: RootStatus::NotRealRooted,
            real_root_count: found + zeros,
            distinct_real_roots: total_distinct,
            witness,
        }
    }
}

/// Largest real root of a real-rooted polynomial.
///
/// Newton from the Cauchy bound decreases monotonically onto the largest root
/// of a real-rooted polynomial. A step that moves right by more than
/// `1e-9 (1 + |x|)` while `p(x)` is clearly nonzero means the input was not
/// real-rooted. When the root found looks multiple (tiny derivative), the
/// answer is sharpened by taking the largest root of successive derivatives,
/// which coincide with it for an exact multiple root.
pub fn maxroot(p: &RealPolynomial) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::invalid("the zero polynomial has no largest root"));
    }
    let p = if p.leading() < 0.0 { p.scale(-1.0) } else { p.clone() };
    let (zeros, q) = p.strip_zero_roots();
    if q.degree() == 0 {
        return if zeros > 0 {
            Ok(0.0)
        } else {
            Err(Error::invalid("a nonzero constant has no roots"))
        };
    }
    let x = refined_maxroot(&q)?;
    Ok(if zeros > 0 { x.max(0.0) } else { x })
}

fn refined_maxroot(q: &RealPolynomial) -> Result<f64> {
    let x0 = newton_maxroot(q)?;
    let dq = q.differentiate();
    if dq.eval(x0).abs() > tol::MULTIPLICITY_TRIGGER * dq.eval_scale(x0) {
        return Ok(x0);
    }
    let mut derivs = vec![q.clone(), dq];
    for j in 1..q.degree() {
        if derivs.len() <= j + 1 {
            let next = derivs[j].differentiate();
            derivs.push(next);
        }
        let xj = match newton_maxroot(&derivs[j]) {
            Ok(x) if x <= x0 => x,
            _ => continue,
        };
        let vanishes = derivs[..j]
            .iter()
            .all(|d| d.eval(xj).abs() <= tol::ROOT_NOISE * d.eval_scale(xj));
        if !vanishes {
            continue;
        }
        let next = &derivs[j + 1];
        // x_j must be a clearly simple root of the j-th derivative.
        if next.eval(xj).abs() > tol::MULTIPLICITY_TRIGGER * next.eval_scale(xj) {
            return Ok(xj);
        }
    }
    Ok(x0)
}

/// Plain Newton from the Cauchy bound on a polynomial with no zero roots.
fn newton_maxroot(q: &RealPolynomial) -> Result<f64> {
    if q.degree() == 1 {
        return Ok(-q.coeffs[0] / q.coeffs[1]);
    }
    let lead_sign = q.leading().signum();
    let dq = q.differentiate();
    let mut x = q.cauchy_bound();
    if lead_sign < 0.0 {
        return Err(Error::invalid("maxroot requires a positive leading coefficient"));
    }
    let mut step = 0.0;
    for _ in 0..tol::NEWTON_MAX_ITERS {
        let v = q.eval(x);
        // Rounding level of Horner evaluation at x.
        let noise = (2 * q.degree() + 4) as f64 * f64::EPSILON * q.eval_scale(x);
        if v.abs() <= noise {
            return Ok(x);
        }
        let d = dq.eval(x);
        if d <= 0.0 {
            if v.abs() <= noise * 10.0 {
                return Ok(x);
            }
            return Err(Error::NotRealRooted(format!(
                "non-positive derivative {d:e} above the largest root at x = {x}"
            )));
        }
        step = v / d;
        if step < 0.0 {
            if -step <= 1e-9 * (1.0 + x.abs()) || v.abs() <= noise * 10.0 {
                return Ok(x);
            }
            return Err(Error::NotRealRooted(format!(
                "Newton iterate moved right by {:e} at x = {x}",
                -step
            )));
        }
        let next = x - step;
        if step < tol::NEWTON_STEP * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    // Root bracketed in [x - deg * step, x]; bisect if the sign changes there.
    let lo = x - q.degree() as f64 * step;
    let (mut a, mut b) = (lo, x);
    if q.eval(a) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if q.eval(mid) > 0.0 {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= tol::NEWTON_STEP * (1.0 + b.abs()) {
                break;
            }
        }
        return Ok(0.5 * (a + b));
    }
    Ok(x)
}

/// `sum t_i p_i` for weights on the probability simplex and equal degrees.
pub fn convex_combination(ps: &[RealPolynomial], ts: &[f64]) -> Result<RealPolynomial> {
    if ps.is_empty() || ps.len() != ts.len() {
        return Err(Error::invalid("need one weight per polynomial and at least one"));
    }
    if ts.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::invalid("weights must be non-negative"));
    }
    let total: f64 = ts.iter().sum();
    if (total - 1.0).abs() > tol::PROB_SUM {
        return Err(Error::invalid(format!("weights sum to {total}, not 1")));
    }
    let d = ps[0].degree();
    if ps.iter().any(|p| p.degree() != d) {
        return Err(Error::invalid("convex combination of polynomials of different degrees"));
    }
    let mut c = vec![0.0; d + 1];
    for (p, &t) in ps.iter().zip(ts) {
        for (ci, &pc) in c.iter_mut().zip(p.coeffs()) {
            *ci += t * pc;
        }
    }
    Ok(RealPolynomial::new(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(c: &[f64]) -> RealPolynomial {
        RealPolynomial::new(c.to_vec())
    }

    #[test]
    fn differentiate_examples() {
        assert_eq!(poly(&[0.5, -2.0, 1.0]).differentiate().coeffs(), &[-2.0, 2.0]);
        assert!(poly(&[5.0]).differentiate().is_zero());
        assert_eq!(poly(&[0.0, 0.0, 0.0, 1.0]).differentiate().coeffs(), &[0.0, 0.0, 3.0]);
    }

    #[test]
    fn thresholding_sets_degree() {
        let p = poly(&[1.0, 2.0, 1e-15]);
        assert_eq!(p.degree(), 1);
        assert!(poly(&[0.0, 0.0]).is_zero());
        assert!(poly(&[2.0, 1.0]).is_monic());
        assert!(!poly(&[2.0, 1.5]).is_monic());
    }

    #[test]
    fn sturm_examples() {
        assert_eq!(sturm_real_root_count(&poly(&[-1.0, 0.0, 1.0]), -2.0, 2.0).unwrap(), Some(2));
        assert_eq!(sturm_real_root_count(&poly(&[1.0, 0.0, 1.0]), -10.0, 10.0).unwrap(), Some(0));
        assert_eq!(sturm_real_root_count(&poly(&[0.5, -2.0, 1.0]), 0.0, 2.0).unwrap(), Some(2));
        // Root exactly at an endpoint: (lo, hi] includes hi, excludes lo.
        assert_eq!(sturm_real_root_count(&poly(&[-1.0, 0.0, 1.0]), -1.0, 1.0).unwrap(), Some(1));
        assert!(sturm_real_root_count(&poly(&[1.0, 1.0]), 1.0, 1.0).is_err());
    }

    #[test]
    fn real_rootedness_examples() {
        let cube = poly(&[-1.0, 3.0, -3.0, 1.0]);
        let v = is_real_rooted(&cube);
        assert_eq!(v.status, RootStatus::RealRooted);
        assert_eq!(v.distinct_real_roots, 1);
        assert_eq!(v.real_root_count, 3);
        let v = is_real_rooted(&poly(&[1.0, 0.0, 1.0]));
        assert_eq!(v.status, RootStatus::NotRealRooted);
        assert_eq!(v.real_root_count, 0);
        let v = is_real_rooted(&poly(&[0.5, -2.0, 1.0]));
        assert!(v.is_real_rooted());
        assert_eq!(v.real_root_count, 2);
        // z^2 (z^2 + 1): two real roots at zero, two complex.
        let v = is_real_rooted(&poly(&[0.0, 0.0, 1.0, 0.0, 1.0]));
        assert_eq!(v.status, RootStatus::NotRealRooted);
    }

    #[test]
    fn maxroot_examples() {
        let r = maxroot(&poly(&[0.5, -2.0, 1.0])).unwrap();
        assert!((r - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
        assert_eq!(maxroot(&poly(&[0.0, 0.0, 0.0, 1.0])).unwrap(), 0.0);
        assert!((maxroot(&poly(&[0.0, -1.0, 1.0])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn maxroot_rejects_complex_pair_above() {
        // (z - 1)((z - 3)^2 + 1): Newton from the right stalls near 3.
        let p = RealPolynomial::from_roots(&[1.0]).mul(&poly(&[10.0, -6.0, 1.0]));
        assert!(matches!(maxroot(&p), Err(Error::NotRealRooted(_))));
    }

    #[test]
    fn maxroot_high_multiplicity() {
        let p = RealPolynomial::from_roots(&[0.5; 12]);
        let r = maxroot(&p).unwrap();
        assert!((r - 0.5).abs() < 1e-11, "got {r}");
        let q = RealPolynomial::from_roots(&[0.25, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
        let r = maxroot(&q).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-11, "got {r}");
    }

    #[test]
    fn convex_combination_examples() {
        let a = poly(&[-1.0, 1.0]);
        let b = poly(&[-3.0, 1.0]);
        assert_eq!(convex_combination(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap().coeffs(), &[-2.0, 1.0]);
        assert_eq!(convex_combination(&[a.clone(), b.clone()], &[1.0, 0.0]).unwrap(), a);
        let c = convex_combination(&[poly(&[-1.0, 0.0, 1.0]), poly(&[3.0, -4.0, 1.0])], &[0.5, 0.5]).unwrap();
        assert_eq!(c.coeffs(), &[1.0, -2.0, 1.0]);
        assert!(convex_combination(&[a.clone(), poly(&[1.0, 0.0, 1.0])], &[0.5, 0.5]).is_err());
        assert!(convex_combination(&[a, b], &[0.7, 0.7]).is_err());
    }

    #[test]
    fn div_rem_roundtrip() {
        let a = poly(&[1.0, -2.0, 0.5, 3.0]);
        let b = poly(&[2.0, 1.0]);
        let (q, r) = a.div_rem(&b).unwrap();
        let back = q.mul(&b).add(&r);
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn maxroot_of_product_of_linear_factors(roots in prop::collection::vec(-5.0f64..5.0, 1..8)) {
            let p = RealPolynomial::from_roots(&roots);
            let expected = roots.iter().cloned().fold(f64::MIN, f64::max);
            let r = maxroot(&p).unwrap();
            // Roots closer than ~1e-4 are ill-conditioned in the coefficients.
            let mut sorted = roots.clone();
            sorted.sort_by(f64::total_cmp);
            let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::MAX, f64::min);
            if gap > 1e-3 {
                prop_assert!((r - expected).abs() < 1e-8 * (1.0 + expected.abs()), "{r} vs {expected}");
            }
            prop_assert!(r <= expected + 1e-6);
        }

        #[test]
        fn products_of_linear_factors_are_real_rooted(roots in prop::collection::vec(-3.0f64..3.0, 1..7)) {
            let mut sorted = roots.clone();
            sorted.sort_by(f64::total_cmp);
            let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::MAX, f64::min);
            prop_assume!(gap > 1e-2);
            let v = is_real_rooted(&RealPolynomial::from_roots(&roots));
            prop_assert_eq!(v.status, RootStatus::RealRooted);
            prop_assert_eq!(v.real_root_count, roots.len());
        }

        #[test]
        fn quadratic_verdict_matches_discriminant(b in -4.0f64..4.0, c in -4.0f64..4.0) {
            let disc = b * b - 4.0 * c;
            prop_assume!(disc.abs() > 1e-3);
            let v = is_real_rooted(&RealPolynomial::new(vec![c, b, 1.0]));
            let expected = if disc > 0.0 { RootStatus::RealRooted } else { RootStatus::NotRealRooted };
            prop_assert_eq!(v.status, expected);
        }
    }
}
