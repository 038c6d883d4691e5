//! Conditional expected characteristic polynomials of the block lift.
//!
//! Lifting `u_1..u_m` in `C^d` to `r` blocks sends index `i` to `sqrt(r) u_i` in
//! a uniformly random block. With some indices fixed, the expected matrix of
//! index `i` is block-diagonal with weight `a_ik u_i u_i*` in block `k`, where
//! `a_ik` is `r` (fixed to `k`), `0` (fixed elsewhere) or `1` (free).
//!
//! Expanding each block determinant by Cauchy–Binet and applying
//! `prod (1 - d_{z_i})` keeps only families of pairwise disjoint index sets
//! `T_1..T_r`, so in the rescaled variable `y = z / r`
//!
//! ```text
//! mu(r y) / r^{rd} = sum_s y^{rd - s} sum_{disjoint T_k, sum |T_k| = s}
//!                    prod_k (-1)^{|T_k|} prod_{i in T_k} (a_ik / r) det Gram(T_k)
//! ```
//!
//! Fixed indices can only appear in their own block, so each block collapses
//! to a function of the free set, graded by how many of its fixed indices were
//! used. The disjoint products become subset convolutions over the free
//! indices only.

use rayon::prelude::*;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::linalg::VectorSystem;
use crate::poly::{maxroot, RealPolynomial};

/// Hard ceiling on the number of indices: the Gram-determinant table is dense
/// over all subsets.
const MAX_INDICES: usize = 26;

pub(crate) struct LiftedEvaluator {
    m: usize,
    r: usize,
    rank: usize,
    /// `det Gram(T)` for every subset mask `T` of size at most `rank`.
    gram: Vec<TwoFloat>,
}

const ZERO: TwoFloat = TwoFloat::from_f64(0.0);

/// Relative derivative size below which a double-double root counts as
/// multiple, and relative value below which a polynomial vanishes.
const MULTIPLE_TRIGGER: f64 = 1e-12;
const VANISH: f64 = 1e-26;

/// Polynomial in `y` with double-double coefficients, highest degree first.
pub(crate) struct DdPoly {
    desc: Vec<TwoFloat>,
}

impl DdPoly {
    pub(crate) fn rounded(&self) -> RealPolynomial {
        RealPolynomial::new(self.desc.iter().rev().map(|&c| f64::from(c)).collect())
    }

    /// Largest root. Newton from above with double-double evaluation, then
    /// the same multiplicity refinement as [`maxroot`]: when the root looks
    /// multiple, the largest root of the first derivative that is a clearly
    /// simple root is taken instead.
    pub(crate) fn maxroot(&self) -> Result<f64> {
        let rounded = self.rounded();
        // Validates real-rootedness and handles the degenerate cases.
        let fallback = maxroot(&rounded)?;
        let (zeros, _) = rounded.strip_zero_roots();
        let q: Vec<TwoFloat> = self.desc.iter().rev().skip(zeros).copied().collect();
        if q.len() < 3 {
            return Ok(fallback);
        }
        let x0 = newton_dd(&q).unwrap_or(fallback);
        let clamp = |x: f64| if zeros > 0 { x.max(0.0) } else { x };
        let mut derivs = vec![q.clone(), derivative(&q)];
        let (v, scale) = eval_dd(&derivs[1], x0);
        if v.abs() > MULTIPLE_TRIGGER * scale {
            return Ok(clamp(x0));
        }
        let reach = 1e-6 * (1.0 + x0.abs());
        for j in 1..q.len() - 1 {
            if derivs.len() <= j + 1 {
                let next = derivative(&derivs[j]);
                derivs.push(next);
            }
            let Some(xj) = newton_dd(&derivs[j]).filter(|&x| x <= x0 + reach) else {
                continue;
            };
            let vanishes = derivs[..j].iter().all(|d| {
                let (v, scale) = eval_dd(d, xj);
                v.abs() <= VANISH * scale
            });
            if !vanishes {
                continue;
            }
            let (v, scale) = eval_dd(&derivs[j + 1], xj);
            if v.abs() > MULTIPLE_TRIGGER * scale {
                return Ok(clamp(xj));
            }
        }
        Ok(clamp(x0))
    }
}

fn derivative(asc: &[TwoFloat]) -> Vec<TwoFloat> {
    asc.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * TwoFloat::from(i as f64))
        .collect()
}

/// `p(x)` in double-double, rounded, with `sum |c_i| |x|^i`.
fn eval_dd(asc: &[TwoFloat], x: f64) -> (f64, f64) {
    let (v, _) = horner(asc, x);
    let ax = x.abs();
    let scale = asc.iter().rev().fold(0.0, |acc, c| acc * ax + c.hi().abs());
    (f64::from(v), scale)
}

/// `(p(x), p'(x))` by Horner in double-double, ascending coefficients.
fn horner(asc: &[TwoFloat], x: f64) -> (TwoFloat, TwoFloat) {
    let x = TwoFloat::from(x);
    let mut p = ZERO;
    let mut d = ZERO;
    for &c in asc.iter().rev() {
        d = d * x + p;
        p = p * x + c;
    }
    (p, d)
}

/// Newton from the Cauchy bound, stopping once an iterate would cross the
/// root. `None` for a non-positive leading coefficient or constant input.
fn newton_dd(asc: &[TwoFloat]) -> Option<f64> {
    let n = asc.len();
    if n < 2 || asc[n - 1].hi() <= 0.0 {
        return None;
    }
    if n == 2 {
        return Some(f64::from(div(-asc[0], asc[1])));
    }
    let lead = asc[n - 1].hi();
    let mut x = 1.0 + asc[..n - 1].iter().fold(0.0f64, |m, c| m.max((c.hi() / lead).abs()));
    for _ in 0..2000 {
        let (v, d) = horner(asc, x);
        if v.hi() <= 0.0 || d.hi() <= 0.0 {
            break;
        }
        let step = f64::from(div(v, d));
        let next = x - step;
        if !(step > 0.0) || next >= x || horner(asc, next).0.hi() < 0.0 {
            break;
        }
        x = next;
        if step <= 1e-17 * (1.0 + x.abs()) {
            break;
        }
    }
    Some(x)
}

/// Double-double quotient refined by two correction steps; the crate's own
/// division stops at double precision.
fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// Complex double-double scalar, only what the Gram factorization needs.
#[derive(Clone, Copy)]
struct Cdd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Cdd {
    fn norm_sqr(self) -> TwoFloat {
        self.re * self.re + self.im * self.im
    }

    fn sub_mul(self, a: Cdd, b: Cdd) -> Cdd {
        Cdd {
            re: self.re - (a.re * b.re - a.im * b.im),
            im: self.im - (a.re * b.im + a.im * b.re),
        }
    }

    fn conj_scaled(self, s: TwoFloat) -> Cdd {
        Cdd {
            re: self.re * s,
            im: -self.im * s,
        }
    }
}

/// Determinants of all principal Gram submatrices up to size `rank`, in
/// double-double. A depth-first walk over subsets in increasing index order
/// borders an `L D L*` factorization one index at a time, so each subset
/// costs one triangular solve. Subsets through a vanishing pivot are linearly
/// dependent and keep determinant zero together with all their supersets.
fn gram_determinants(v: &VectorSystem, rank: usize) -> Vec<TwoFloat> {
    let m = v.len();
    let g: Vec<Vec<Cdd>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let (mut re, mut im) = (ZERO, ZERO);
                    for (a, b) in v.vector(i).iter().zip(v.vector(j)) {
                        // a * conj(b)
                        re += TwoFloat::new_mul(a.re, b.re) + TwoFloat::new_mul(a.im, b.im);
                        im += TwoFloat::new_mul(a.im, b.re) - TwoFloat::new_mul(a.re, b.im);
                    }
                    Cdd { re, im }
                })
                .collect()
        })
        .collect();
    let mut out = vec![ZERO; 1 << m];
    out[0] = TwoFloat::from(1.0);

    struct Walk<'a> {
        g: &'a [Vec<Cdd>],
        rank: usize,
        out: &'a mut [TwoFloat],
        idx: Vec<usize>,
        l: Vec<Vec<Cdd>>,
        d: Vec<TwoFloat>,
    }

    impl Walk<'_> {
        fn visit(&mut self, mask: usize, det: TwoFloat, start: usize) {
            let k = self.idx.len();
            for j in start..self.g.len() {
                let mut y: Vec<Cdd> = Vec::with_capacity(k);
                for s in 0..k {
                    let mut acc = self.g[self.idx[s]][j];
                    for t in 0..s {
                        acc = acc.sub_mul(self.l[s][t], y[t]);
                    }
                    y.push(acc);
                }
                let gjj = self.g[j][j].re;
                let mut pivot = gjj;
                for t in 0..k {
                    pivot -= div(y[t].norm_sqr(), self.d[t]);
                }
                if !(pivot.hi() > 1e-28 * gjj.hi().max(f64::MIN_POSITIVE)) {
                    continue;
                }
                let next = mask | (1 << j);
                let det_next = det * pivot;
                self.out[next] = det_next;
                if k + 1 < self.rank {
                    let row: Vec<Cdd> = (0..k).map(|t| y[t].conj_scaled(div(TwoFloat::from(1.0), self.d[t]))).collect();
                    self.idx.push(j);
                    self.l.push(row);
                    self.d.push(pivot);
                    self.visit(next, det_next, j + 1);
                    self.idx.pop();
                    self.l.pop();
                    self.d.pop();
                }
            }
        }
    }

    let mut walk = Walk {
        g: &g,
        rank,
        out: &mut out,
        idx: Vec::new(),
        l: Vec::new(),
        d: Vec::new(),
    };
    if rank > 0 {
        walk.visit(0, TwoFloat::from(1.0), 0);
    }
    out
}

/// Free indices and the grade cap (number of fixed indices).
struct Space {
    n: usize,
    width: usize,
    gmap: Vec<u64>,
}

/// Graded set function: `val[mask * width + q]`, accumulated in double-double
/// so that sibling conditionals agree far below the root sensitivity.
#[derive(Clone)]
struct Func {
    val: Vec<TwoFloat>,
    top: usize,
}

impl Space {
    fn new(free: &[usize], fixed_count: usize) -> Self {
        let n = free.len();
        let mut gmap = vec![0u64; 1 << n];
        for w in 1..(1usize << n) {
            let low = w.trailing_zeros() as usize;
            gmap[w] = gmap[w & (w - 1)] | (1u64 << free[low]);
        }
        Space {
            n,
            width: fixed_count + 1,
            gmap,
        }
    }

    fn size(&self) -> usize {
        1 << self.n
    }

    fn unit(&self) -> Func {
        let mut val = vec![ZERO; self.size() * self.width];
        val[0] = TwoFloat::from(1.0);
        Func { val, top: 0 }
    }
}

/// Estimated multiply-adds for one greedy run over `m` indices.
pub(crate) fn greedy_work(m: usize, r: usize) -> f64 {
    let log_r = (r.max(2) as f64).log2().ceil() + 2.0;
    (0..m)
        .map(|i| {
            let n = (m - i - 1) as i32;
            let blocks = (i + 1).min(r) as f64;
            (4.0 * blocks + log_r) * 3f64.powi(n) * ((i + 2) as f64).powi(2).min(16.0)
        })
        .sum::<f64>()
        + log_r * 3f64.powi(m as i32)
}

impl LiftedEvaluator {
    pub(crate) fn new(v: &VectorSystem, r: usize) -> Result<Self> {
        let m = v.len();
        if m > MAX_INDICES {
            return Err(Error::budget("lifted evaluator indices", m as f64, MAX_INDICES as f64));
        }
        let rank = v.dim().min(m);
        let gram = gram_determinants(v, rank);
        Ok(LiftedEvaluator { m, r, rank, gram })
    }

    /// Block function for a block whose fixed indices are `p` (global mask).
    fn block(&self, sp: &Space, p: u64) -> Func {
        let w = sp.width;
        let mut subs = Vec::new();
        let mut q = p;
        loop {
            let c = q.count_ones() as usize;
            if c <= self.rank && c < w {
                subs.push((q, c));
            }
            if q == 0 {
                break;
            }
            q = (q - 1) & p;
        }
        let inv_r = div(TwoFloat::from(-1.0), TwoFloat::from(self.r as f64));
        let mut val = vec![ZERO; sp.size() * w];
        let mut top = 0;
        for mask in 0..sp.size() {
            let k = mask.count_ones() as usize;
            if k > self.rank {
                continue;
            }
            let gw = sp.gmap[mask];
            let weight = inv_r.powi(k as i32);
            for &(q, c) in &subs {
                if k + c > self.rank {
                    continue;
                }
                let gv = self.gram[(gw | q) as usize];
                if gv.hi() == 0.0 {
                    continue;
                }
                let term = weight * gv;
                val[mask * w + c] += if c % 2 == 0 { term } else { -term };
                top = top.max(c);
            }
        }
        Func { val, top }
    }

    /// Subset convolution `out[S] = sum_{T subset S} a[T] b[S \ T]`, grades added.
    fn conv(sp: &Space, a: &Func, b: &Func) -> Func {
        let w = sp.width;
        let size = sp.size();
        let support = |f: &Func| -> Vec<usize> {
            (0..size)
                .filter(|&t| f.val[t * w..t * w + f.top + 1].iter().any(|x| x.hi() != 0.0))
                .collect()
        };
        let (sa, sb) = (support(a), support(b));
        let (left, right, lsupp) = if sa.len() <= sb.len() { (a, b, sa) } else { (b, a, sb) };
        let top = (a.top + b.top).min(w - 1);
        let mut out = vec![ZERO; size * w];
        let full = size - 1;
        for t in lsupp {
            let comp = full & !t;
            let lt = &left.val[t * w..t * w + left.top + 1];
            let mut x = comp;
            loop {
                let base = x * w;
                let rx = &right.val[base..base + right.top + 1];
                let s = (t | x) * w;
                for (q1, &lv) in lt.iter().enumerate() {
                    if lv.hi() == 0.0 {
                        continue;
                    }
                    for (q2, &rv) in rx.iter().enumerate() {
                        if q1 + q2 <= top {
                            out[s + q1 + q2] += lv * rv;
                        }
                    }
                }
                if x == 0 {
                    break;
                }
                x = (x - 1) & comp;
            }
        }
        Func { val: out, top }
    }

    fn power(sp: &Space, f: &Func, mut e: usize) -> Func {
        let mut result = sp.unit();
        let mut base = f.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = Self::conv(sp, &result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = Self::conv(sp, &base, &base);
            }
        }
        result
    }

    /// Coefficients `c_s` of `sum_s c_s y^{m - s}` from the convolution of `a`
    /// with a single block function `b`. `b` is ranked-zeta transformed so the
    /// last convolution only needs the total size of each disjoint pair.
    fn finish(&self, sp: &Space, a: &Func, b: &Func) -> Vec<TwoFloat> {
        let w = sp.width;
        let size = sp.size();
        let ranks = self.rank.min(sp.n);
        let mut hat: Vec<Vec<TwoFloat>> = vec![vec![ZERO; size * w]; ranks + 1];
        for mask in 0..size {
            let k = mask.count_ones() as usize;
            if k <= ranks {
                hat[k][mask * w..mask * w + w].copy_from_slice(&b.val[mask * w..mask * w + w]);
            }
        }
        for h in hat.iter_mut() {
            for bit in 0..sp.n {
                let step = 1usize << bit;
                for x in 0..size {
                    if x & step != 0 {
                        for q in 0..=b.top {
                            let add = h[(x ^ step) * w + q];
                            h[x * w + q] += add;
                        }
                    }
                }
            }
        }
        let mut c = vec![ZERO; self.m + 1];
        let full = size - 1;
        for t in 0..size {
            let at = &a.val[t * w..t * w + a.top + 1];
            if at.iter().all(|x| x.hi() == 0.0) {
                continue;
            }
            let comp = full & !t;
            let kt = t.count_ones() as usize;
            for (bk, h) in hat.iter().enumerate() {
                let hb = &h[comp * w..comp * w + b.top + 1];
                for (q1, &av) in at.iter().enumerate() {
                    if av.hi() == 0.0 {
                        continue;
                    }
                    for (q2, &bv) in hb.iter().enumerate() {
                        let s = kt + bk + q1 + q2;
                        if s <= self.m {
                            c[s] += av * bv;
                        }
                    }
                }
            }
        }
        c
    }

    fn to_poly(&self, c: Vec<TwoFloat>) -> DdPoly {
        DdPoly { desc: c }
    }

    fn layout(&self, assignment: &[Option<usize>]) -> (Vec<usize>, Vec<u64>) {
        let free: Vec<usize> = (0..self.m).filter(|&i| assignment[i].is_none()).collect();
        let mut fixed = vec![0u64; self.r];
        for (i, a) in assignment.iter().enumerate() {
            if let Some(k) = a {
                fixed[*k] |= 1u64 << i;
            }
        }
        (free, fixed)
    }

    /// Conditional expected characteristic polynomial in `y = z / r` (up to a
    /// power of `y`), for an arbitrary partial assignment.
    pub(crate) fn poly(&self, assignment: &[Option<usize>]) -> Result<DdPoly> {
        self.check_assignment(assignment)?;
        let (free, fixed) = self.layout(assignment);
        let sp = Space::new(&free, self.m - free.len());
        let nonempty: Vec<usize> = (0..self.r).filter(|&k| fixed[k] != 0).collect();
        let empty = self.r - nonempty.len();
        let e = self.block(&sp, 0);
        let c = if let Some((&last, rest)) = nonempty.split_last() {
            let mut a = Self::power(&sp, &e, empty);
            for &k in rest {
                a = Self::conv(&sp, &a, &self.block(&sp, fixed[k]));
            }
            self.finish(&sp, &a, &self.block(&sp, fixed[last]))
        } else {
            let a = Self::power(&sp, &e, empty - 1);
            self.finish(&sp, &a, &e)
        };
        Ok(self.to_poly(c))
    }

    /// Polynomials for placing index `i` into each distinct candidate block:
    /// every non-empty block, plus the lowest-numbered empty block (all empty
    /// blocks are interchangeable). Returned in increasing block order.
    pub(crate) fn candidates(
        &self,
        assignment: &[Option<usize>],
        i: usize,
    ) -> Result<Vec<(usize, DdPoly)>> {
        self.check_assignment(assignment)?;
        if assignment[i].is_some() {
            return Err(Error::Internal(format!("index {i} already assigned")));
        }
        let (mut free, fixed) = self.layout(assignment);
        free.retain(|&j| j != i);
        let sp = Space::new(&free, self.m - free.len());
        let nonempty: Vec<usize> = (0..self.r).filter(|&k| fixed[k] != 0).collect();
        let empty = self.r - nonempty.len();
        let e = self.block(&sp, 0);
        let hs: Vec<Func> = nonempty.iter().map(|&k| self.block(&sp, fixed[k])).collect();
        let nb = hs.len();

        let e_minus = if empty > 0 { Some(Self::power(&sp, &e, empty - 1)) } else { None };
        let e_all = match &e_minus {
            Some(p) => Self::conv(&sp, p, &e),
            None => sp.unit(),
        };
        // prefix[k] = e_all * h_0 * ... * h_{k-1}; suffix[k] = h_{k+1} * ... * h_{nb-1}
        let mut prefix = Vec::with_capacity(nb);
        let mut acc = e_all;
        for h in &hs {
            let next = Self::conv(&sp, &acc, h);
            prefix.push(acc);
            acc = next;
        }
        let mut suffix: Vec<Func> = (0..nb).map(|_| sp.unit()).collect();
        let mut tail = sp.unit();
        for k in (0..nb).rev() {
            let next = Self::conv(&sp, &tail, &hs[k]);
            suffix[k] = std::mem::replace(&mut tail, next);
        }
        let all_h = tail;
        let bit = 1u64 << i;

        let mut jobs: Vec<(usize, Option<usize>)> = nonempty.iter().enumerate().map(|(p, &k)| (k, Some(p))).collect();
        if empty > 0 {
            let k = (0..self.r).find(|&k| fixed[k] == 0).unwrap();
            jobs.push((k, None));
        }
        let mut out: Vec<(usize, DdPoly)> = jobs
            .par_iter()
            .map(|&(k, pos)| {
                let (a, b) = match pos {
                    Some(p) => (
                        Self::conv(&sp, &prefix[p], &suffix[p]),
                        self.block(&sp, fixed[k] | bit),
                    ),
                    None => (
                        Self::conv(&sp, e_minus.as_ref().unwrap(), &all_h),
                        self.block(&sp, bit),
                    ),
                };
                (k, self.to_poly(self.finish(&sp, &a, &b)))
            })
            .collect();
        out.sort_by_key(|(k, _)| *k);
        Ok(out)
    }

    fn check_assignment(&self, assignment: &[Option<usize>]) -> Result<()> {
        if assignment.len() != self.m {
            return Err(Error::invalid("assignment length differs from the number of vectors"));
        }
        if assignment.iter().flatten().any(|&k| k >= self.r) {
            return Err(Error::invalid("assignment refers to a block beyond r"));
        }
        Ok(())
    }
}
