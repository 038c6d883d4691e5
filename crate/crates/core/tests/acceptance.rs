//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//! All instances come from seeded ChaCha8 streams, so reruns are identical.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weaver::barrier::{barrier_on_diagonal, barrier_shift_check, mcp_certificate};
use weaver::corpus;
use weaver::frames::{
    bessel_riesz_complement_check, biorthogonality_error, dual_riesz_system, feichtinger_partition,
    fourier_frame_gram, fourier_partition, naimark_complement, riesz_bounds, schur_horn_frame, FrameConfig,
};
use weaver::linalg::{char_poly, eigh, frame_operator, gram_matrix, operator_norm, CMatrix, HermitianMatrix};
use weaver::mixed::{expected_char_poly, expected_char_poly_enumeration, mixed_char_poly, MatrixTuple};
use weaver::partition::{brute_force_partition, greedy_partition, per_block_bessel, weaver_bound, GreedyConfig};
use weaver::paving::{pave_bounded, pave_selfadjoint, projection_columns, PavingConfig};
use weaver::poly::{is_real_rooted, RealPolynomial, RootStatus};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + stream)
}

fn relative_coeff_error(a: &RealPolynomial, b: &RealPolynomial) -> f64 {
    let scale = a.max_abs_coeff().max(b.max_abs_coeff()).max(f64::MIN_POSITIVE);
    let n = a.coeffs().len().max(b.coeffs().len());
    (0..n)
        .map(|i| {
            let x = a.coeffs().get(i).copied().unwrap_or(0.0);
            let y = b.coeffs().get(i).copied().unwrap_or(0.0);
            (x - y).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Tuples shared by the root bound and barrier criteria.
fn isotropic_tuples() -> Vec<MatrixTuple> {
    let mut r = rng(1);
    (0..200)
        .map(|i| {
            let d = 2 + i % 3;
            let m = 2 + (i / 3) % 5;
            corpus::identity_tuple(&mut r, d, m)
        })
        .collect()
}

fn c1_mcp(tuples: &[MatrixTuple], polys: &mut Vec<RealPolynomial>) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for t in tuples {
        let cert = match mcp_certificate(t) {
            Ok(c) => c,
            Err(e) => return outcome(false, format!("certificate error: {e}")),
        };
        let bound = (1.0 + cert.epsilon.sqrt()).powi(2);
        worst = worst.max(cert.achieved_maxroot - bound);
        polys.push(mixed_char_poly(t).expect("computed above"));
    }
    outcome(worst <= 1e-9, format!("{} tuples, max(maxroot - bound) = {worst:.3e}", tuples.len()))
}

fn c2_rank_one(polys: &mut Vec<RealPolynomial>) -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let d = 2 + i % 3;
        let m = 1 + (i / 3) % 6;
        let (_, t) = corpus::rank_one_tuple(&mut r, d, m);
        let mu = mixed_char_poly(&t).expect("rank-one tuple");
        worst = worst.max(relative_coeff_error(&mu, &char_poly(&t.sum())));
        polys.push(mu);
    }
    outcome(worst <= 1e-8, format!("100 tuples, max relative coefficient error {worst:.3e}"))
}

fn c3_evaluators(polys: &mut Vec<RealPolynomial>) -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let d = 1 + i % 4;
        let m = 1 + (i / 4) % 6;
        let model = corpus::rank_one_model(&mut r, d, m, 3);
        let pol = expected_char_poly(&model).expect("polarization");
        let en = expected_char_poly_enumeration(&model, 1_000_000).expect("enumeration");
        worst = worst.max(relative_coeff_error(&pol, &en));
        polys.push(pol);
    }
    outcome(worst <= 1e-8, format!("50 models, max relative coefficient error {worst:.3e}"))
}

fn c4_real_rooted(polys: &[RealPolynomial]) -> Outcome {
    let (mut real, mut inconclusive, mut not) = (0, 0, 0);
    for p in polys {
        match is_real_rooted(p).status {
            RootStatus::RealRooted => real += 1,
            RootStatus::Inconclusive => inconclusive += 1,
            RootStatus::NotRealRooted => not += 1,
        }
    }
    let rate = inconclusive as f64 / polys.len() as f64;
    outcome(
        not == 0 && rate < 0.02,
        format!("{} polynomials: {real} real-rooted, {inconclusive} inconclusive, {not} rejected", polys.len()),
    )
}

fn c5_c6_weaver() -> (Outcome, Outcome) {
    let mut r = rng(5);
    let cfg = GreedyConfig::default();
    let (mut bound_gap, mut oracle_gap) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut trace_rise, mut end_gap) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for i in 0..100 {
        let d = 2 + i % 2;
        let m = r.gen_range(d + 1..=10);
        let k = 2 + (i / 2) % 2;
        let v = corpus::parseval_frame(&mut r, d, m);
        let g = match greedy_partition(&v, k, &cfg) {
            Ok(g) => g,
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let bf = brute_force_partition(&v, k, 10_000_000).expect("small instance");
        bound_gap = bound_gap.max(g.max_block_bessel() - weaver_bound(k, v.max_norm_sqr()));
        oracle_gap = oracle_gap.max(bf.max_block_bessel() - g.max_block_bessel());
        for w in g.maxroot_trace.windows(2) {
            trace_rise = trace_rise.max(w[1] - w[0]);
        }
        // Fully fixed, the lift is block diagonal with blocks `k S_j`.
        let realized = k as f64 * per_block_bessel(&v, &g.partition()).into_iter().fold(0.0, f64::max);
        end_gap = end_gap.max((g.maxroot_trace.last().unwrap() - realized).abs());
    }
    let c5 = outcome(
        failures.is_empty() && bound_gap <= 1e-9 && oracle_gap <= 1e-9,
        format!(
            "100 frames, max(greedy - bound) = {bound_gap:.3e}, max(optimum - greedy) = {oracle_gap:.3e}{}",
            if failures.is_empty() { String::new() } else { format!(", errors: {failures:?}") }
        ),
    );
    let c6 = outcome(
        failures.is_empty() && trace_rise <= 1e-8 && end_gap <= 1e-8,
        format!("largest trace increase {trace_rise:.3e}, final trace vs realized maxroot {end_gap:.3e}"),
    );
    (c5, c6)
}

fn blocks_of(assignment: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &b) in assignment.iter().enumerate() {
        map.entry(b).or_default().push(i);
    }
    map
}

fn c7_paving() -> Outcome {
    let mut r = rng(7);
    let eps = 0.9;
    let cfg = PavingConfig::default();
    let base = cfg.blocks_for(eps).expect("within cap");
    let mut worst = f64::NEG_INFINITY;
    let mut ledger_ok = base == 45;
    for i in 0..50 {
        let n = 2 + i % 5;
        let s = corpus::zero_diagonal_hermitian(&mut r, n);
        let cert = match pave_selfadjoint(&s, eps, &cfg) {
            Ok(c) => c,
            Err(e) => return outcome(false, format!("instance {i}: {e}")),
        };
        ledger_ok &= cert.block_count() == base * base;
        let norm = operator_norm(s.as_matrix());
        for idx in blocks_of(&cert.partition.assignment).values() {
            worst = worst.max(operator_norm(&s.as_matrix().principal(idx)) - eps * norm);
        }
        if i < 3 {
            let t = CMatrix::from_fn(n, |a, b| {
                if a == b {
                    0.0.into()
                } else {
                    corpus::gaussian(&mut r)
                }
            });
            match pave_bounded(&t, eps, &cfg) {
                Ok(c) => ledger_ok &= c.block_count() == (base * base).pow(2),
                Err(e) => return outcome(false, format!("bounded instance {i}: {e}")),
            }
        }
    }
    outcome(
        worst <= 1e-9 && ledger_ok,
        format!(
            "50 matrices, max(block norm - eps*norm) = {worst:.3e}, ledger {base} -> {} -> {} {}",
            base * base,
            (base * base).pow(2),
            if ledger_ok { "matches" } else { "MISMATCH" }
        ),
    )
}

fn c8_projection_delta() -> Outcome {
    let mut r = rng(8);
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for &delta in &[0.1f64, 0.2] {
        let bound = 0.5 + (2.0 * delta * (1.0 - 2.0 * delta)).sqrt();
        for n in 6..=12usize {
            let kmax = ((n as f64 * delta).ceil() as usize).saturating_sub(1).max(1);
            for k in 1..=kmax {
                if k as f64 / n as f64 > delta - 0.01 {
                    continue;
                }
                for _ in 0..4 {
                    let haar = corpus::small_diagonal_projection(&mut r, n, k, delta, 200);
                    let p = haar.or_else(|| corpus::near_flat_projection(&mut r, n, k, 0.05, delta, 200));
                    let Some(p) = p else { continue };
                    let v = projection_columns(&p).expect("projection");
                    let bf = brute_force_partition(&v, 2, 10_000_000).expect("small instance");
                    worst = worst.max(bf.max_block_bessel() - bound);
                    count += 1;
                }
            }
        }
    }
    outcome(
        count >= 30 && worst <= 1e-9,
        format!("{count} projections, max(optimum - bound) = {worst:.3e}"),
    )
}

fn c9_complement() -> Outcome {
    let mut r = rng(9);
    let (mut idem, mut ident) = (0.0f64, 0.0f64);
    let mut failed = 0;
    for i in 0..100 {
        let d = 2 + i % 3;
        let m = r.gen_range(d + 1..=d + 5);
        let v = corpus::parseval_frame(&mut r, d, m);
        let g = gram_matrix(&v);
        idem = idem.max(g.as_matrix().matmul(g.as_matrix()).sub(g.as_matrix()).max_abs());
        let w = naimark_complement(&v).expect("Parseval input");
        let sum = g.add(&gram_matrix(&w)).sub(&HermitianMatrix::identity(m));
        ident = ident.max(sum.as_matrix().max_abs());
        for _ in 0..20 {
            let subset: Vec<usize> = (0..m).filter(|_| r.gen_bool(0.5)).collect();
            let delta = r.gen_range(0.0..1.0);
            let c = bessel_riesz_complement_check(&v, &subset, delta).expect("valid subset");
            ident = ident.max(c.identity_error);
            if !c.passed {
                failed += 1;
            }
        }
    }
    outcome(
        idem <= 1e-9 && ident <= 1e-10 && failed == 0,
        format!("100 frames, idempotence {idem:.3e}, identity {ident:.3e}, {failed}/2000 subset checks failed"),
    )
}

fn c10_schur_horn() -> Outcome {
    let mut r = rng(10);
    let (mut spec_err, mut norm_err) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let m = 1 + i % 8;
        let (spectrum, norms) = corpus::majorizing_pair(&mut r, m);
        let v = match schur_horn_frame(&spectrum, &norms) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("pair {i}: {e}")),
        };
        let eig = eigh(&frame_operator(&v));
        for (a, b) in eig.values.iter().zip(&spectrum) {
            spec_err = spec_err.max((a - b).abs());
        }
        for (a, b) in v.norms_sqr().iter().zip(&norms) {
            norm_err = norm_err.max((a - b).abs());
        }
    }
    outcome(
        spec_err <= 1e-7 && norm_err <= 1e-8,
        format!("100 pairs, spectrum error {spec_err:.3e}, norm error {norm_err:.3e}"),
    )
}

fn c11_feichtinger() -> Outcome {
    let mut r = rng(11);
    let cfg = FrameConfig::default();
    let mut lines = Vec::new();
    let (mut lo_gap, mut hi_gap) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut systems = Vec::new();
    for d in 2..=6 {
        systems.push((format!("two bases d={d}"), corpus::two_scaled_bases(&mut r, d)));
    }
    for (d, m) in [(2, 4), (2, 6), (3, 5), (3, 8), (4, 6)] {
        systems.push((format!("equal-norm d={d} m={m}"), corpus::equal_norm_bessel(&mut r, d, m)));
    }
    for (name, v) in systems {
        let eps = v.norms_sqr().into_iter().fold(f64::INFINITY, f64::min);
        let cert = match feichtinger_partition(&v, eps, &cfg) {
            Ok(c) => c,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        for &(lo, hi) in &cert.per_block_riesz {
            lo_gap = lo_gap.max(eps / 50.0 - lo);
            hi_gap = hi_gap.max(hi - eps / 0.92);
        }
        lines.push(format!(
            "{name}: {} blocks vs 2r = {}",
            cert.partition.nonempty_blocks(),
            cert.sufficient_r.map_or("n/a".to_string(), |r| (2 * r).to_string())
        ));
    }
    outcome(
        lo_gap <= 1e-9 && hi_gap <= 1e-9,
        format!(
            "max(eps/50 - lower) = {lo_gap:.3e}, max(upper - eps/0.92) = {hi_gap:.3e}; {}",
            lines.join("; ")
        ),
    )
}

fn c12_dual() -> Outcome {
    let mut r = rng(12);
    let (mut recip, mut bio) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let d = 2 + i % 4;
        let m = r.gen_range(1..=d);
        let v = corpus::riesz_system(&mut r, d, m);
        let all: Vec<usize> = (0..m).collect();
        let dual = match dual_riesz_system(&v, &all) {
            Ok(x) => x,
            Err(e) => return outcome(false, format!("system {i}: {e}")),
        };
        let (lo, hi) = riesz_bounds(&v);
        let (dlo, dhi) = riesz_bounds(&dual);
        recip = recip.max(((dlo - 1.0 / hi) * hi).abs()).max(((dhi - 1.0 / lo) * lo).abs());
        bio = bio.max(biorthogonality_error(&v, &dual));
    }
    outcome(
        recip <= 1e-7 && bio <= 1e-8,
        format!("50 systems, reciprocal error {recip:.3e}, biorthogonality {bio:.3e}"),
    )
}

fn c13_fourier() -> Outcome {
    let fg = match fourier_frame_gram(&[(0.0, 0.5)], 8) {
        Ok(g) => g,
        Err(e) => return outcome(false, e.to_string()),
    };
    let n = fg.gram.dim();
    let diag_exact = (0..n).all(|i| fg.gram.get(i, i).re == 0.5 && fg.gram.get(i, i).im == 0.0);
    let mut adj = 0.0f64;
    for i in 0..n - 1 {
        adj = adj.max((fg.gram.get(i, i + 1).norm() - 1.0 / PI).abs());
        adj = adj.max((fg.gram.get(i + 1, i).norm() - 1.0 / PI).abs());
    }
    let part = fourier_partition(&[(0.0, 0.5)], 8, 2, &FrameConfig::default());
    let blocks = match &part {
        Ok((_, c)) => c
            .per_block_riesz
            .iter()
            .map(|(lo, hi)| format!("[{lo:.4}, {hi:.4}]"))
            .collect::<Vec<_>>()
            .join(" "),
        Err(e) => format!("error: {e}"),
    };
    outcome(
        n == 17 && diag_exact && adj <= 1e-12 && part.is_ok(),
        format!("17x17 Gram, diagonal exact: {diag_exact}, |adjacent - 1/pi| {adj:.3e}, block Riesz bounds {blocks}"),
    )
}

fn c14_barrier(tuples: &[MatrixTuple]) -> Outcome {
    let mut formula = 0.0f64;
    let mut second = 0.0f64;
    let mut rise = 0.0f64;
    for t in tuples {
        for &s in &[0.5, 1.0, 2.0] {
            for (j, a) in t.mats().iter().enumerate() {
                let phi = barrier_on_diagonal(t, j, s).expect("above the roots");
                formula = formula.max((phi - a.trace() / s).abs());
            }
        }
        let report = barrier_shift_check(t, 2).expect("isotropic tuple");
        for dsample in &report.directions {
            let [a, b, c] = dsample.values;
            second = second.min(a - 2.0 * b + c);
            rise = rise.max(b - a).max(c - b);
        }
    }
    outcome(
        formula <= 1e-9 && second >= -1e-9 && rise <= 1e-9,
        format!(
            "{} tuples, formula error {formula:.3e}, min second difference {second:.3e}, max increase {rise:.3e}",
            tuples.len()
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut timed = |n: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} [{n:>2}] {name} ({secs:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o, secs));
    };
    let tuples = isotropic_tuples();
    let mut polys = Vec::new();
    timed(1, "root bound of mixed characteristic polynomials", &mut || c1_mcp(&tuples, &mut polys));
    timed(2, "rank-one collapse", &mut || c2_rank_one(&mut polys));
    timed(3, "evaluator equivalence", &mut || c3_evaluators(&mut polys));
    timed(4, "real-rootedness", &mut || c4_real_rooted(&polys));
    let mut c6 = None;
    timed(5, "Weaver partition bound", &mut || {
        let (a, b) = c5_c6_weaver();
        c6 = Some(b);
        a
    });
    timed(6, "greedy monotonicity", &mut || c6.take().unwrap());
    timed(7, "paving chain", &mut c7_paving);
    timed(8, "two-block projection paving", &mut c8_projection_delta);
    timed(9, "Naimark complement", &mut c9_complement);
    timed(10, "Schur-Horn construction", &mut c10_schur_horn);
    timed(11, "Riesz partition bounds", &mut c11_feichtinger);
    timed(12, "dual Riesz bounds", &mut c12_dual);
    timed(13, "Fourier frame Gram", &mut c13_fourier);
    timed(14, "barrier formula", &mut || c14_barrier(&tuples));
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
