use std::path::Path;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use weaver::corpus;
use weaver::frames::{self, FrameConfig, RPolicy, RieszPartitionCertificate};
use weaver::io::{to_json_string, MatrixJson, VectorSystemJson};
use weaver::linalg::{gram_matrix, operator_norm, CMatrix, HermitianMatrix, VectorSystem};
use weaver::mixed::{mixed_char_poly_with_budget, MatrixTuple};
use weaver::partition::{self, Evaluator, GreedyConfig, PartitionCertificate};
use weaver::paving::{self, PavingConfig};
use weaver::{barrier, poly, tol};

use crate::report::{Inputs, RunReport, Timings, Verification};
use crate::{Cli, Command, EvaluatorArg, GenKind, PaveClass, EXIT_UNMET};

/// Malformed command-line combination (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// `{"matrices": [matrix, ...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct TupleJson {
    pub matrices: Vec<MatrixJson>,
}

/// `{"intervals": [[a, b], ...], "N": n}`.
#[derive(Debug, Deserialize)]
struct FourierJson {
    intervals: Vec<(f64, f64)>,
    #[serde(rename = "N")]
    n: usize,
}

struct Ctx {
    inputs: Inputs,
    timings: Timings,
    greedy: GreedyConfig,
    brute_force_cap: u64,
    mcp_budget: u64,
    slack: f64,
    verify: bool,
}

impl Ctx {
    fn json<T: for<'de> Deserialize<'de>>(&mut self, path: &Path) -> Result<T> {
        let bytes = self.inputs.read(path)?;
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
    }

    fn frame(&mut self, path: &Path) -> Result<VectorSystem> {
        let j: VectorSystemJson = self.json(path)?;
        Ok(VectorSystem::try_from(j)?)
    }

    fn matrix(&mut self, path: &Path) -> Result<CMatrix> {
        let j: MatrixJson = self.json(path)?;
        Ok(j.to_matrix()?)
    }

    fn hermitian(&mut self, path: &Path) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::new(self.matrix(path)?)?)
    }

    fn frame_config(&self) -> FrameConfig {
        FrameConfig {
            greedy: self.greedy.clone(),
            brute_force_cap: self.brute_force_cap,
            ..FrameConfig::default()
        }
    }

    fn verification(&self, max_discrepancy: f64) -> Option<Verification> {
        self.verify.then(|| Verification {
            ok: max_discrepancy <= self.slack,
            max_discrepancy,
            tolerance: self.slack,
        })
    }
}

struct Outcome {
    parameters: Value,
    certificate: Value,
    met: bool,
    discrepancy: Option<f64>,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn riesz_discrepancy(v: &VectorSystem, cert: &RieszPartitionCertificate) -> f64 {
    let fresh: Vec<(f64, f64)> = cert
        .partition
        .blocks()
        .iter()
        .map(|b| frames::subsystem_riesz(v, b))
        .collect();
    if fresh.len() != cert.per_block_riesz.len() {
        return f64::INFINITY;
    }
    fresh
        .iter()
        .zip(&cert.per_block_riesz)
        .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
        .fold(0.0, f64::max)
}

fn bessel_discrepancy(v: &VectorSystem, cert: &PartitionCertificate) -> f64 {
    max_diff(&partition::per_block_bessel(v, &cert.partition()), &cert.per_block_bessel)
}

fn evaluator(e: EvaluatorArg) -> Evaluator {
    match e {
        EvaluatorArg::BlockLifted => Evaluator::BlockLifted,
        EvaluatorArg::Enumeration => Evaluator::Enumeration,
        EvaluatorArg::Polarization => Evaluator::Polarization,
        EvaluatorArg::Auto => Evaluator::Auto,
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    if let Command::Gen { kind, d, m } = &cli.command {
        let text = generate(*kind, *d, *m, g.seed)?;
        emit(&text, g.out.as_deref())?;
        return Ok(0);
    }
    let mut greedy = GreedyConfig::default();
    let mut brute_force_cap = tol::ENUMERATION_CAP;
    let mut mcp_budget = tol::POLARIZATION_BUDGET;
    if let Some(b) = g.budget {
        if !(b.is_finite() && b > 0.0) {
            return Err(usage(format!("--budget must be positive, got {b}")));
        }
        greedy.work_budget = b;
        greedy.evaluator_budget = b as u64;
        brute_force_cap = b as u64;
        mcp_budget = b as u64;
    }
    let mut ctx = Ctx {
        inputs: Inputs::new(),
        timings: Timings::new(),
        greedy,
        brute_force_cap,
        mcp_budget,
        slack: g.tol_profile.slack(),
        verify: g.verify,
    };
    let (name, outcome) = dispatch(&mut ctx, &cli.command)?;
    let verification = outcome.discrepancy.and_then(|d| ctx.verification(d));
    let verified = verification.as_ref().map_or(true, |v| v.ok);
    let report = RunReport {
        command: name.to_string(),
        parameters: outcome.parameters,
        inputs: ctx.inputs.digests,
        seed: None,
        certificate: outcome.certificate,
        met: outcome.met,
        verification,
        timings_ms: g.timings.then(|| ctx.timings.into_map()),
    };
    emit(&to_json_string(&report)?, g.out.as_deref())?;
    Ok(if outcome.met && verified { 0 } else { EXIT_UNMET })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.context("writing standard output"),
            }
        }
    }
}

fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Result<(&'static str, Outcome)> {
    Ok(match cmd {
        Command::Weaver {
            frame,
            r,
            evaluator: e,
            no_extend,
        } => {
            let v = ctx.frame(frame)?;
            let cfg = GreedyConfig {
                extend_bessel: !no_extend,
                evaluator: evaluator(*e),
                ..ctx.greedy.clone()
            };
            let cert = ctx.timings.time("partition", || partition::greedy_partition(&v, *r, &cfg))?;
            let disc = ctx.verify.then(|| ctx.timings.time("verify", || bessel_discrepancy(&v, &cert)));
            (
                "weaver",
                Outcome {
                    parameters: json!({ "r": r, "evaluator": cfg.evaluator, "extend_bessel": cfg.extend_bessel }),
                    met: cert.meets_bound(),
                    certificate: serde_json::to_value(&cert)?,
                    discrepancy: disc,
                },
            )
        }
        Command::Oracle { frame, r } => {
            let v = ctx.frame(frame)?;
            let cap = ctx.brute_force_cap;
            let cert = ctx.timings.time("search", || partition::brute_force_partition(&v, *r, cap))?;
            let disc = ctx.verify.then(|| bessel_discrepancy(&v, &cert));
            (
                "oracle",
                Outcome {
                    parameters: json!({ "r": r }),
                    met: cert.meets_bound(),
                    certificate: json!({ "optimum": cert.max_block_bessel(), "partition": cert }),
                    discrepancy: disc,
                },
            )
        }
        Command::Pave { matrix, class, eps, r } => {
            let cfg = PavingConfig {
                r_override: *r,
                greedy: ctx.greedy.clone(),
                brute_force_cap: ctx.brute_force_cap,
                ..PavingConfig::default()
            };
            let (t, cert) = match class {
                PaveClass::Bounded => {
                    let t = ctx.matrix(matrix)?;
                    let c = ctx.timings.time("pave", || paving::pave_bounded(&t, *eps, &cfg))?;
                    (t, c)
                }
                other => {
                    let h = ctx.hermitian(matrix)?;
                    let c = ctx.timings.time("pave", || match other {
                        PaveClass::ProjectionHalf => paving::pave_projection_half(&h, *eps, &cfg),
                        PaveClass::ProjectionDelta => paving::pave_projection_delta(&h, *eps, &cfg),
                        PaveClass::Reflection => paving::pave_reflection(&h, *eps, &cfg),
                        _ => paving::pave_selfadjoint(&h, *eps, &cfg),
                    })?;
                    (h.as_matrix().clone(), c)
                }
            };
            let disc = if ctx.verify {
                let worst = ctx.timings.time("verify", || paving::verify_paving(&t, &cert))?;
                Some((worst - cert.max_achieved()).abs())
            } else {
                None
            };
            let class_name = serde_json::to_value(ClassName(*class))?;
            (
                "pave",
                Outcome {
                    parameters: json!({ "class": class_name, "eps": eps, "r": r }),
                    met: cert.met,
                    certificate: serde_json::to_value(&cert)?,
                    discrepancy: disc,
                },
            )
        }
        Command::Feichtinger {
            frame,
            eps,
            knob,
            guaranteed,
        } => {
            let v = ctx.frame(frame)?;
            let cfg = FrameConfig {
                knob: *knob,
                policy: if *guaranteed { RPolicy::Guaranteed } else { RPolicy::Adaptive },
                ..ctx.frame_config()
            };
            let cert = ctx.timings.time("partition", || frames::feichtinger_partition(&v, *eps, &cfg))?;
            riesz_outcome(ctx, "feichtinger", &v, cert, json!({ "eps": eps, "knob": knob, "policy": cfg.policy }))?
        }
        Command::Repsilon { frame, eps } => {
            let v = ctx.frame(frame)?;
            let cfg = ctx.frame_config();
            let cert = ctx.timings.time("partition", || frames::r_epsilon_partition(&v, *eps, &cfg))?;
            riesz_outcome(ctx, "repsilon", &v, cert, json!({ "eps": eps }))?
        }
        Command::Bt { matrix, eps } => {
            let t = ctx.matrix(matrix)?;
            let cfg = ctx.frame_config();
            let cert = ctx.timings.time("partition", || frames::bt_partition(&t, *eps, &cfg))?;
            let cols = VectorSystem::columns_of(&t)?;
            riesz_outcome(ctx, "bt", &cols, cert, json!({ "eps": eps }))?
        }
        Command::Complement { frame, subset, delta } => {
            let v = ctx.frame(frame)?;
            let comp = ctx.timings.time("complement", || frames::naimark_complement(&v))?;
            let check = match subset {
                Some(j) => Some(ctx.timings.time("check", || frames::bessel_riesz_complement_check(&v, j, *delta))?),
                None => None,
            };
            let disc = ctx.verify.then(|| {
                let sum = gram_matrix(&v).add(&gram_matrix(&comp));
                operator_norm(sum.sub(&HermitianMatrix::identity(v.len())).as_matrix())
            });
            (
                "complement",
                Outcome {
                    parameters: json!({ "subset": subset, "delta": delta }),
                    met: check.as_ref().map_or(true, |c| c.passed),
                    certificate: json!({
                        "complement": VectorSystemJson::from(comp),
                        "check": check,
                    }),
                    discrepancy: disc,
                },
            )
        }
        Command::Fourier { intervals, n, input, r } => {
            let (intervals, n) = match input {
                Some(path) => {
                    if !intervals.is_empty() || n.is_some() {
                        return Err(usage("--input excludes --intervals and --N"));
                    }
                    let j: FourierJson = ctx.json(path)?;
                    (j.intervals, j.n)
                }
                None => {
                    let n = n.ok_or_else(|| usage("--N is required without --input"))?;
                    if intervals.is_empty() {
                        return Err(usage("at least one --intervals a,b is required"));
                    }
                    (intervals.clone(), n)
                }
            };
            let cfg = ctx.frame_config();
            let (fg, cert) = ctx.timings.time("partition", || frames::fourier_partition(&intervals, n, *r, &cfg))?;
            let disc = if ctx.verify {
                let sys = fg.realize()?;
                Some(riesz_discrepancy(&sys, &cert))
            } else {
                None
            };
            (
                "fourier",
                Outcome {
                    parameters: json!({ "intervals": intervals, "N": n, "r": r }),
                    met: cert.meets_guarantee(),
                    certificate: json!({
                        "measure": fg.measure(),
                        "frequencies": fg.frequencies,
                        "gram": MatrixJson::from(fg.gram.clone()),
                        "partition": cert,
                    }),
                    discrepancy: disc,
                },
            )
        }
        Command::CertifyMcp { tuple } => {
            let j: TupleJson = ctx.json(tuple)?;
            let mats = j
                .matrices
                .into_iter()
                .map(HermitianMatrix::try_from)
                .collect::<weaver::Result<Vec<_>>>()?;
            let t = MatrixTuple::new(mats)?;
            let budget = ctx.mcp_budget;
            let cert = ctx.timings.time("certify", || barrier::mcp_certificate_with_budget(&t, budget))?;
            let disc = if ctx.verify {
                let mu = mixed_char_poly_with_budget(&t, budget)?;
                let root = poly::maxroot(&mu)?;
                let eps = t.max_trace();
                let bound = (1.0 + eps.sqrt()).powi(2);
                Some((root - cert.achieved_maxroot).abs().max((bound - cert.claimed_bound).abs()))
            } else {
                None
            };
            (
                "certify-mcp",
                Outcome {
                    parameters: json!({}),
                    met: cert.ok,
                    certificate: serde_json::to_value(&cert)?,
                    discrepancy: disc,
                },
            )
        }
        Command::Gen { .. } => unreachable!("handled before dispatch"),
    })
}

fn riesz_outcome(
    ctx: &mut Ctx,
    name: &'static str,
    v: &VectorSystem,
    cert: RieszPartitionCertificate,
    parameters: Value,
) -> Result<(&'static str, Outcome)> {
    let disc = ctx.verify.then(|| riesz_discrepancy(v, &cert));
    Ok((
        name,
        Outcome {
            parameters,
            met: cert.meets_guarantee(),
            certificate: serde_json::to_value(&cert)?,
            discrepancy: disc,
        },
    ))
}

struct ClassName(PaveClass);

impl Serialize for ClassName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use clap::ValueEnum;
        let pv = self.0.to_possible_value().expect("no skipped variants");
        s.serialize_str(pv.get_name())
    }
}

fn generate(kind: GenKind, d: usize, m: usize, seed: u64) -> Result<String> {
    if d == 0 || m == 0 {
        return Err(usage("--d and --m must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = |v: VectorSystem| to_json_string(&VectorSystemJson::from(v));
    let text = match kind {
        GenKind::Parseval => {
            if m < d {
                return Err(usage("a Parseval frame needs m >= d"));
            }
            frame(corpus::parseval_frame(&mut rng, d, m))?
        }
        GenKind::TwoBases => frame(corpus::two_scaled_bases(&mut rng, d))?,
        GenKind::EqualNormBessel => frame(corpus::equal_norm_bessel(&mut rng, d, m))?,
        GenKind::Riesz => {
            if m > d {
                return Err(usage("a Riesz system needs m <= d"));
            }
            frame(corpus::riesz_system(&mut rng, d, m))?
        }
        GenKind::HalfProjection => to_json_string(&MatrixJson::from(corpus::half_projection(&mut rng, d)))?,
        GenKind::ZeroDiagonal => to_json_string(&MatrixJson::from(corpus::zero_diagonal_hermitian(&mut rng, d)))?,
        GenKind::IdentityTuple => {
            let t = corpus::identity_tuple(&mut rng, d, m);
            to_json_string(&TupleJson {
                matrices: t.mats().iter().cloned().map(MatrixJson::from).collect(),
            })?
        }
    };
    Ok(text)
}
