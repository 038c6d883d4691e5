//! Numerical tolerances shared across modules.
//!
//! Every threshold used by a public operation lives here so that callers can
//! see, in one place, what "within tolerance" means.

/// Hermitian symmetry check at construction, `|a_ij - conj(a_ji)|`.
pub const HERMITIAN: f64 = 1e-12;

/// Jacobi sweeps stop once off-diagonal Frobenius mass falls below this
/// fraction of the matrix Frobenius norm.
pub const JACOBI_OFFDIAG: f64 = 1e-14;

/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in `[-PSD_CLAMP, 0)` are clamped to zero; below that the
/// matrix is rejected as not PSD.
pub const PSD_CLAMP: f64 = 1e-10;

/// Polynomial coefficients below this fraction of the largest coefficient are
/// treated as zero.
pub const COEFF_ZERO: f64 = 1e-13;

/// Monic flag: `|lead - 1|` bound.
pub const MONIC: f64 = 1e-10;

/// Euclid remainder threshold (relative to the divisor scale) used for GCDs
/// and Sturm chains.
pub const EUCLID_ZERO: f64 = 1e-12;

/// Remainders whose relative size falls between `EUCLID_ZERO` and this value
/// make a Sturm chain ambiguous.
pub const EUCLID_AMBIGUOUS: f64 = 1e-8;

/// Newton stop criterion on `|p/p'|`, relative to `1 + |x|`.
pub const NEWTON_STEP: f64 = 1e-13;

/// Newton iteration limit before switching to bisection.
pub const NEWTON_MAX_ITERS: usize = 200;

/// Probabilities of a random model must sum to one within this.
pub const PROB_SUM: f64 = 1e-12;

/// Parseval / Bessel hypothesis checks on frames.
pub const PARSEVAL: f64 = 1e-8;

/// Bessel bound slack when a frame must have Bessel bound at most one.
pub const BESSEL_ONE: f64 = 1e-10;

/// Projection and reflection hypothesis checks (`Q^2 = Q`, `R^2 = I`, diagonals).
pub const PROJECTION: f64 = 1e-8;

/// Slack allowed between a certified value and its guarantee.
pub const CERTIFICATE: f64 = 1e-9;

/// Greedy maxroot trace may increase by at most this much between steps.
pub const TRACE_MONOTONE: f64 = 1e-8;

/// Majorization checks for Schur–Horn.
pub const MAJORIZATION: f64 = 1e-10;

/// Gram condition numbers above this are rejected when computing duals.
pub const GRAM_CONDITION: f64 = 1e12;

/// Default work budget for the polarization evaluator (k×k determinants).
pub const POLARIZATION_BUDGET: u64 = 10_000_000;

/// Default cap on the number of assignments enumerated.
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// Default cap on the number of blocks a paving or partition may request.
pub const BLOCK_CAP: usize = 64;

/// `maxroot` tries the multiple-root refinement when `|p'(x)|` at the Newton
/// limit is below this fraction of `sum |c'_l| |x|^l`.
pub const MULTIPLICITY_TRIGGER: f64 = 1e-6;

/// A value `p(x)` is indistinguishable from zero when
/// `|p(x)| <= ROOT_NOISE * sum |c_l| |x|^l`.
pub const ROOT_NOISE: f64 = 1e-13;
