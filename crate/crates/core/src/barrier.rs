//! Barrier functions `Phi^j = d/dz_j log det(sum z_i A_i)` and the root-bound
//! certificate for mixed characteristic polynomials of isotropic PSD tuples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, operator_norm, CMatrix, HermitianMatrix, Lu};
use crate::mixed::{mixed_char_poly_with_budget, MatrixTuple};
use crate::poly::maxroot;
use crate::tol;

/// Real point `(x_1..x_m)` at which barriers are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierPoint {
    pub coords: Vec<f64>,
}

impl BarrierPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("barrier point coordinates must be finite"));
        }
        Ok(BarrierPoint { coords })
    }

    pub fn diagonal(m: usize, t: f64) -> Self {
        BarrierPoint { coords: vec![t; m] }
    }

    fn shifted(&self, j: usize, h: f64) -> Self {
        let mut coords = self.coords.clone();
        coords[j] += h;
        BarrierPoint { coords }
    }
}

/// Pencil `M(x) = sum x_i A_i` with its LU factors and the solves `M^{-1} A_i`.
struct Pencil {
    solved: Vec<CMatrix>,
}

impl Pencil {
    fn at(t: &MatrixTuple, x: &BarrierPoint) -> Result<Self> {
        if x.coords.len() != t.len() {
            return Err(Error::invalid("barrier point length differs from tuple length"));
        }
        let d = t.dim();
        let mut m = CMatrix::zeros(d);
        for (a, &xi) in t.mats().iter().zip(&x.coords) {
            m = m.add(&a.as_matrix().scale_real(xi));
        }
        let lu = Lu::new(&m);
        if lu.is_singular() {
            return Err(Error::SingularPoint);
        }
        let solved = t
            .mats()
            .iter()
            .map(|a| {
                let cols: Result<Vec<Vec<_>>> =
                    (0..d).map(|c| lu.solve(&a.as_matrix().column(c))).collect();
                let cols = cols?;
                Ok(CMatrix::from_fn(d, |i, j| cols[j][i]))
            })
            .collect::<Result<_>>()?;
        Ok(Pencil { solved })
    }

    /// `Phi^j = tr(M^{-1} A_j)`.
    fn phi(&self, j: usize) -> f64 {
        self.solved[j].trace().re
    }

    /// `tr(M^{-1} A_i M^{-1} A_j) = -d_i Phi^j`.
    fn cross(&self, i: usize, j: usize) -> f64 {
        self.solved[i].matmul(&self.solved[j]).trace().re
    }
}

/// `Phi^j` at an arbitrary point, via `tr(M(x)^{-1} A_j)`.
pub fn barrier_at(t: &MatrixTuple, j: usize, x: &BarrierPoint) -> Result<f64> {
    if j >= t.len() {
        return Err(Error::invalid(format!("index {j} out of range")));
    }
    Ok(Pencil::at(t, x)?.phi(j))
}

/// `Phi^j(t, ..., t)`; equals `tr(A_j) / t` when the tuple sums to the identity.
pub fn barrier_on_diagonal(tuple: &MatrixTuple, j: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("diagonal barrier point requires t > 0"));
    }
    barrier_at(tuple, j, &BarrierPoint::diagonal(tuple.len(), t))
}

/// Root bound certificate `maxroot(mu) <= (1 + sqrt(eps))^2` for a tuple summing
/// to the identity with traces at most `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McpCertificate {
    pub epsilon: f64,
    pub t_star: f64,
    pub delta_star: f64,
    pub claimed_bound: f64,
    pub achieved_maxroot: f64,
    pub ok: bool,
}

fn check_isotropic(t: &MatrixTuple) -> Result<()> {
    let dev = operator_norm(t.sum().sub(&HermitianMatrix::identity(t.dim())).as_matrix());
    if dev > 1e-8 {
        return Err(Error::invalid(format!(
            "matrices must sum to the identity (deviation {dev:e})"
        )));
    }
    Ok(())
}

pub fn mcp_certificate(t: &MatrixTuple) -> Result<McpCertificate> {
    mcp_certificate_with_budget(t, tol::POLARIZATION_BUDGET)
}

pub fn mcp_certificate_with_budget(t: &MatrixTuple, budget: u64) -> Result<McpCertificate> {
    check_isotropic(t)?;
    let epsilon = t.max_trace();
    let mu = mixed_char_poly_with_budget(t, budget)?;
    let achieved_maxroot = maxroot(&mu)?;
    let s = epsilon.sqrt();
    let t_star = s + epsilon;
    let delta_star = 1.0 + s;
    let claimed_bound = t_star + delta_star;
    Ok(McpCertificate {
        epsilon,
        t_star,
        delta_star,
        claimed_bound,
        achieved_maxroot,
        ok: achieved_maxroot <= claimed_bound + tol::CERTIFICATE,
    })
}

/// Finite-difference view of one barrier along one coordinate direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSample {
    pub base: Vec<f64>,
    /// Barrier index `i` in `Phi^i`.
    pub barrier: usize,
    /// Coordinate `j` being shifted.
    pub direction: usize,
    pub step: f64,
    /// `Phi^i` at shifts `0, step, 2 step`.
    pub values: [f64; 3],
    pub nonnegative: bool,
    pub nonincreasing: bool,
    pub convex: bool,
}

/// One spot check of `Phi^i_{(1 - d_j) q}(x + delta e_j) <= Phi^i_q(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSample {
    pub base: Vec<f64>,
    pub barrier: usize,
    pub direction: usize,
    pub delta: f64,
    pub before: f64,
    pub after: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub directions: Vec<DirectionSample>,
    pub shifts: Vec<ShiftSample>,
    pub skipped: Vec<String>,
    pub ok: bool,
}

/// `M(x)` positive definite; together with PSD `A_i` this puts `x` above the
/// roots of `det(sum z_i A_i)`.
fn above_roots(t: &MatrixTuple, x: &BarrierPoint) -> bool {
    let d = t.dim();
    let mut m = HermitianMatrix::zeros(d);
    for (a, &xi) in t.mats().iter().zip(&x.coords) {
        m = m.add(&a.scale(xi));
    }
    x.coords.iter().all(|&c| c >= 0.0) && eigh(&m).min() > 0.0
}

/// Samples barrier positivity, monotonicity and convexity along coordinate
/// directions from diagonal points, and spot-checks the shift inequality for
/// `(1 - d_j)` applied to the determinant.
///
/// Diagonal points start at `t* = sqrt(eps) + eps` and grow by half of `t*`
/// per sample. The shift check uses `delta = 1 / (1 - Phi^j(x))`, the smallest
/// value for which `Phi^j(x) <= 1 - 1/delta`.
pub fn barrier_shift_check(t: &MatrixTuple, samples: usize) -> Result<BarrierReport> {
    check_isotropic(t)?;
    let m = t.len();
    let eps = t.max_trace();
    let t_star = eps.sqrt() + eps;
    let slack = tol::CERTIFICATE;
    let mut report = BarrierReport {
        directions: Vec::new(),
        shifts: Vec::new(),
        skipped: Vec::new(),
        ok: true,
    };
    for s in 0..samples {
        let x = BarrierPoint::diagonal(m, t_star * (1.0 + 0.5 * s as f64));
        if !above_roots(t, &x) {
            report.skipped.push(format!("diagonal point {} is not above the roots", x.coords[0]));
            continue;
        }
        let pencil = match Pencil::at(t, &x) {
            Ok(p) => p,
            Err(_) => {
                report.skipped.push(format!("singular pencil at diagonal point {}", x.coords[0]));
                continue;
            }
        };
        for j in 0..m {
            let step = 0.5 * x.coords[j];
            let pts = [x.clone(), x.shifted(j, step), x.shifted(j, 2.0 * step)];
            let pencils: Result<Vec<Pencil>> = pts.iter().map(|p| Pencil::at(t, p)).collect();
            let Ok(pencils) = pencils else {
                report.skipped.push(format!("singular pencil along direction {j}"));
                continue;
            };
            for i in 0..m {
                let v = [pencils[0].phi(i), pencils[1].phi(i), pencils[2].phi(i)];
                let sample = DirectionSample {
                    base: x.coords.clone(),
                    barrier: i,
                    direction: j,
                    step,
                    values: v,
                    nonnegative: v.iter().all(|&y| y >= -slack),
                    nonincreasing: v[1] <= v[0] + slack && v[2] <= v[1] + slack,
                    convex: v[0] - 2.0 * v[1] + v[2] >= -slack,
                };
                report.ok &= sample.nonnegative && sample.nonincreasing && sample.convex;
                report.directions.push(sample);
            }

            let phi_j = pencil.phi(j);
            if phi_j >= 1.0 {
                report.skipped.push(format!(
                    "shift check along {j} at {}: Phi^j = {phi_j} >= 1 admits no delta",
                    x.coords[0]
                ));
                continue;
            }
            let delta = 1.0 / (1.0 - phi_j);
            let y = x.shifted(j, delta);
            let Ok(py) = Pencil::at(t, &y) else {
                report.skipped.push(format!("singular pencil at shifted point along {j}"));
                continue;
            };
            let denom = 1.0 - py.phi(j);
            if denom <= 0.0 {
                report.skipped.push(format!("shifted point along {j} not above the roots of (1 - d_j)q"));
                continue;
            }
            for i in 0..m {
                let before = pencil.phi(i);
                let after = py.phi(i) + py.cross(i, j) / denom;
                let holds = after <= before + slack;
                report.ok &= holds;
                report.shifts.push(ShiftSample {
                    base: x.coords.clone(),
                    barrier: i,
                    direction: j,
                    delta,
                    before,
                    after,
                    holds,
                });
            }
        }
    }
    Ok(report)
}
