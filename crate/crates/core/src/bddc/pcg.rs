//! Preconditioned conjugate gradients on the interface problem with a
//! Lanczos condition-number estimate.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};

/// Default size limit of the dense spectrum validation path.
pub const DENSE_VALIDATION_LIMIT: usize = 2000;

/// Outcome of a PCG run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max-iterations",
        })
    }
}

/// Iteration record of one PCG solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PcgReport {
    pub status: SolveStatus,
    pub iterations: usize,
    /// Lanczos estimate `λ_max / λ_min` of the preconditioned operator.
    pub k2: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `‖r_k‖ / ‖g‖` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    /// `sqrt(r_kᵀ M⁻¹ r_k) / sqrt(gᵀ M⁻¹ g)` for `k = 0..=iterations`.
    pub preconditioned_history: Vec<f64>,
}

impl PcgReport {
    pub fn rel_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Turns an unconverged run into an error.
    pub fn ensure_converged(&self) -> Result<()> {
        match self.status {
            SolveStatus::Converged => Ok(()),
            SolveStatus::MaxIterations => Err(Error::NoConvergence {
                iterations: self.iterations,
                rel_residual: self.rel_residual(),
            }),
        }
    }
}

/// Extreme eigenvalues of the Lanczos matrix assembled from CG step
/// lengths `alpha` and direction updates `beta` (`beta[0]` unused).
pub fn lanczos_extremes(alpha: &[f64], beta: &[f64]) -> Option<(f64, f64)> {
    let n = alpha.len();
    if n == 0 {
        return None;
    }
    let mut t = DMatrix::zeros(n, n);
    for j in 0..n {
        t[(j, j)] = 1.0 / alpha[j];
        if j > 0 {
            t[(j, j)] += beta[j] / alpha[j - 1];
            let off = beta[j].sqrt() / alpha[j - 1];
            t[(j, j - 1)] = off;
            t[(j - 1, j)] = off;
        }
    }
    let ev = SymmetricEigen::new(t).eigenvalues;
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some((lo, hi))
}

/// PCG for `A x = g` with preconditioner `m_inv`.
///
/// The start is `M⁻¹ g` when `start_with_preconditioned_rhs` is set (this
/// satisfies inhomogeneous constraint rows carried by the coarse problem)
/// and zero otherwise. See [`pcg_from`] for the stopping rule.
pub fn pcg(
    apply_a: impl Fn(&[f64]) -> Vec<f64>,
    apply_m: impl Fn(&[f64]) -> Vec<f64>,
    g: &[f64],
    rtol: f64,
    maxit: usize,
    start_with_preconditioned_rhs: bool,
) -> Result<(Vec<f64>, PcgReport)> {
    let x0 = if start_with_preconditioned_rhs && g.iter().any(|&v| v != 0.0) {
        apply_m(g)
    } else {
        vec![0.0; g.len()]
    };
    pcg_from(apply_a, apply_m, g, x0, rtol, maxit)
}

/// PCG for `A x = g` started from `x0`. Stops when `‖r‖/‖g‖ ≤ rtol`.
/// Non-positive curvature `pᵀAp` or `rᵀM⁻¹r` means the iterates left the
/// subspace on which the preconditioned operator is positive definite.
pub fn pcg_from(
    apply_a: impl Fn(&[f64]) -> Vec<f64>,
    apply_m: impl Fn(&[f64]) -> Vec<f64>,
    g: &[f64],
    x0: Vec<f64>,
    rtol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, PcgReport)> {
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::Config(format!("rtol must lie in (0, 1), got {rtol}")));
    }
    let n = g.len();
    if x0.len() != n {
        return Err(Error::Dimension(format!(
            "initial guess has length {}, expected {n}",
            x0.len()
        )));
    }
    let gnorm = norm2(g);
    let mut x = x0;
    let mut r = g.to_vec();
    if gnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((
            x,
            PcgReport {
                status: SolveStatus::Converged,
                iterations: 0,
                k2: 1.0,
                lambda_min: 1.0,
                lambda_max: 1.0,
                residual_history: vec![0.0],
                preconditioned_history: vec![0.0],
            },
        ));
    }
    if x.iter().any(|&v| v != 0.0) {
        let ax = apply_a(&x);
        for k in 0..n {
            r[k] = g[k] - ax[k];
        }
    }
    let mut z = apply_m(&r);
    let mut rz = dot(&r, &z);
    let gz = {
        let mg = apply_m(g);
        dot(g, &mg).max(f64::MIN_POSITIVE)
    };
    let mut hist = vec![norm2(&r) / gnorm];
    let mut phist = vec![(rz.max(0.0) / gz).sqrt()];
    let mut p = z.clone();
    let (mut alphas, mut betas) = (Vec::new(), vec![0.0]);
    let mut it = 0;
    let mut status = SolveStatus::MaxIterations;
    if hist[0] <= rtol {
        status = SolveStatus::Converged;
    }
    while status != SolveStatus::Converged && it < maxit {
        if !(rz > 0.0) {
            return Err(Error::BenignViolated {
                iteration: it,
                quantity: "r'M^-1 r",
                value: rz,
            });
        }
        let ap = apply_a(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::BenignViolated {
                iteration: it,
                quantity: "p'Sp",
                value: pap,
            });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        alphas.push(alpha);
        it += 1;
        z = apply_m(&r);
        let rz_new = dot(&r, &z);
        hist.push(norm2(&r) / gnorm);
        phist.push((rz_new.max(0.0) / gz).sqrt());
        if *hist.last().unwrap() <= rtol {
            status = SolveStatus::Converged;
            break;
        }
        let beta = rz_new / rz;
        betas.push(beta);
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        rz = rz_new;
    }
    let (lo, hi) = lanczos_extremes(&alphas, &betas[..alphas.len().max(1)]).unwrap_or((1.0, 1.0));
    let k2 = if lo > 0.0 { (hi / lo).max(1.0) } else { f64::INFINITY };
    Ok((
        x,
        PcgReport {
            status,
            iterations: it,
            k2,
            lambda_min: lo,
            lambda_max: hi,
            residual_history: hist,
            preconditioned_history: phist,
        },
    ))
}
