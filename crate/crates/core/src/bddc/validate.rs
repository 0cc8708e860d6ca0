//! Dense spectrum of the preconditioned interface operator (validation).

use nalgebra::DMatrix;

use super::BddcPreconditioner;
use crate::assembly::InterfaceProblem;
use crate::error::{Error, Result};
use crate::linalg::general_eigenvalues;

/// Orthonormal basis of the benign subspace `{B0 u = 0, Σ p0 = 0}` of the
/// interface space, on which the preconditioned operator acts.
pub fn benign_basis(problem: &InterfaceProblem<'_>) -> DMatrix<f64> {
    let n = problem.dim();
    let ns = problem.n_sub();
    // the b0 rows sum to zero, so the last one is dropped
    let m = ns;
    let mut ct = DMatrix::zeros(n, m);
    for op in problem.subs.iter().take(ns.saturating_sub(1)) {
        for (k, &g) in op.gamma.iter().enumerate() {
            ct[(g, op.sub)] = op.b0[k];
        }
    }
    for s in 0..ns {
        ct[(problem.n_gamma + s, m - 1)] = 1.0;
    }
    let qr = ct.qr();
    let mut qt = DMatrix::identity(n, n);
    qr.q_tr_mul(&mut qt);
    qt.rows(m, n - m).transpose()
}

/// Eigenvalues (real parts, ascending) of `M⁻¹Ŝ` restricted to the benign
/// subspace. Fails above `limit` interface unknowns.
pub fn dense_preconditioned_spectrum(
    problem: &InterfaceProblem<'_>,
    precond: &BddcPreconditioner,
    limit: usize,
) -> Result<Vec<f64>> {
    let n = problem.dim();
    if n > limit {
        return Err(Error::Dimension(format!(
            "dense validation limited to {limit} unknowns, got {n}"
        )));
    }
    let z = benign_basis(problem);
    let k = z.ncols();
    let mut mz = DMatrix::zeros(n, k);
    for j in 0..k {
        let col: Vec<f64> = z.column(j).iter().copied().collect();
        let y = precond.apply(&problem.apply(&col));
        mz.column_mut(j).copy_from_slice(&y);
    }
    let g = z.tr_mul(&mz);
    let mut re: Vec<f64> = general_eigenvalues(&g)?.into_iter().map(|(r, _)| r).collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(re)
}
