//! Dense symmetric generalized eigenproblems and the parallel sum.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_desc, symmetrized};

/// Relative eigenvalue cutoff of the pseudo-inverse in [`parallel_sum`].
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-12;

static GEVP_CALLS: AtomicUsize = AtomicUsize::new(0);

/// Number of [`gevp_sym`] calls made by this process.
pub fn gevp_call_count() -> usize {
    GEVP_CALLS.load(Ordering::Relaxed)
}

/// Eigenpairs of `A v = μ B v` on the numerical range of `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gevp {
    /// Descending.
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors, one column per value.
    pub vectors: DMatrix<f64>,
    /// Orthonormal basis of the deflated near-null space of `B`.
    pub null_space: DMatrix<f64>,
}

/// Deflates eigenvalues of `B` at or below `tol_b·λ_max(B)`, then solves
/// the reduced standard problem `W ᵀA W y = μ y` with `W = U Λ^{-1/2}`.
pub fn gevp_sym(a: &DMatrix<f64>, b: &DMatrix<f64>, tol_b: f64) -> Result<Gevp> {
    GEVP_CALLS.fetch_add(1, Ordering::Relaxed);
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::Dimension(format!(
            "pencil of sizes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if n == 0 {
        return Ok(Gevp {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
            null_space: DMatrix::zeros(0, 0),
        });
    }
    let (lb, ub) = sym_eigen_desc(b);
    let lmax = lb[0];
    if !(lmax > 0.0) || !lmax.is_finite() {
        return Err(Error::Singular("mass matrix of the pencil is numerically zero".into()));
    }
    let r = lb.iter().take_while(|&&l| l > tol_b * lmax).count();
    let mut w = ub.columns(0, r).into_owned();
    for k in 0..r {
        let s = 1.0 / lb[k].sqrt();
        w.column_mut(k).scale_mut(s);
    }
    let c = symmetrized(&(w.transpose() * a * &w));
    let (mu, y) = sym_eigen_desc(&c);
    Ok(Gevp {
        values: mu,
        vectors: w * y,
        null_space: ub.columns(r, n - r).into_owned(),
    })
}

/// `A:B = A (A+B)⁺ B` for symmetric positive semidefinite `A`, `B`.
pub fn parallel_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "parallel sum of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let (l, u) = sym_eigen_desc(&(a + b));
    let cut = PSEUDO_INVERSE_CUTOFF * l[0].max(0.0);
    let mut pinv = DMatrix::zeros(n, n);
    for k in 0..n {
        if l[k] > cut && l[k] > 0.0 {
            let col = u.column(k);
            pinv += (col * col.transpose()) / l[k];
        }
    }
    Ok(symmetrized(&(a * pinv * b)))
}
