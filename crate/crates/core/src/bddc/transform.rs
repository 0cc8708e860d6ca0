//! Per-edge orthonormal change of basis making primal constraints explicit
//! coordinates.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{complete_basis, mgs};

/// Relative residual below which a constraint counts as dependent.
pub const GS_DROP_TOL: f64 = 1e-10;

/// Origin of a primal constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Flux,
    Frugal,
    Adaptive,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Flux => "no-net-flux",
            ConstraintKind::Frugal => "frugal",
            ConstraintKind::Adaptive => "adaptive",
        })
    }
}

/// A constraint vector on the dofs of one macro edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub vector: DVector<f64>,
    pub kind: ConstraintKind,
}

/// Orthonormal `Q_E` whose leading `n_primal` columns span the accepted
/// constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTransformation {
    pub q: DMatrix<f64>,
    pub n_primal: usize,
    /// Number of constraints supplied.
    pub requested: usize,
    /// Provenance of the accepted constraints, in column order.
    pub accepted: Vec<ConstraintKind>,
    /// Provenance of the dropped constraints.
    pub dropped: Vec<ConstraintKind>,
}

impl EdgeTransformation {
    /// Orthonormalizes `constraints` in order (flux first) and completes the
    /// basis.
    pub fn new(constraints: &[Constraint], n: usize) -> Self {
        let cands: Vec<DVector<f64>> = constraints.iter().map(|c| c.vector.clone()).collect();
        let o = mgs(&cands, GS_DROP_TOL);
        let q = complete_basis(&o.basis, n);
        Self {
            q,
            n_primal: o.basis.len(),
            requested: constraints.len(),
            accepted: o.accepted.iter().map(|&k| constraints[k].kind).collect(),
            dropped: o.dropped.iter().map(|&k| constraints[k].kind).collect(),
        }
    }

    /// Every edge coordinate primal (identity basis).
    pub fn full(n: usize) -> Self {
        Self {
            q: DMatrix::identity(n, n),
            n_primal: n,
            requested: n,
            accepted: Vec::new(),
            dropped: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn n_dual(&self) -> usize {
        self.dim() - self.n_primal
    }

    /// Columns spanning the dual (unconstrained) coordinates.
    pub fn dual_basis(&self) -> DMatrix<f64> {
        self.q.columns(self.n_primal, self.n_dual()).into_owned()
    }

    pub fn primal_basis(&self) -> DMatrix<f64> {
        self.q.columns(0, self.n_primal).into_owned()
    }
}

/// One transformation per macro edge; edges with supplied constraint lists
/// of differing lengths are handled independently.
pub fn build_edge_transformations(constraints: &[Vec<Constraint>], dims: &[usize]) -> Vec<EdgeTransformation> {
    constraints
        .iter()
        .zip(dims)
        .enumerate()
        .map(|(e, (c, &n))| {
            let t = EdgeTransformation::new(c, n);
            if !t.dropped.is_empty() {
                log::warn!(
                    "macro edge {e}: dropped {} dependent constraint(s) ({})",
                    t.dropped.len(),
                    t.dropped.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
                );
            }
            t
        })
        .collect()
}
