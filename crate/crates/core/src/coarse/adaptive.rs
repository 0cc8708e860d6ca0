//! Eigenvalue-driven edge constraints.
//!
//! Both kinds work in the complement `Z` of the flux constraint, which is
//! primal on every edge. With `K` the scaled jump energy of the edge and
//! `Ŝ^(l)` the edge Schur complements:
//!
//! * first: `Zᵀ K Z y = μ Zᵀ (Ŝ^(i) : Ŝ^(j)) Z y`, constraint `Z B_z y`;
//! * second: `Zᵀ K Z y = μ (Zᵀ Ŝ^(i) Z) : (Zᵀ Ŝ^(j) Z) y`, constraint
//!   `K Z y`. This is the paired-space pencil
//!   `Π P_Dᵀ S P_D Π w = μ Π S Π w` reduced to the jump `w_i − w_j`.
//!
//! Eigenvalues `μ ≥ TOL` and directions in the null space of the mass
//! matrix that carry stiffness become constraints.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::gevp::{gevp_sym, parallel_sum};
use super::EdgeContext;
use crate::bddc::EdgeTransformation;
use crate::error::{Error, Result};

/// Relative deflation threshold for the mass matrix of edge pencils.
pub const GEVP_TOL_B: f64 = 1e-10;

/// Null-space directions of the mass matrix with relative stiffness above
/// this value are constrained.
const NULL_ENERGY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdaptiveKind {
    First,
    Second,
}

impl fmt::Display for AdaptiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdaptiveKind::First => "adaptive-first",
            AdaptiveKind::Second => "adaptive-second",
        })
    }
}

/// Constraints selected on one edge.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveOutcome {
    pub constraints: Vec<DVector<f64>>,
    /// Full spectrum of the pencil, descending.
    pub spectrum: Vec<f64>,
    /// Constrained null-space directions of the mass matrix.
    pub n_null: usize,
    /// Candidates discarded by the per-edge cap.
    pub truncated: usize,
}

fn stiffness_and_mass(
    ctx: &EdgeContext,
    kind: AdaptiveKind,
    basis: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = ctx.jump_stiffness();
    let a = basis.transpose() * &k * basis;
    let b = match kind {
        AdaptiveKind::First => basis.transpose() * parallel_sum(&ctx.s_hat[0], &ctx.s_hat[1])? * basis,
        AdaptiveKind::Second => {
            let si = basis.transpose() * &ctx.s_hat[0] * basis;
            let sj = basis.transpose() * &ctx.s_hat[1] * basis;
            parallel_sum(&si, &sj)?
        }
    };
    Ok((a, b))
}

fn select(ctx: &EdgeContext, kind: AdaptiveKind, tol: f64, max_per_edge: usize) -> Result<AdaptiveOutcome> {
    let z = ctx.flux_complement();
    let (a, b) = stiffness_and_mass(ctx, kind, &z)?;
    let g = gevp_sym(&a, &b, GEVP_TOL_B).map_err(|err| Error::Edge {
        edge: ctx.edge,
        reason: err.to_string(),
    })?;
    let k = ctx.jump_stiffness();
    let amax = a.abs().max();
    let mut cands: Vec<DVector<f64>> = Vec::new();
    let mut n_null = 0;
    for j in 0..g.null_space.ncols() {
        let n = g.null_space.column(j);
        if (n.transpose() * &a * n)[(0, 0)] > NULL_ENERGY_TOL * amax {
            cands.push(&z * n);
            n_null += 1;
        }
    }
    for (j, &mu) in g.values.iter().enumerate() {
        if mu < tol {
            break;
        }
        let y = g.vectors.column(j);
        cands.push(match kind {
            AdaptiveKind::First => &z * (&b * y),
            AdaptiveKind::Second => &k * (&z * y),
        });
    }
    let truncated = cands.len().saturating_sub(max_per_edge);
    if truncated > 0 {
        log::warn!(
            "macro edge {}: {} constraint(s) above the cap of {max_per_edge} discarded",
            ctx.edge,
            truncated
        );
        cands.truncate(max_per_edge);
    }
    Ok(AdaptiveOutcome {
        constraints: cands,
        spectrum: g.values,
        n_null,
        truncated,
    })
}

pub fn adaptive_first_constraints(ctx: &EdgeContext, tol: f64, max_per_edge: usize) -> Result<AdaptiveOutcome> {
    select(ctx, AdaptiveKind::First, tol, max_per_edge)
}

pub fn adaptive_second_constraints(ctx: &EdgeContext, tol: f64, max_per_edge: usize) -> Result<AdaptiveOutcome> {
    select(ctx, AdaptiveKind::Second, tol, max_per_edge)
}

/// Largest Rayleigh quotient of the pencil of `kind` on the dual
/// coordinates of `transform` (the subspace left after enforcing all
/// primal constraints of the edge).
pub fn constrained_rayleigh_max(ctx: &EdgeContext, kind: AdaptiveKind, transform: &EdgeTransformation) -> Result<f64> {
    let w = transform.dual_basis();
    if w.ncols() == 0 {
        return Ok(0.0);
    }
    let (a, b) = stiffness_and_mass(ctx, kind, &w)?;
    let g = gevp_sym(&a, &b, GEVP_TOL_B)?;
    let amax = a.abs().max();
    for j in 0..g.null_space.ncols() {
        let n = g.null_space.column(j);
        if (n.transpose() * &a * n)[(0, 0)] > NULL_ENERGY_TOL * amax {
            return Ok(f64::INFINITY);
        }
    }
    Ok(g.values.first().copied().unwrap_or(0.0))
}
