//! The condensed interface saddle-point problem
//! `[[Σ R_iᵀ S_i R_i, B0ᵀ], [B0, 0]] [u_Γ; p0] = [g_Γ; g0]`.
//!
//! Vectors are laid out as `n_Γ` interface values followed by one pressure
//! constant per subdomain. The operator has a one-dimensional null space
//! (equal constants `p0`).

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{ReducedSystem, Solution, SubdomainOperator};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct InterfaceProblem<'a> {
    pub subs: &'a [SubdomainOperator],
    /// Global velocity dof of each Γ position.
    pub gamma_dofs: &'a [usize],
    pub n_gamma: usize,
}

impl<'a> InterfaceProblem<'a> {
    pub fn new(subs: &'a [SubdomainOperator], gamma_dofs: &'a [usize]) -> Self {
        Self {
            subs,
            gamma_dofs,
            n_gamma: gamma_dofs.len(),
        }
    }

    pub fn n_sub(&self) -> usize {
        self.subs.len()
    }

    /// Total unknowns `n_Γ + n_sub`.
    pub fn dim(&self) -> usize {
        self.n_gamma + self.subs.len()
    }

    /// Gathers the local interface vector of subdomain `i`.
    pub fn restrict(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.subs[i].gamma.iter().map(|&g| x[g]).collect()
    }

    /// Matrix-vector product (subdomain products run in parallel and are
    /// summed in subdomain order).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let parts: Vec<(Vec<f64>, f64)> = self
            .subs
            .par_iter()
            .map(|op| {
                let xi: Vec<f64> = op.gamma.iter().map(|&g| x[g]).collect();
                let p0 = x[self.n_gamma + op.sub];
                let mut y = op.apply_schur(&xi);
                for (k, v) in y.iter_mut().enumerate() {
                    *v += op.b0[k] * p0;
                }
                let y0 = op.b0.iter().zip(&xi).map(|(a, b)| a * b).sum();
                (y, y0)
            })
            .collect();
        let mut out = vec![0.0; self.dim()];
        for (op, (y, y0)) in self.subs.iter().zip(parts) {
            for (k, &g) in op.gamma.iter().enumerate() {
                out[g] += y[k];
            }
            out[self.n_gamma + op.sub] = y0;
        }
        out
    }

    /// Right-hand side `[Σ R_iᵀ g_Γ^(i); g0]`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for op in self.subs {
            for (k, &g) in op.gamma.iter().enumerate() {
                out[g] += op.g_gamma[k];
            }
            out[self.n_gamma + op.sub] = op.g0;
        }
        out
    }

    /// Dense operator, column by column (validation only).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e);
            e[j] = 0.0;
            m.column_mut(j).copy_from_slice(&col);
        }
        m
    }

    /// Recovers the full solution from an interface solution `x`. The
    /// pressure mean is removed.
    pub fn back_substitute(&self, reduced: &ReducedSystem, x: &[f64]) -> Result<Solution> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "interface vector has length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        let parts: Vec<(Vec<f64>, Vec<f64>)> = self
            .subs
            .par_iter()
            .map(|op| {
                let xi: Vec<f64> = op.gamma.iter().map(|&g| x[g]).collect();
                op.back_substitute(&xi, x[self.n_gamma + op.sub])
            })
            .collect();
        let mut velocity = reduced.boundary_values.clone();
        for (g, &d) in self.gamma_dofs.iter().enumerate() {
            velocity[d] = x[g];
        }
        let mut pressure = vec![0.0; reduced.rhs_p.len()];
        for (op, (u, p)) in self.subs.iter().zip(parts) {
            for (k, &d) in op.interior.iter().enumerate() {
                velocity[d] = u[k];
            }
            for (k, &d) in op.pressure.iter().enumerate() {
                pressure[d] = p[k];
            }
        }
        let mut sol = Solution { velocity, pressure };
        sol.remove_pressure_mean(&reduced.gauge);
        Ok(sol)
    }
}

/// Convenience: the interface operator together with its right-hand side.
pub fn interface_rhs_and_operator<'a>(
    subs: &'a [SubdomainOperator],
    gamma_dofs: &'a [usize],
) -> (InterfaceProblem<'a>, Vec<f64>) {
    let p = InterfaceProblem::new(subs, gamma_dofs);
    let r = p.rhs();
    (p, r)
}
