//! Per-subdomain static condensation onto the interface.
//!
//! Every subdomain eliminates its interior velocities together with all of
//! its pressure coefficients except the subdomain-wise constant `p0_i`.
//! The augmented interior block
//! `K_II = [[A_II, B_Iᵀ, 0], [B_I, 0, w], [0, wᵀ, 0]]` fixes the mean of
//! the eliminated pressure with the multiplier row `w` (cell areas on the
//! constant coefficients).

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{GlobalSystem, ReducedSystem};
use crate::decomp::{Decomposition, DofClassification};
use crate::error::{Error, Result};
use crate::linalg::{symmetrized, CsrMatrix, SparseLu, TripletBuilder};

#[derive(Clone, Copy, Debug)]
enum Slot {
    Interior(usize),
    Gamma(usize),
    Known,
}

/// Condensed operators of one subdomain. Local interface vectors are
/// indexed by position in [`gamma`](Self::gamma), which lists global Γ
/// positions in ascending order.
#[derive(Debug)]
pub struct SubdomainOperator {
    pub sub: usize,
    pub cells: Vec<usize>,
    /// Interior velocity dofs (global ids, ascending).
    pub interior: Vec<usize>,
    /// Global Γ positions touched by this subdomain (ascending).
    pub gamma: Vec<usize>,
    /// Global pressure dofs in elimination order.
    pub pressure: Vec<usize>,
    /// Sum of cell areas.
    pub area: f64,
    lu: SparseLu,
    k_ig: CsrMatrix,
    /// Unassembled `A_ΓΓ^(i)`.
    pub a_gg: DMatrix<f64>,
    /// Unassembled Schur complement `S_Γ^(i)` (symmetric).
    pub schur: DMatrix<f64>,
    /// Row of the condensed divergence acting on `u_Γ^(i)`.
    pub b0: DVector<f64>,
    /// Condensed interface load.
    pub g_gamma: DVector<f64>,
    /// Condensed mass-balance datum.
    pub g0: f64,
    rhs_interior: Vec<f64>,
}

impl SubdomainOperator {
    pub fn n_gamma(&self) -> usize {
        self.gamma.len()
    }

    /// Position of global Γ index `g` in the local interface vector.
    pub fn local_of(&self, g: usize) -> Option<usize> {
        self.gamma.binary_search(&g).ok()
    }

    /// Local positions of a contiguous block of global Γ positions (a
    /// macro edge of this subdomain).
    pub fn local_range(&self, r: &std::ops::Range<usize>) -> Option<std::ops::Range<usize>> {
        if r.is_empty() {
            return Some(0..0);
        }
        let a = self.local_of(r.start)?;
        let b = a + r.len();
        (b <= self.gamma.len() && self.gamma[b - 1] == r.end - 1).then_some(a..b)
    }

    /// Recovers interior velocities and the full pressure from interface
    /// values `u_gamma` (local order) and the constant `p0`. Returns the
    /// interior velocity values (aligned with [`interior`](Self::interior))
    /// and pressure values (aligned with [`pressure`](Self::pressure)).
    pub fn back_substitute(&self, u_gamma: &[f64], p0: f64) -> (Vec<f64>, Vec<f64>) {
        let mut rhs = self.rhs_interior.clone();
        let ku = self.k_ig.matvec(u_gamma);
        for (r, k) in rhs.iter_mut().zip(&ku) {
            *r -= k;
        }
        let x = self.lu.solve(&rhs);
        let ni = self.interior.len();
        let np = self.pressure.len();
        let u = x[..ni].to_vec();
        let mut p = x[ni..ni + np].to_vec();
        for (k, v) in p.iter_mut().enumerate() {
            if k % 3 == 0 {
                *v += p0;
            }
        }
        (u, p)
    }

    /// `S^(i) x`.
    pub fn apply_schur(&self, x: &[f64]) -> Vec<f64> {
        let xv = DVector::from_column_slice(x);
        (&self.schur * xv).as_slice().to_vec()
    }
}

/// Builds the condensed operator of every subdomain (in parallel, results
/// in subdomain order).
pub fn build_subdomain_operators(
    system: &GlobalSystem,
    reduced: &ReducedSystem,
    decomp: &Decomposition,
    classes: &DofClassification,
) -> Result<Vec<SubdomainOperator>> {
    (0..decomp.n_sub())
        .into_par_iter()
        .map(|s| build_one(system, reduced, decomp, classes, s))
        .collect()
}

fn build_one(
    system: &GlobalSystem,
    reduced: &ReducedSystem,
    decomp: &Decomposition,
    classes: &DofClassification,
    s: usize,
) -> Result<SubdomainOperator> {
    let cells = decomp.cells(s).to_vec();
    let mut interior = Vec::new();
    let mut gamma = Vec::new();
    for &c in &cells {
        for &d in &system.cell_dofs[c] {
            if reduced.dirichlet[d] {
                continue;
            }
            match classes.gamma_index[d] {
                Some(g) => gamma.push(g),
                None => interior.push(d),
            }
        }
    }
    interior.sort_unstable();
    interior.dedup();
    gamma.sort_unstable();
    gamma.dedup();
    let int_pos: HashMap<usize, usize> = interior.iter().enumerate().map(|(k, &d)| (d, k)).collect();
    let gam_pos: HashMap<usize, usize> = gamma.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let slot = |d: usize| -> Slot {
        if reduced.dirichlet[d] {
            Slot::Known
        } else if let Some(g) = classes.gamma_index[d] {
            Slot::Gamma(gam_pos[&g])
        } else {
            Slot::Interior(int_pos[&d])
        }
    };

    let ni = interior.len();
    let np = 3 * cells.len();
    let naug = ni + np + 1;
    let ng = gamma.len();
    let ud = &reduced.boundary_values;
    let mut kii = TripletBuilder::new(naug, naug);
    let mut kig = TripletBuilder::new(naug, ng);
    let mut a_gg = DMatrix::zeros(ng, ng);
    let mut rhs_interior = vec![0.0; naug];
    let mut f_gamma = DVector::zeros(ng);
    let mut pressure = Vec::with_capacity(np);
    let mut area = 0.0;

    for (q, &c) in cells.iter().enumerate() {
        let dofs = &system.cell_dofs[c];
        let ak = &system.cell_stiffness[c];
        let el = &system.elements[c];
        let load = &system.cell_load[c];
        let slots: Vec<Slot> = dofs.iter().map(|&d| slot(d)).collect();
        for (li, si) in slots.iter().enumerate() {
            match *si {
                Slot::Interior(r) => {
                    rhs_interior[r] += load[li];
                    for (lj, sj) in slots.iter().enumerate() {
                        let v = ak[(li, lj)];
                        match *sj {
                            Slot::Interior(k) => kii.push(r, k, v),
                            Slot::Gamma(k) => kig.push(r, k, v),
                            Slot::Known => rhs_interior[r] -= v * ud[dofs[lj]],
                        }
                    }
                }
                Slot::Gamma(r) => {
                    f_gamma[r] += load[li];
                    for (lj, sj) in slots.iter().enumerate() {
                        let v = ak[(li, lj)];
                        match *sj {
                            Slot::Interior(_) => {}
                            Slot::Gamma(k) => a_gg[(r, k)] += v,
                            Slot::Known => f_gamma[r] -= v * ud[dofs[lj]],
                        }
                    }
                }
                Slot::Known => {}
            }
        }
        let pdofs = system.dofmap.cell_pressure_dofs(c);
        for a in 0..3 {
            let pr = ni + 3 * q + a;
            pressure.push(pdofs[a]);
            for (lj, sj) in slots.iter().enumerate() {
                let v = el.b[(a, lj)];
                match *sj {
                    Slot::Interior(k) => {
                        kii.push(pr, k, v);
                        kii.push(k, pr, v);
                    }
                    Slot::Gamma(k) => kig.push(pr, k, v),
                    Slot::Known => rhs_interior[pr] -= v * ud[dofs[lj]],
                }
            }
        }
        let w = el.geometry.area;
        area += w;
        kii.push(ni + 3 * q, naug - 1, w);
        kii.push(naug - 1, ni + 3 * q, w);
    }

    let lu = SparseLu::new(&kii, &format!("interior block of subdomain {s}")).map_err(|e| Error::Subdomain {
        sub: s,
        reason: e.to_string(),
    })?;
    let k_ig = kig.to_csr();

    // b0 = sum of the constant-pressure rows of B_Γ; g0 likewise
    let mut b0 = DVector::zeros(ng);
    let mut g0 = 0.0;
    for q in 0..cells.len() {
        let r = ni + 3 * q;
        for (k, v) in k_ig.row(r) {
            b0[k] += v;
        }
        g0 += rhs_interior[r];
    }

    let (schur, g_gamma) = if ng == 0 {
        (DMatrix::zeros(0, 0), DVector::zeros(0))
    } else {
        let x = lu.solve_dense(&k_ig.to_dense());
        let y = lu.solve(&rhs_interior);
        let mut sch = a_gg.clone();
        let mut g = f_gamma;
        for r in 0..naug {
            for (j, v) in k_ig.row(r) {
                for k in 0..ng {
                    sch[(j, k)] -= v * x[(r, k)];
                }
                g[j] -= v * y[r];
            }
        }
        (symmetrized(&sch), g)
    };

    Ok(SubdomainOperator {
        sub: s,
        cells,
        interior,
        gamma,
        pressure,
        area,
        lu,
        k_ig,
        a_gg,
        schur,
        b0,
        g_gamma,
        g0,
        rhs_interior,
    })
}
