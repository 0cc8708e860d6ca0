//! Global saddle-point system `[[A, Bᵀ], [B, 0]]`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::DofMap;
use crate::error::{Error, Result};
use crate::linalg::{norm2, CsrMatrix, SparseLu, TripletBuilder};
use crate::mesh::{Point, PolyMesh};
use crate::vem::LocalElement;

/// Assembled velocity stiffness, divergence coupling and load, together
/// with the element matrices they were built from.
#[derive(Clone, Debug)]
pub struct GlobalSystem {
    pub dofmap: DofMap,
    pub elements: Vec<LocalElement>,
    /// Cell viscosity ν̄_K (sampled at the centroid).
    pub viscosity: Vec<f64>,
    pub cell_stiffness: Vec<DMatrix<f64>>,
    pub cell_load: Vec<DVector<f64>>,
    /// Global velocity dofs of each cell in local order.
    pub cell_dofs: Vec<Vec<usize>>,
    pub a: CsrMatrix,
    /// Pressure rows, velocity columns.
    pub b: CsrMatrix,
    pub f: Vec<f64>,
}

/// Scatter-adds element stiffness, divergence and load. Viscosity and load
/// are sampled at cell centroids.
pub fn assemble_global(
    mesh: &PolyMesh,
    dofmap: &DofMap,
    viscosity: &(dyn Fn(Point) -> f64 + Sync),
    load: &(dyn Fn(Point) -> [f64; 2] + Sync),
) -> Result<GlobalSystem> {
    let per_cell: Vec<(LocalElement, f64, DMatrix<f64>, DVector<f64>)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let el = LocalElement::new(mesh, c)?;
            let x = el.geometry.centroid;
            let nu = viscosity(x);
            let a = el.stiffness(nu)?;
            let f = el.load(load(x));
            Ok((el, nu, a, f))
        })
        .collect::<Result<_>>()?;

    let nv = dofmap.n_velocity();
    let np = dofmap.n_pressure();
    let mut at = TripletBuilder::new(nv, nv);
    let mut bt = TripletBuilder::new(np, nv);
    let mut f = vec![0.0; nv];
    let mut elements = Vec::with_capacity(per_cell.len());
    let mut visc = Vec::with_capacity(per_cell.len());
    let mut stiff = Vec::with_capacity(per_cell.len());
    let mut loads = Vec::with_capacity(per_cell.len());
    let mut cell_dofs = Vec::with_capacity(per_cell.len());
    for (c, (el, nu, a, fl)) in per_cell.into_iter().enumerate() {
        let dofs = dofmap.cell_velocity_dofs(mesh, c);
        for (li, &gi) in dofs.iter().enumerate() {
            for (lj, &gj) in dofs.iter().enumerate() {
                at.push(gi, gj, a[(li, lj)]);
            }
            f[gi] += fl[li];
            for (ai, &pi) in dofmap.cell_pressure_dofs(c).iter().enumerate() {
                bt.push(pi, gi, el.b[(ai, li)]);
            }
        }
        elements.push(el);
        visc.push(nu);
        stiff.push(a);
        loads.push(fl);
        cell_dofs.push(dofs);
    }
    Ok(GlobalSystem {
        dofmap: dofmap.clone(),
        elements,
        viscosity: visc,
        cell_stiffness: stiff,
        cell_load: loads,
        cell_dofs,
        a: at.to_csr(),
        b: bt.to_csr(),
        f,
    })
}

/// Lid-driven cavity data: `(1, 0)` on the open top side `y = 1`, zero
/// elsewhere (including the two top corners).
pub fn lid_velocity(x: Point) -> [f64; 2] {
    const EPS: f64 = 1e-14;
    if (x[1] - 1.0).abs() < EPS && x[0] > EPS && x[0] < 1.0 - EPS {
        [1.0, 0.0]
    } else {
        [0.0, 0.0]
    }
}

/// System with boundary velocity dofs eliminated.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    /// Marks Dirichlet velocity dofs.
    pub dirichlet: Vec<bool>,
    /// Full velocity vector holding the boundary values (zero elsewhere).
    pub boundary_values: Vec<f64>,
    /// Free velocity dofs, ascending.
    pub free: Vec<usize>,
    /// Position of each velocity dof among the free ones.
    pub free_index: Vec<Option<usize>>,
    pub a_ff: CsrMatrix,
    /// Pressure rows, free velocity columns.
    pub b_f: CsrMatrix,
    /// Velocity right-hand side `f_F - A_FD u_D`.
    pub rhs_u: Vec<f64>,
    /// Pressure right-hand side `-B_D u_D`.
    pub rhs_p: Vec<f64>,
    /// Gauge weights: `w·p = ∫_Ω p`.
    pub gauge: Vec<f64>,
}

/// Eliminates all boundary velocity dofs with data `boundary_values`.
/// Fails if the data has a net flux through the boundary.
pub fn apply_dirichlet(
    mesh: &PolyMesh,
    system: &GlobalSystem,
    boundary_values: &dyn Fn(Point) -> [f64; 2],
) -> Result<ReducedSystem> {
    let dm = &system.dofmap;
    let nv = dm.n_velocity();
    let dirichlet = dm.boundary_dofs(mesh);
    let mut values = vec![0.0; nv];
    for d in 0..nv {
        if dirichlet[d] {
            let x = dm.node_point(mesh, d).expect("boundary dofs are nodal");
            values[d] = boundary_values(x)[d % 2];
        }
    }

    // net flux of the data, edge by edge with the 3-point rule
    let (mut flux, mut scale) = (0.0, 0.0);
    for (e, edge) in mesh.edges().iter().enumerate() {
        if !edge.is_boundary() {
            continue;
        }
        let cell = mesh.cell(edge.cell);
        let k = mesh.cell_edges(edge.cell).iter().position(|&x| x == e).unwrap();
        let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
        let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
        let n = [pb[1] - pa[1], pa[0] - pb[0]];
        let val = |d: usize| [values[d], values[d + 1]];
        for (w, v) in [
            (1.0 / 6.0, val(dm.vertex_dof(a, 0))),
            (4.0 / 6.0, val(dm.edge_dof(e, 0))),
            (1.0 / 6.0, val(dm.vertex_dof(b, 0))),
        ] {
            let t = w * (v[0] * n[0] + v[1] * n[1]);
            flux += t;
            scale += t.abs();
        }
    }
    if flux.abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::IncompatibleBoundary { flux });
    }

    let mut free = Vec::new();
    let mut free_index = vec![None; nv];
    for d in 0..nv {
        if !dirichlet[d] {
            free_index[d] = Some(free.len());
            free.push(d);
        }
    }
    let nf = free.len();
    let mut at = TripletBuilder::new(nf, nf);
    let mut rhs_u: Vec<f64> = free.iter().map(|&d| system.f[d]).collect();
    for (fi, &d) in free.iter().enumerate() {
        for (j, v) in system.a.row(d) {
            match free_index[j] {
                Some(fj) => at.push(fi, fj, v),
                None => rhs_u[fi] -= v * values[j],
            }
        }
    }
    let np = dm.n_pressure();
    let mut bt = TripletBuilder::new(np, nf);
    let mut rhs_p = vec![0.0; np];
    for p in 0..np {
        for (j, v) in system.b.row(p) {
            match free_index[j] {
                Some(fj) => bt.push(p, fj, v),
                None => rhs_p[p] -= v * values[j],
            }
        }
    }
    let mut gauge = vec![0.0; np];
    for (c, el) in system.elements.iter().enumerate() {
        gauge[dm.pressure_dof(c, 0)] = el.geometry.area;
    }
    Ok(ReducedSystem {
        dirichlet,
        boundary_values: values,
        free,
        free_index,
        a_ff: at.to_csr(),
        b_f: bt.to_csr(),
        rhs_u,
        rhs_p,
        gauge,
    })
}

/// Full velocity (including boundary values) and pressure coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl Solution {
    /// Subtracts the global mean `∫p / |Ω|` from the cell constants.
    pub fn remove_pressure_mean(&mut self, gauge: &[f64]) {
        let total: f64 = gauge.iter().sum();
        let mean = gauge.iter().zip(&self.pressure).map(|(w, p)| w * p).sum::<f64>() / total;
        for (p, w) in self.pressure.iter_mut().zip(gauge) {
            if *w != 0.0 {
                *p -= mean;
            }
        }
    }
}

impl ReducedSystem {
    /// Saddle matrix with the gauge multiplier,
    /// `[[A_FF, B_Fᵀ, 0], [B_F, 0, w], [0, wᵀ, 0]]`.
    pub fn gauged_matrix(&self) -> TripletBuilder {
        let nf = self.free.len();
        let np = self.rhs_p.len();
        let n = nf + np + 1;
        let mut t = TripletBuilder::new(n, n);
        for i in 0..nf {
            for (j, v) in self.a_ff.row(i) {
                t.push(i, j, v);
            }
        }
        for p in 0..np {
            for (j, v) in self.b_f.row(p) {
                t.push(nf + p, j, v);
                t.push(j, nf + p, v);
            }
            t.push(nf + p, nf + np, self.gauge[p]);
            t.push(nf + np, nf + p, self.gauge[p]);
        }
        t
    }

    pub fn gauged_rhs(&self) -> Vec<f64> {
        let mut r = self.rhs_u.clone();
        r.extend_from_slice(&self.rhs_p);
        r.push(0.0);
        r
    }

    /// Relative residual of `(u, p)` in the first two block rows.
    pub fn relative_residual(&self, sol: &Solution) -> f64 {
        let uf: Vec<f64> = self.free.iter().map(|&d| sol.velocity[d]).collect();
        let mut ru = self.a_ff.matvec(&uf);
        self.b_f.tmatvec_add(&sol.pressure, &mut ru);
        for (r, f) in ru.iter_mut().zip(&self.rhs_u) {
            *r -= f;
        }
        let mut rp = self.b_f.matvec(&uf);
        for (r, g) in rp.iter_mut().zip(&self.rhs_p) {
            *r -= g;
        }
        let num = (norm2(&ru).powi(2) + norm2(&rp).powi(2)).sqrt();
        let den = (norm2(&self.rhs_u).powi(2) + norm2(&self.rhs_p).powi(2)).sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Assembles a full solution from free velocities and pressures.
    pub fn expand(&self, u_free: &[f64], pressure: Vec<f64>) -> Solution {
        let mut velocity = self.boundary_values.clone();
        for (k, &d) in self.free.iter().enumerate() {
            velocity[d] = u_free[k];
        }
        Solution { velocity, pressure }
    }
}

/// Sparse LU solve of the gauged saddle system. The returned pressure has
/// zero global mean.
pub fn direct_solve_reference(sys: &ReducedSystem) -> Result<Solution> {
    let nf = sys.free.len();
    let np = sys.rhs_p.len();
    let lu = SparseLu::new(&sys.gauged_matrix(), "global saddle-point system")?;
    let x = lu.solve(&sys.gauged_rhs());
    let mut sol = sys.expand(&x[..nf], x[nf..nf + np].to_vec());
    sol.remove_pressure_mean(&sys.gauge);
    let res = sys.relative_residual(&sol);
    if !(res <= 1e-8) {
        return Err(Error::Singular(format!("reference solve residual {res:e}")));
    }
    Ok(sol)
}
