//! Balancing domain decomposition by constraints for the interface
//! saddle-point problem.

pub mod flux;
pub mod pcg;
pub mod precond;
pub mod scaling;
pub mod transform;
pub mod validate;

pub use flux::{no_net_flux_constraint, FluxConstraint};
pub use pcg::{lanczos_extremes, pcg, pcg_from, PcgReport, SolveStatus, DENSE_VALIDATION_LIMIT};
pub use precond::{BddcPreconditioner, PartialVector};
pub use scaling::{
    build_scaling, deluxe_blocks, deluxe_scaling, edge_block, multiplicity_scaling, ScalingKind, ScalingOperator,
};
pub use transform::{build_edge_transformations, Constraint, ConstraintKind, EdgeTransformation, GS_DROP_TOL};
pub use validate::{benign_basis, dense_preconditioned_spectrum};

use nalgebra::{DMatrix, DVector};

use crate::assembly::{InterfaceProblem, Solution};
use crate::error::{Error, Result};
use crate::mesh::PolyMesh;
use crate::problem::DdSystem;

/// No-net-flux constraints of every macro edge, as single-entry
/// constraint lists.
pub fn flux_constraints(mesh: &PolyMesh, dd: &DdSystem) -> Result<Vec<Vec<Constraint>>> {
    dd.skeleton
        .edges
        .iter()
        .enumerate()
        .map(|(e, me)| {
            Ok(vec![Constraint {
                vector: no_net_flux_constraint(mesh, me, e)?.interior,
                kind: ConstraintKind::Flux,
            }])
        })
        .collect()
}

/// Transformations that make every edge coordinate primal.
pub fn full_primal_transformations(dd: &DdSystem) -> Vec<EdgeTransformation> {
    dd.classes
        .edge_ranges
        .iter()
        .map(|r| EdgeTransformation::full(r.len()))
        .collect()
}

/// Least-squares update of the subdomain pressure constants of `x` so that
/// the residual is orthogonal to every pressure-constant direction `A e_p0`.
/// A residual along such a direction is invisible to the preconditioned
/// inner product and would stall PCG.
pub fn balance_pressure_constants(ip: &InterfaceProblem<'_>, g: &[f64], x: &mut [f64]) -> Result<()> {
    let n_sub = ip.n_sub();
    let ax = ip.apply(x);
    let r = DVector::from_iterator(g.len(), g.iter().zip(&ax).map(|(a, b)| a - b));
    let mut az = DMatrix::zeros(g.len(), n_sub);
    let mut e = vec![0.0; g.len()];
    for s in 0..n_sub {
        e[ip.n_gamma + s] = 1.0;
        az.set_column(s, &DVector::from_vec(ip.apply(&e)));
        e[ip.n_gamma + s] = 0.0;
    }
    let scale = az.abs().max();
    if scale == 0.0 {
        return Ok(());
    }
    let y = az
        .svd(true, true)
        .solve(&r, 1e-12 * scale)
        .map_err(|m| Error::Singular(format!("pressure balancing: {m}")))?;
    for s in 0..n_sub {
        x[ip.n_gamma + s] += y[s];
    }
    Ok(())
}

/// Runs PCG on the interface problem and recovers the full solution. The
/// start is `M⁻¹ g` for inhomogeneous flux data and zero otherwise, followed
/// by [`balance_pressure_constants`].
pub fn solve_interface(
    dd: &DdSystem,
    precond: &BddcPreconditioner,
    rtol: f64,
    maxit: usize,
) -> Result<(Solution, Vec<f64>, PcgReport)> {
    let ip = dd.interface();
    let g = ip.rhs();
    let inhomogeneous = dd.subs.iter().any(|op| op.g0 != 0.0);
    let mut x0 = if inhomogeneous {
        precond.apply(&g)
    } else {
        vec![0.0; g.len()]
    };
    balance_pressure_constants(&ip, &g, &mut x0)?;
    let (x, report) = pcg_from(|v| ip.apply(v), |r| precond.apply(r), &g, x0, rtol, maxit)?;
    let sol = ip.back_substitute(&dd.reduced, &x)?;
    Ok((sol, x, report))
}
