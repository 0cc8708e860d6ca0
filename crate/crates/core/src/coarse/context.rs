//! Per-edge data shared by the coarse-space generators.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bddc::{deluxe_blocks, no_net_flux_constraint, ScalingKind};
use crate::decomp::skeleton::EdgeNode;
use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::linalg::{complete_basis, principal, schur_complement};
use crate::mesh::{Point, PolyMesh};
use crate::problem::DdSystem;

/// Operators of one macro edge `E` between subdomains `subs.0` (side 0) and
/// `subs.1` (side 1), all acting on the edge's nodal dofs.
#[derive(Clone, Debug)]
pub struct EdgeContext {
    pub edge: usize,
    pub subs: (usize, usize),
    /// Node coordinates in dof order (two dofs per node).
    pub points: Vec<Point>,
    /// No-net-flux constraint `c0`.
    pub flux: DVector<f64>,
    /// Principal blocks `S_EE^(l)` of the subdomain Schur complements.
    pub s_ee: [DMatrix<f64>; 2],
    /// `Ŝ^(l)`: Schur complement of `S^(l)` onto `E` after eliminating the
    /// other edges and deleting corner dofs.
    pub s_hat: [DMatrix<f64>; 2],
    /// Nodal scaling blocks `D^(l)`.
    pub scaling: [DMatrix<f64>; 2],
    pub diameters: [f64; 2],
    pub centers: [Point; 2],
}

impl EdgeContext {
    pub fn new(mesh: &PolyMesh, dd: &DdSystem, decomp: &Decomposition, e: usize, scaling: ScalingKind) -> Result<Self> {
        let me = &dd.skeleton.edges[e];
        let range = &dd.classes.edge_ranges[e];
        let edge_err = |reason: String| Error::Edge { edge: e, reason };
        let mut s_ee = Vec::with_capacity(2);
        let mut s_hat = Vec::with_capacity(2);
        for s in [me.subs.0, me.subs.1] {
            let op = &dd.subs[s];
            let lr = op
                .local_range(range)
                .ok_or_else(|| edge_err(format!("not contiguous in subdomain {s}")))?;
            let keep: Vec<usize> = lr.clone().collect();
            let elim: Vec<usize> = (0..op.n_gamma())
                .filter(|&k| !lr.contains(&k) && !dd.classes.corner_range.contains(&op.gamma[k]))
                .collect();
            s_ee.push(principal(&op.schur, &keep));
            s_hat.push(
                schur_complement(&op.schur, &keep, &elim)
                    .map_err(|err| edge_err(format!("edge Schur complement of subdomain {s}: {err}")))?,
            );
        }
        let s_ee: [DMatrix<f64>; 2] = [s_ee[0].clone(), s_ee[1].clone()];
        let s_hat: [DMatrix<f64>; 2] = [s_hat[0].clone(), s_hat[1].clone()];
        let n = range.len();
        let scaling = match scaling {
            ScalingKind::Multiplicity => {
                let h = DMatrix::identity(n, n) * 0.5;
                [h.clone(), h]
            }
            ScalingKind::Deluxe | ScalingKind::DeluxeNodal => {
                deluxe_blocks(&s_ee[0], &s_ee[1]).map_err(|err| edge_err(err.to_string()))?
            }
        };
        let points = me
            .nodes()
            .into_iter()
            .map(|nd| match nd {
                EdgeNode::Vertex(v) => mesh.vertex(v),
                EdgeNode::Midpoint(f) => mesh.edge_midpoint(f),
            })
            .collect();
        Ok(Self {
            edge: e,
            subs: me.subs,
            points,
            flux: no_net_flux_constraint(mesh, me, e)?.interior,
            s_ee,
            s_hat,
            scaling,
            diameters: [decomp.diameter(me.subs.0), decomp.diameter(me.subs.1)],
            centers: [decomp.centroid(me.subs.0), decomp.centroid(me.subs.1)],
        })
    }

    pub fn dim(&self) -> usize {
        self.flux.len()
    }

    /// Jump energy `K = D^(j)ᵀ S_EE^(i) D^(j) + D^(i)ᵀ S_EE^(j) D^(i)` of
    /// the zero-extended, scaled jump.
    pub fn jump_stiffness(&self) -> DMatrix<f64> {
        let [si, sj] = &self.s_ee;
        let [di, dj] = &self.scaling;
        let k = dj.transpose() * si * dj + di.transpose() * sj * di;
        (&k + k.transpose()) * 0.5
    }

    /// Orthonormal basis of the complement of the flux constraint.
    pub fn flux_complement(&self) -> DMatrix<f64> {
        let n = self.dim();
        let c = &self.flux / self.flux.norm();
        complete_basis(&[c], n).columns(1, n - 1).into_owned()
    }
}

/// Contexts of all macro edges in skeleton order.
pub fn edge_contexts(
    mesh: &PolyMesh,
    dd: &DdSystem,
    decomp: &Decomposition,
    scaling: ScalingKind,
) -> Result<Vec<EdgeContext>> {
    (0..dd.skeleton.edges.len())
        .into_par_iter()
        .map(|e| EdgeContext::new(mesh, dd, decomp, e, scaling))
        .collect()
}
