//! Interior / interface / Dirichlet classification of velocity dofs and
//! the global interface (Γ) numbering.
//!
//! Γ is numbered corners first (ascending vertex, x then y), then one
//! contiguous block per macro edge in skeleton order; inside a block the
//! edge nodes follow [`MacroEdge::nodes`](super::MacroEdge::nodes) with
//! two components each.

use std::ops::Range;

use super::skeleton::EdgeNode;
use super::{Decomposition, InterfaceSkeleton};
use crate::assembly::DofMap;
use crate::mesh::PolyMesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofLabel {
    Interior,
    /// Interface dof continuous only at convergence.
    Dual,
    /// Interface dof kept continuous (subdomain corners).
    Primal,
    Dirichlet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofClassification {
    /// Label of each global velocity dof.
    pub labels: Vec<DofLabel>,
    /// Subdomains whose closure contains each velocity dof, ascending.
    pub owners: Vec<Vec<usize>>,
    /// Global velocity dof of each Γ position.
    pub gamma: Vec<usize>,
    /// Γ position of each velocity dof, if on the interface.
    pub gamma_index: Vec<Option<usize>>,
    /// Γ positions of corner dofs.
    pub corner_range: Range<usize>,
    /// Γ positions of each macro edge's dofs.
    pub edge_ranges: Vec<Range<usize>>,
}

impl DofClassification {
    pub fn multiplicity(&self, dof: usize) -> usize {
        self.owners[dof].len()
    }

    pub fn n_gamma(&self) -> usize {
        self.gamma.len()
    }

    pub fn count(&self, label: DofLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Labels every velocity dof. `dirichlet[d]` marks dofs carrying
/// boundary data; they are excluded from all solver spaces.
pub fn classify_dofs(
    mesh: &PolyMesh,
    dofmap: &DofMap,
    decomp: &Decomposition,
    skeleton: &InterfaceSkeleton,
    dirichlet: &[bool],
) -> DofClassification {
    let nv = dofmap.n_velocity();
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for v in 0..mesh.n_vertices() {
        for c in 0..2 {
            owners[dofmap.vertex_dof(v, c)] = skeleton.vertex_subs[v].clone();
        }
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        let mut s: Vec<usize> = edge.cells().map(|c| decomp.sub_of(c)).collect();
        s.sort_unstable();
        s.dedup();
        for c in 0..2 {
            owners[dofmap.edge_dof(e, c)] = s.clone();
        }
    }
    for k in 0..mesh.n_cells() {
        for a in 0..2 {
            owners[dofmap.moment_dof(k, a)] = vec![decomp.sub_of(k)];
        }
    }

    let mut gamma = Vec::new();
    for &v in &skeleton.corners {
        gamma.push(dofmap.vertex_dof(v, 0));
        gamma.push(dofmap.vertex_dof(v, 1));
    }
    let corner_range = 0..gamma.len();
    let mut edge_ranges = Vec::with_capacity(skeleton.edges.len());
    for me in &skeleton.edges {
        let start = gamma.len();
        for node in me.nodes() {
            for c in 0..2 {
                gamma.push(match node {
                    EdgeNode::Vertex(v) => dofmap.vertex_dof(v, c),
                    EdgeNode::Midpoint(e) => dofmap.edge_dof(e, c),
                });
            }
        }
        edge_ranges.push(start..gamma.len());
    }
    let mut gamma_index = vec![None; nv];
    for (g, &d) in gamma.iter().enumerate() {
        debug_assert!(gamma_index[d].is_none(), "dof {d} on two interface blocks");
        gamma_index[d] = Some(g);
    }

    let labels = (0..nv)
        .map(|d| {
            if dirichlet[d] {
                DofLabel::Dirichlet
            } else if owners[d].len() >= 2 {
                debug_assert!(gamma_index[d].is_some(), "interface dof {d} outside the skeleton");
                if corner_range.contains(&gamma_index[d].unwrap_or(usize::MAX)) {
                    DofLabel::Primal
                } else {
                    DofLabel::Dual
                }
            } else {
                DofLabel::Interior
            }
        })
        .collect();

    DofClassification {
        labels,
        owners,
        gamma,
        gamma_index,
        corner_range,
        edge_ranges,
    }
}
