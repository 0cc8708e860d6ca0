//! Global enumeration of velocity and pressure unknowns.
//!
//! Velocity ids: `2v + c` for mesh vertex `v`, then `2 nV + 2e + c` for the
//! interior Gauss–Lobatto node (midpoint) of fine edge `e`, then
//! `2 nV + 2 nE + 2K + α` for the two divergence moments of cell `K`.
//! Pressure ids: `3K + a` for the coefficient of scaled monomial `a` of
//! cell `K`.

use crate::mesh::{Point, PolyMesh};

/// What a velocity dof measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityDof {
    Vertex { vertex: usize, comp: usize },
    Edge { edge: usize, comp: usize },
    Moment { cell: usize, index: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    n_vertices: usize,
    n_edges: usize,
    n_cells: usize,
}

impl DofMap {
    pub fn new(mesh: &PolyMesh) -> Self {
        Self {
            n_vertices: mesh.n_vertices(),
            n_edges: mesh.n_edges(),
            n_cells: mesh.n_cells(),
        }
    }

    pub fn n_velocity(&self) -> usize {
        2 * (self.n_vertices + self.n_edges + self.n_cells)
    }

    pub fn n_pressure(&self) -> usize {
        3 * self.n_cells
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    #[inline]
    pub fn vertex_dof(&self, v: usize, comp: usize) -> usize {
        2 * v + comp
    }

    #[inline]
    pub fn edge_dof(&self, e: usize, comp: usize) -> usize {
        2 * (self.n_vertices + e) + comp
    }

    #[inline]
    pub fn moment_dof(&self, cell: usize, index: usize) -> usize {
        2 * (self.n_vertices + self.n_edges + cell) + index
    }

    #[inline]
    pub fn pressure_dof(&self, cell: usize, a: usize) -> usize {
        3 * cell + a
    }

    pub fn kind(&self, dof: usize) -> VelocityDof {
        let (q, comp) = (dof / 2, dof % 2);
        if q < self.n_vertices {
            VelocityDof::Vertex { vertex: q, comp }
        } else if q < self.n_vertices + self.n_edges {
            VelocityDof::Edge {
                edge: q - self.n_vertices,
                comp,
            }
        } else {
            VelocityDof::Moment {
                cell: q - self.n_vertices - self.n_edges,
                index: comp,
            }
        }
    }

    /// Global velocity ids of cell `c` in local order: vertices
    /// counter-clockwise (x, y interleaved), then edge nodes, then the two
    /// divergence moments. Length `4 n_e + 2`.
    pub fn cell_velocity_dofs(&self, mesh: &PolyMesh, c: usize) -> Vec<usize> {
        let cell = mesh.cell(c);
        let mut out = Vec::with_capacity(4 * cell.len() + 2);
        for &v in cell {
            out.push(self.vertex_dof(v, 0));
            out.push(self.vertex_dof(v, 1));
        }
        for &e in mesh.cell_edges(c) {
            out.push(self.edge_dof(e, 0));
            out.push(self.edge_dof(e, 1));
        }
        out.push(self.moment_dof(c, 0));
        out.push(self.moment_dof(c, 1));
        out
    }

    pub fn cell_pressure_dofs(&self, c: usize) -> [usize; 3] {
        [3 * c, 3 * c + 1, 3 * c + 2]
    }

    /// Velocity dofs located on the domain boundary (vertex and edge
    /// nodes of boundary edges).
    pub fn boundary_dofs(&self, mesh: &PolyMesh) -> Vec<bool> {
        let mut b = vec![false; self.n_velocity()];
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.is_boundary() {
                for c in 0..2 {
                    b[self.edge_dof(e, c)] = true;
                    b[self.vertex_dof(edge.vertices[0], c)] = true;
                    b[self.vertex_dof(edge.vertices[1], c)] = true;
                }
            }
        }
        b
    }

    /// Location of a nodal velocity dof; `None` for divergence moments.
    pub fn node_point(&self, mesh: &PolyMesh, dof: usize) -> Option<Point> {
        match self.kind(dof) {
            VelocityDof::Vertex { vertex, .. } => Some(mesh.vertex(vertex)),
            VelocityDof::Edge { edge, .. } => Some(mesh.edge_midpoint(edge)),
            VelocityDof::Moment { .. } => None,
        }
    }
}
