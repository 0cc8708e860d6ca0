//! Planar polygonal meshes of the unit square.
//!
//! A [`PolyMesh`] stores vertices, counter-clockwise cell loops and the
//! derived edge topology. Generators for random and centroidal Voronoi
//! tessellations live in [`voronoi`]; per-cell geometry and quadrature in
//! [`geometry`].

pub mod geometry;
pub mod io;
pub mod quality;
pub mod voronoi;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use geometry::{cell_geometry, polygon_quadrature, CellGeometry, QuadPoint};
pub use io::{read_mesh, write_mesh};
pub use quality::{validate_mesh, MeshQualityReport};
pub use voronoi::{generate_cvt, generate_random_voronoi, lloyd_from_seeds, LloydReport};

pub type Point = [f64; 2];

/// A unique mesh edge with its incident cells.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshEdge {
    /// Endpoint vertices, smaller index first.
    pub vertices: [usize; 2],
    /// First incident cell (the one that created the edge).
    pub cell: usize,
    /// Second incident cell, `None` on the domain boundary.
    pub other: Option<usize>,
}

impl MeshEdge {
    pub fn is_boundary(&self) -> bool {
        self.other.is_none()
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.cell).chain(self.other)
    }
}

/// Polygonal tessellation with counter-clockwise cells.
#[derive(Clone, Debug)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<MeshEdge>,
    cell_edges: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
}

impl PartialEq for PolyMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| a[0].to_bits() == b[0].to_bits() && a[1].to_bits() == b[1].to_bits())
            && self.cells == other.cells
    }
}

impl PolyMesh {
    /// Builds the topology and checks the tessellation invariants: simple
    /// positively oriented cells, at most two cells per edge, and
    /// consistent orientation across shared edges.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidMesh("no cells".into()));
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::InvalidMesh(format!("cell {c} has {} vertices", cell.len())));
            }
            for &v in cell {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!("cell {c} references missing vertex {v}")));
                }
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cell.len() {
                return Err(Error::InvalidMesh(format!("cell {c} repeats a vertex")));
            }
        }

        let mut edges: Vec<MeshEdge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let mut ce = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = (cell[k], cell[(k + 1) % n]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, (edges.len(), a, b));
                        ce.push(edges.len());
                        edges.push(MeshEdge {
                            vertices: [key.0, key.1],
                            cell: c,
                            other: None,
                        });
                    }
                    Some(&(e, fa, fb)) => {
                        if edges[e].other.is_some() {
                            return Err(Error::InvalidMesh(format!(
                                "edge ({a},{b}) shared by more than two cells"
                            )));
                        }
                        if (fa, fb) != (b, a) {
                            return Err(Error::InvalidMesh(format!(
                                "cells {} and {c} traverse edge ({a},{b}) in the same direction",
                                edges[e].cell
                            )));
                        }
                        edges[e].other = Some(c);
                        ce.push(e);
                    }
                }
            }
            cell_edges.push(ce);
        }

        let mut boundary_vertex = vec![false; vertices.len()];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[e.vertices[0]] = true;
            boundary_vertex[e.vertices[1]] = true;
        }

        let mesh = Self {
            vertices,
            cells,
            edges,
            cell_edges,
            boundary_vertex,
        };
        for c in 0..mesh.n_cells() {
            mesh.check_simple(c)?;
        }
        Ok(mesh)
    }

    /// The unit square as a single cell.
    pub fn unit_square() -> Self {
        Self::structured(1, 1)
    }

    /// `nx × ny` grid of rectangles on the unit square.
    pub fn structured(nx: usize, ny: usize) -> Self {
        assert!(nx > 0 && ny > 0);
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([i as f64 / nx as f64, j as f64 / ny as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::new(vertices, cells).expect("structured grid is valid")
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &MeshEdge {
        &self.edges[e]
    }

    /// Edge ids of cell `c`; entry `k` joins loop vertices `k` and `k+1`.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        dist(self.vertices[a], self.vertices[b])
    }

    /// Cells incident to each vertex, in increasing cell order.
    pub fn vertex_cells(&self) -> Vec<Vec<usize>> {
        let mut vc = vec![Vec::new(); self.n_vertices()];
        for (c, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                vc[v].push(c);
            }
        }
        vc
    }

    /// Edges incident to each vertex, in increasing edge order.
    pub fn vertex_edges(&self) -> Vec<Vec<usize>> {
        let mut ve = vec![Vec::new(); self.n_vertices()];
        for (e, edge) in self.edges.iter().enumerate() {
            ve[edge.vertices[0]].push(e);
            ve[edge.vertices[1]].push(e);
        }
        ve
    }

    /// Cell-to-cell adjacency across interior edges.
    pub fn cell_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.n_cells()];
        for e in &self.edges {
            if let Some(o) = e.other {
                nb[e.cell].push(o);
                nb[o].push(e.cell);
            }
        }
        for l in &mut nb {
            l.sort_unstable();
            l.dedup();
        }
        nb
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| geometry::signed_area(&self.cell_points(c)))
            .sum()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    /// 64-bit FNV-1a hash of the exact coordinates and connectivity.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for p in &self.vertices {
            feed(p[0].to_bits());
            feed(p[1].to_bits());
        }
        for cell in &self.cells {
            feed(cell.len() as u64);
            for &v in cell {
                feed(v as u64);
            }
        }
        h
    }

    fn check_simple(&self, c: usize) -> Result<()> {
        let pts = self.cell_points(c);
        let area = geometry::signed_area(&pts);
        if !(area > 0.0) {
            return Err(Error::Cell {
                cell: c,
                reason: format!("non-positive signed area {area:e} (cells must be counter-clockwise)"),
            });
        }
        let n = pts.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                    return Err(Error::Cell {
                        cell: c,
                        reason: "self-intersecting boundary".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Proper or touching intersection of two closed segments.
fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d == 0.0 && p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}
