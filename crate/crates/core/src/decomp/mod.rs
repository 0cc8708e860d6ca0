//! Non-overlapping subdomain decompositions of a mesh, the interface
//! skeleton (macro edges and subdomain corners) and velocity dof
//! classification.

pub mod classify;
pub mod partition;
pub mod skeleton;

pub use classify::{classify_dofs, DofClassification, DofLabel};
pub use partition::{partition_mesh, read_partition, write_partition, PartitionMethod};
pub use skeleton::{extract_interface, InterfaceSkeleton, MacroEdge};

use crate::error::{Error, Result};
use crate::mesh::geometry::polygon_geometry;
use crate::mesh::{dist, Point, PolyMesh};

/// Cell-to-subdomain assignment with derived per-subdomain data.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    n_sub: usize,
    element_to_sub: Vec<usize>,
    sub_cells: Vec<Vec<usize>>,
    diameters: Vec<f64>,
    centroids: Vec<Point>,
    areas: Vec<f64>,
}

impl Decomposition {
    /// Validates that every subdomain is non-empty and computes subdomain
    /// diameters, area-weighted centroids and areas. Connectivity is not
    /// required here; see [`Decomposition::is_connected`].
    pub fn new(mesh: &PolyMesh, n_sub: usize, element_to_sub: Vec<usize>) -> Result<Self> {
        if n_sub == 0 {
            return Err(Error::Partition("n_sub must be positive".into()));
        }
        if element_to_sub.len() != mesh.n_cells() {
            return Err(Error::Partition(format!(
                "{} cell assignments for a mesh with {} cells",
                element_to_sub.len(),
                mesh.n_cells()
            )));
        }
        let mut sub_cells = vec![Vec::new(); n_sub];
        for (c, &s) in element_to_sub.iter().enumerate() {
            if s >= n_sub {
                return Err(Error::Partition(format!(
                    "cell {c} assigned to subdomain {s} >= {n_sub}"
                )));
            }
            sub_cells[s].push(c);
        }
        if let Some(s) = sub_cells.iter().position(|l| l.is_empty()) {
            return Err(Error::Partition(format!("subdomain {s} is empty")));
        }
        let mut diameters = Vec::with_capacity(n_sub);
        let mut centroids = Vec::with_capacity(n_sub);
        let mut areas = Vec::with_capacity(n_sub);
        for cells in &sub_cells {
            let mut verts: Vec<usize> = cells.iter().flat_map(|&c| mesh.cell(c).iter().copied()).collect();
            verts.sort_unstable();
            verts.dedup();
            let mut h: f64 = 0.0;
            for (a, &va) in verts.iter().enumerate() {
                for &vb in &verts[a + 1..] {
                    h = h.max(dist(mesh.vertex(va), mesh.vertex(vb)));
                }
            }
            let (mut area, mut cx, mut cy) = (0.0, 0.0, 0.0);
            for &c in cells {
                let g = polygon_geometry(&mesh.cell_points(c));
                area += g.area;
                cx += g.area * g.centroid[0];
                cy += g.area * g.centroid[1];
            }
            diameters.push(h);
            centroids.push([cx / area, cy / area]);
            areas.push(area);
        }
        Ok(Self {
            n_sub,
            element_to_sub,
            sub_cells,
            diameters,
            centroids,
            areas,
        })
    }

    /// Everything in subdomain 0.
    pub fn single(mesh: &PolyMesh) -> Self {
        Self::new(mesh, 1, vec![0; mesh.n_cells()]).expect("single subdomain is valid")
    }

    pub fn n_sub(&self) -> usize {
        self.n_sub
    }

    pub fn sub_of(&self, cell: usize) -> usize {
        self.element_to_sub[cell]
    }

    pub fn element_to_sub(&self) -> &[usize] {
        &self.element_to_sub
    }

    /// Cells of subdomain `s`, ascending.
    pub fn cells(&self, s: usize) -> &[usize] {
        &self.sub_cells[s]
    }

    /// Diameter H_s (largest vertex-to-vertex distance).
    pub fn diameter(&self, s: usize) -> f64 {
        self.diameters[s]
    }

    pub fn centroid(&self, s: usize) -> Point {
        self.centroids[s]
    }

    pub fn area(&self, s: usize) -> f64 {
        self.areas[s]
    }

    /// Largest over smallest part size.
    pub fn balance_ratio(&self) -> f64 {
        let max = self.sub_cells.iter().map(Vec::len).max().unwrap_or(0);
        let min = self.sub_cells.iter().map(Vec::len).min().unwrap_or(0);
        max as f64 / min.max(1) as f64
    }

    /// Edge-connected components of each subdomain's cell set.
    pub fn components(&self, mesh: &PolyMesh) -> Vec<Vec<Vec<usize>>> {
        components(mesh, &self.element_to_sub, self.n_sub)
    }

    pub fn is_connected(&self, mesh: &PolyMesh) -> bool {
        self.components(mesh).iter().all(|c| c.len() == 1)
    }

    /// Returns a decomposition whose subdomain ids are permuted:
    /// new id of old subdomain `s` is `perm[s]`.
    pub fn relabeled(&self, mesh: &PolyMesh, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_sub {
            return Err(Error::Partition("permutation length differs from n_sub".into()));
        }
        let map = self.element_to_sub.iter().map(|&s| perm[s]).collect();
        Self::new(mesh, self.n_sub, map)
    }
}

/// Per part, its edge-connected components (each sorted; components
/// ordered by smallest cell id).
pub(crate) fn components(mesh: &PolyMesh, part: &[usize], n_sub: usize) -> Vec<Vec<Vec<usize>>> {
    let nb = mesh.cell_neighbors();
    let mut seen = vec![false; mesh.n_cells()];
    let mut out = vec![Vec::new(); n_sub];
    for start in 0..mesh.n_cells() {
        if seen[start] {
            continue;
        }
        let s = part[start];
        let mut comp = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < comp.len() {
            let c = comp[k];
            k += 1;
            for &o in &nb[c] {
                if !seen[o] && part[o] == s {
                    seen[o] = true;
                    comp.push(o);
                }
            }
        }
        comp.sort_unstable();
        out[s].push(comp);
    }
    out
}
