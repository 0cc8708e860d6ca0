//! Shape-regularity audit of a mesh.

use super::geometry::polygon_geometry;
use super::{dist, PolyMesh};

/// Result of [`validate_mesh`].
#[derive(Clone, Debug, PartialEq)]
pub struct MeshQualityReport {
    /// Minimum over cells of (distance from centroid to the nearest edge
    /// line) / h_K; a proxy for the star-shapedness constant.
    pub min_inradius_ratio: f64,
    /// Minimum over cells of (smallest vertex-to-vertex distance) / h_K.
    pub min_vertex_gap_ratio: f64,
    /// Cells below `gamma_min`, ascending.
    pub inradius_violations: Vec<usize>,
    /// Cells below `c_min`, ascending.
    pub gap_violations: Vec<usize>,
}

impl MeshQualityReport {
    /// Every offending cell id, ascending and deduplicated.
    pub fn offending_cells(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .inradius_violations
            .iter()
            .chain(&self.gap_violations)
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn is_clean(&self) -> bool {
        self.inradius_violations.is_empty() && self.gap_violations.is_empty()
    }
}

/// Per-cell (inradius ratio, vertex gap ratio).
pub fn cell_ratios(mesh: &PolyMesh, c: usize) -> (f64, f64) {
    let pts = mesh.cell_points(c);
    let g = polygon_geometry(&pts);
    let n = pts.len();
    let mut inr = f64::INFINITY;
    for k in 0..n {
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        let l = dist(p, q);
        if l == 0.0 {
            inr = 0.0;
            continue;
        }
        let d = ((q[0] - p[0]) * (g.centroid[1] - p[1]) - (q[1] - p[1]) * (g.centroid[0] - p[0])) / l;
        inr = inr.min(d.max(0.0));
    }
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            gap = gap.min(dist(pts[i], pts[j]));
        }
    }
    (inr / g.diameter, gap / g.diameter)
}

/// Flags cells with inradius ratio below `gamma_min` or vertex gap ratio
/// below `c_min`. Read-only.
pub fn validate_mesh(mesh: &PolyMesh, gamma_min: f64, c_min: f64) -> MeshQualityReport {
    let mut rep = MeshQualityReport {
        min_inradius_ratio: f64::INFINITY,
        min_vertex_gap_ratio: f64::INFINITY,
        inradius_violations: Vec::new(),
        gap_violations: Vec::new(),
    };
    for c in 0..mesh.n_cells() {
        let (r, g) = cell_ratios(mesh, c);
        rep.min_inradius_ratio = rep.min_inradius_ratio.min(r);
        rep.min_vertex_gap_ratio = rep.min_vertex_gap_ratio.min(g);
        if r < gamma_min {
            rep.inradius_violations.push(c);
        }
        if g < c_min {
            rep.gap_violations.push(c);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_is_clean() {
        let m = PolyMesh::unit_square();
        let r = validate_mesh(&m, 0.1, 0.1);
        assert!(r.is_clean());
        assert!((r.min_inradius_ratio - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!((r.min_vertex_gap_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn close_vertices_flagged() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [1.0 - 1e-9, 1.0], [0.0, 1.0]];
        let m = PolyMesh::new(v, vec![vec![0, 1, 2, 3, 4]]).unwrap();
        let r = validate_mesh(&m, 0.01, 0.01);
        assert_eq!(r.gap_violations, vec![0]);
        assert!(r.inradius_violations.is_empty());
        assert_eq!(r.offending_cells(), vec![0]);
    }
}
