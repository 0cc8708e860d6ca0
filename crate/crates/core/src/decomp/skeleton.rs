//! Interface skeleton: subdomain corners and macro edges.
//!
//! An interface vertex lies in the closure of at least two subdomains.
//! Interface vertices on the physical boundary carry Dirichlet data and are
//! neither corners nor edge nodes. An interior interface vertex is a corner
//! if it touches three or more subdomains or if the number of interface
//! fine edges meeting there differs from two. Macro edges are the maximal
//! chains of interface fine edges between corners or Dirichlet vertices.

use std::collections::BTreeSet;

use super::Decomposition;
use crate::mesh::PolyMesh;

/// Connected piece of interface shared by subdomains `subs.0 < subs.1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroEdge {
    pub subs: (usize, usize),
    /// Polyline vertices `v_0 .. v_m`; the endpoints are corners or
    /// Dirichlet vertices and coincide for a closed loop. The polyline is
    /// oriented counter-clockwise with respect to subdomain `subs.0`.
    pub vertices: Vec<usize>,
    /// Fine edges `e_k = (v_k, v_{k+1})`.
    pub fine_edges: Vec<usize>,
}

impl MacroEdge {
    /// Number of fine edges.
    pub fn len(&self) -> usize {
        self.fine_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fine_edges.is_empty()
    }

    /// Vertices strictly inside the polyline.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.vertices[1..self.vertices.len() - 1]
    }

    pub fn endpoints(&self) -> [usize; 2] {
        [self.vertices[0], *self.vertices.last().unwrap()]
    }

    pub fn contains(&self, s: usize) -> bool {
        self.subs.0 == s || self.subs.1 == s
    }

    /// The subdomain across the edge from `s`.
    pub fn other(&self, s: usize) -> usize {
        if self.subs.0 == s {
            self.subs.1
        } else {
            self.subs.0
        }
    }

    /// Edge nodes in dof order: `mid(e_0), v_1, mid(e_1), ..., mid(e_{m-1})`.
    pub fn nodes(&self) -> Vec<EdgeNode> {
        let m = self.fine_edges.len();
        let mut out = Vec::with_capacity(2 * m - 1);
        for k in 0..m {
            if k > 0 {
                out.push(EdgeNode::Vertex(self.vertices[k]));
            }
            out.push(EdgeNode::Midpoint(self.fine_edges[k]));
        }
        out
    }
}

/// A velocity node on a macro edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeNode {
    Vertex(usize),
    Midpoint(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceSkeleton {
    /// Sorted subdomain ids whose closure contains each vertex.
    pub vertex_subs: Vec<Vec<usize>>,
    /// Interior interface vertices acting as subdomain corners, ascending.
    pub corners: Vec<usize>,
    /// Interface vertices on the physical boundary, ascending.
    pub dirichlet_vertices: Vec<usize>,
    /// Macro edges sorted by `(subs, first fine edge)`.
    pub edges: Vec<MacroEdge>,
}

impl InterfaceSkeleton {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() && self.corners.is_empty()
    }

    /// Multiplicity of a vertex (number of subdomain closures).
    pub fn vertex_multiplicity(&self, v: usize) -> usize {
        self.vertex_subs[v].len()
    }

    /// Macro edges bordering subdomain `s`, in skeleton order.
    pub fn edges_of(&self, s: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].contains(s)).collect()
    }

    /// Corners in the closure of subdomain `s`, ascending.
    pub fn corners_of(&self, s: usize) -> Vec<usize> {
        self.corners
            .iter()
            .copied()
            .filter(|&v| self.vertex_subs[v].binary_search(&s).is_ok())
            .collect()
    }
}

/// Extracts corners and macro edges of a decomposition.
pub fn extract_interface(mesh: &PolyMesh, decomp: &Decomposition) -> InterfaceSkeleton {
    let nv = mesh.n_vertices();
    let mut vertex_subs: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (c, cell) in mesh.cells().iter().enumerate() {
        for &v in cell {
            vertex_subs[v].push(decomp.sub_of(c));
        }
    }
    for l in &mut vertex_subs {
        l.sort_unstable();
        l.dedup();
    }

    let is_iface_edge = |e: usize| {
        let edge = mesh.edge(e);
        edge.other.is_some_and(|o| decomp.sub_of(o) != decomp.sub_of(edge.cell))
    };
    let mut iface_deg = vec![0usize; nv];
    let mut iface_edges = Vec::new();
    for e in 0..mesh.n_edges() {
        if is_iface_edge(e) {
            iface_edges.push(e);
            for v in mesh.edge(e).vertices {
                iface_deg[v] += 1;
            }
        }
    }

    let mut dirichlet = BTreeSet::new();
    let mut corners = BTreeSet::new();
    for v in 0..nv {
        if vertex_subs[v].len() < 2 {
            continue;
        }
        if mesh.is_boundary_vertex(v) {
            dirichlet.insert(v);
        } else if vertex_subs[v].len() >= 3 || iface_deg[v] != 2 {
            corners.insert(v);
        }
    }

    let vedges = mesh.vertex_edges();
    let vertex_iface_edges: Vec<Vec<usize>> = vedges
        .iter()
        .map(|l| l.iter().copied().filter(|&e| is_iface_edge(e)).collect())
        .collect();

    // orientation of a fine edge as traversed by the lower-index subdomain
    let oriented = |e: usize| -> (usize, usize, (usize, usize)) {
        let edge = mesh.edge(e);
        let (c0, c1) = (edge.cell, edge.other.unwrap());
        let (s0, s1) = (decomp.sub_of(c0), decomp.sub_of(c1));
        let low_cell = if s0 < s1 { c0 } else { c1 };
        let cell = mesh.cell(low_cell);
        let n = cell.len();
        let k = mesh.cell_edges(low_cell).iter().position(|&x| x == e).unwrap();
        (cell[k], cell[(k + 1) % n], (s0.min(s1), s0.max(s1)))
    };

    let mut visited = vec![false; mesh.n_edges()];
    let mut edges = Vec::new();
    loop {
        let mut progress = false;
        for &e0 in &iface_edges {
            if visited[e0] {
                continue;
            }
            let (a, b, subs) = oriented(e0);
            let terminal = |v: usize| corners.contains(&v) || dirichlet.contains(&v);
            let next_edge =
                |v: usize, from: usize| -> Option<usize> { vertex_iface_edges[v].iter().copied().find(|&x| x != from) };
            // walk forward from b
            let mut fwd_v = vec![a, b];
            let mut fwd_e = vec![e0];
            let mut closed = false;
            let mut cur = b;
            let mut from = e0;
            while !terminal(cur) {
                let nx = next_edge(cur, from).expect("non-terminal interface vertex has two interface edges");
                if nx == e0 {
                    closed = true;
                    break;
                }
                let ev = mesh.edge(nx).vertices;
                let w = if ev[0] == cur { ev[1] } else { ev[0] };
                fwd_e.push(nx);
                fwd_v.push(w);
                from = nx;
                cur = w;
            }
            if closed {
                // loop without any corner: promote its smallest vertex
                let v = *fwd_v.iter().min().unwrap();
                corners.insert(v);
                progress = true;
                break;
            }
            // walk backward from a
            let mut back_v = Vec::new();
            let mut back_e = Vec::new();
            let mut cur = a;
            let mut from = e0;
            while !terminal(cur) {
                let nx = next_edge(cur, from).unwrap();
                let ev = mesh.edge(nx).vertices;
                let w = if ev[0] == cur { ev[1] } else { ev[0] };
                back_e.push(nx);
                back_v.push(w);
                from = nx;
                cur = w;
            }
            back_v.reverse();
            back_e.reverse();
            let mut vertices = back_v;
            vertices.extend(fwd_v);
            let mut fine = back_e;
            fine.extend(fwd_e);
            for &e in &fine {
                visited[e] = true;
            }
            edges.push(MacroEdge {
                subs,
                vertices,
                fine_edges: fine,
            });
            progress = true;
        }
        if !progress {
            break;
        }
        if iface_edges.iter().all(|&e| visited[e]) {
            // a promotion may have happened after some chains were traced;
            // chains traced before remain valid since they end at terminals
            break;
        }
    }
    edges.sort_by(|x, y| {
        x.subs
            .cmp(&y.subs)
            .then(x.fine_edges.iter().min().cmp(&y.fine_edges.iter().min()))
    });

    InterfaceSkeleton {
        vertex_subs,
        corners: corners.into_iter().collect(),
        dirichlet_vertices: dirichlet.into_iter().collect(),
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decomp(m: &PolyMesh, part: Vec<usize>, n: usize) -> Decomposition {
        Decomposition::new(m, n, part).unwrap()
    }

    #[test]
    fn vertical_split_gives_one_edge() {
        let m = PolyMesh::structured(4, 2);
        let part = (0..8).map(|c| usize::from(c % 4 >= 2)).collect();
        let sk = extract_interface(&m, &decomp(&m, part, 2));
        assert_eq!(sk.edges.len(), 1);
        assert!(sk.corners.is_empty());
        assert_eq!(sk.dirichlet_vertices.len(), 2);
        let e = &sk.edges[0];
        assert_eq!(e.subs, (0, 1));
        assert_eq!(e.len(), 2);
        assert_eq!(e.nodes().len(), 3);
        // counter-clockwise for the left subdomain: upwards along x = 0.5
        assert!(m.vertex(e.vertices[0])[1] < m.vertex(e.vertices[2])[1]);
    }

    #[test]
    fn cross_point_gives_four_edges_one_corner() {
        let m = PolyMesh::structured(4, 4);
        let part = (0..16)
            .map(|c| {
                let (i, j) = (c % 4, c / 4);
                usize::from(i >= 2) + 2 * usize::from(j >= 2)
            })
            .collect();
        let sk = extract_interface(&m, &decomp(&m, part, 4));
        assert_eq!(sk.edges.len(), 4);
        assert_eq!(sk.corners, vec![12]);
        assert_eq!(sk.vertex_multiplicity(12), 4);
        let pairs: Vec<_> = sk.edges.iter().map(|e| e.subs).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn island_loop_gets_a_corner() {
        let m = PolyMesh::structured(3, 3);
        let part = (0..9).map(|c| usize::from(c == 4)).collect();
        let sk = extract_interface(&m, &decomp(&m, part, 2));
        assert_eq!(sk.corners.len(), 1);
        assert_eq!(sk.edges.len(), 1);
        let e = &sk.edges[0];
        assert_eq!(e.len(), 4);
        assert_eq!(e.endpoints()[0], e.endpoints()[1]);
        assert_eq!(e.endpoints()[0], sk.corners[0]);
    }
}
