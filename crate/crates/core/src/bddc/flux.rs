//! No-net-flux constraint of a macro edge.

use nalgebra::DVector;

use crate::decomp::MacroEdge;
use crate::error::{Error, Result};
use crate::mesh::PolyMesh;

/// Weights of `∫_E v·n` (normal pointing from `subs.0` to `subs.1`) for
/// quadratic edge traces, split into the part acting on the edge's own
/// dofs and the part acting on the two endpoint velocities.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxConstraint {
    /// Acts on the edge dofs in [`MacroEdge::nodes`] order, two
    /// components per node.
    pub interior: DVector<f64>,
    /// Weights of the velocities at the first and last polyline vertex.
    pub endpoints: [[f64; 2]; 2],
}

impl FluxConstraint {
    /// `∫_E v·n` for the trace with edge dofs `edge_values` and endpoint
    /// velocities `ends`.
    pub fn flux(&self, edge_values: &[f64], ends: [[f64; 2]; 2]) -> f64 {
        let mut s: f64 = self.interior.iter().zip(edge_values).map(|(c, v)| c * v).sum();
        for k in 0..2 {
            s += self.endpoints[k][0] * ends[k][0] + self.endpoints[k][1] * ends[k][1];
        }
        s
    }
}

/// Per fine edge `(a, b)` with length `L` and unit normal `n`, Simpson's
/// rule gives `L/6 v(a)·n + 4L/6 v(mid)·n + L/6 v(b)·n`, exact for
/// quadratic traces.
pub fn no_net_flux_constraint(mesh: &PolyMesh, edge: &MacroEdge, edge_id: usize) -> Result<FluxConstraint> {
    let m = edge.len();
    if m == 0 {
        return Err(Error::Edge {
            edge: edge_id,
            reason: "macro edge without fine edges".into(),
        });
    }
    let mut c = DVector::zeros(2 * (2 * m - 1));
    let mut ends = [[0.0; 2]; 2];
    for k in 0..m {
        let (pa, pb) = (mesh.vertex(edge.vertices[k]), mesh.vertex(edge.vertices[k + 1]));
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        if dx.hypot(dy) == 0.0 {
            return Err(Error::Edge {
                edge: edge_id,
                reason: format!("fine edge {} has zero length", edge.fine_edges[k]),
            });
        }
        // (dy, -dx) = L·n for a counter-clockwise traversal of subs.0
        let ln = [dy, -dx];
        let mid = 2 * k;
        for comp in 0..2 {
            c[2 * mid + comp] += 4.0 / 6.0 * ln[comp];
            if k > 0 {
                c[2 * (mid - 1) + comp] += ln[comp] / 6.0;
            } else {
                ends[0][comp] += ln[comp] / 6.0;
            }
            if k + 1 < m {
                c[2 * (mid + 1) + comp] += ln[comp] / 6.0;
            } else {
                ends[1][comp] += ln[comp] / 6.0;
            }
        }
    }
    Ok(FluxConstraint {
        interior: c,
        endpoints: ends,
    })
}
