//! In-plane rigid body modes of a subdomain.

use nalgebra::DVector;

use crate::mesh::Point;

/// Translations `(1, 0)`, `(0, 1)` and the rotation
/// `(y − ŷ, −(x − x̂)) / H` about `center`, evaluated at `x`.
pub fn rigid_body_modes(h: f64, center: Point, x: Point) -> [[f64; 2]; 3] {
    [
        [1.0, 0.0],
        [0.0, 1.0],
        [(x[1] - center[1]) / h, -(x[0] - center[0]) / h],
    ]
}

/// Nodal traces of the three modes on `points` (two components per point).
pub fn rigid_mode_traces(h: f64, center: Point, points: &[Point]) -> [DVector<f64>; 3] {
    let n = 2 * points.len();
    let mut out = [DVector::zeros(n), DVector::zeros(n), DVector::zeros(n)];
    for (k, &x) in points.iter().enumerate() {
        let r = rigid_body_modes(h, center, x);
        for m in 0..3 {
            out[m][2 * k] = r[m][0];
            out[m][2 * k + 1] = r[m][1];
        }
    }
    out
}
