//! Cell geometry and polygon quadrature.

use super::{dist, Point, PolyMesh};
use crate::error::{Error, Result};

/// Basic geometric quantities of one polygonal cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGeometry {
    pub area: f64,
    pub centroid: Point,
    /// Maximum distance between two vertices.
    pub diameter: f64,
    /// Length of edge `k`, which joins loop vertices `k` and `k+1`.
    pub edge_lengths: Vec<f64>,
}

/// A quadrature node with its weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPoint {
    pub x: Point,
    pub w: f64,
}

/// Largest polynomial degree [`polygon_quadrature`] accepts.
pub const MAX_QUAD_ORDER: usize = 30;

pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for k in 0..n {
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

pub fn polygon_geometry(pts: &[Point]) -> CellGeometry {
    let n = pts.len();
    let area = signed_area(pts);
    // area-weighted centroid, accumulated relative to the first vertex
    let o = pts[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for k in 0..n {
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        let (px, py, qx, qy) = (p[0] - o[0], p[1] - o[1], q[0] - o[0], q[1] - o[1]);
        let cross = px * qy - qx * py;
        cx += (px + qx) * cross;
        cy += (py + qy) * cross;
    }
    let centroid = [o[0] + cx / (6.0 * area), o[1] + cy / (6.0 * area)];
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            diameter = diameter.max(dist(pts[i], pts[j]));
        }
    }
    let edge_lengths = (0..n).map(|k| dist(pts[k], pts[(k + 1) % n])).collect();
    CellGeometry {
        area,
        centroid,
        diameter,
        edge_lengths,
    }
}

/// Shoelace area, area-weighted centroid and diameter of `cell`.
pub fn cell_geometry(mesh: &PolyMesh, cell: usize) -> Result<CellGeometry> {
    if cell >= mesh.n_cells() {
        return Err(Error::InvalidMesh(format!("no cell with id {cell}")));
    }
    Ok(polygon_geometry(&mesh.cell_points(cell)))
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on the three-term
/// recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Collapsed (Duffy) Gauss–Legendre product rule on a triangle, exact
/// for total degree `order`.
pub fn triangle_rule(a: Point, b: Point, c: Point, order: usize, out: &mut Vec<QuadPoint>) {
    let n = (order + 2).div_ceil(2);
    let (gx, gw) = gauss_legendre(n);
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    for (iu, &xu) in gx.iter().enumerate() {
        let u = 0.5 * (xu + 1.0);
        for (iv, &xv) in gx.iter().enumerate() {
            let v = 0.5 * (xv + 1.0);
            let s = u * (1.0 - v);
            let t = u * v;
            let x = [
                a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
                a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
            ];
            // d(x)/d(u,v) = u * |2T| on [0,1]^2, GL weights carry a factor 1/4
            out.push(QuadPoint {
                x,
                w: 0.25 * gw[iu] * gw[iv] * u * area2,
            });
        }
    }
}

/// Fan sub-triangulation from the centroid with a triangle rule exact to
/// `order` on each piece.
pub fn polygon_points_quadrature(pts: &[Point], centroid: Point, order: usize) -> Option<Vec<QuadPoint>> {
    let n = pts.len();
    let mut out = Vec::new();
    for k in 0..n {
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        let sub = (p[0] - centroid[0]) * (q[1] - centroid[1]) - (q[0] - centroid[0]) * (p[1] - centroid[1]);
        if sub < 0.0 {
            return None;
        }
        if sub == 0.0 {
            continue;
        }
        triangle_rule(centroid, p, q, order, &mut out);
    }
    Some(out)
}

/// Quadrature on `cell` exact for bivariate polynomials of total degree
/// `order`. Fails if the cell is not star-shaped with respect to its
/// centroid.
pub fn polygon_quadrature(mesh: &PolyMesh, cell: usize, order: usize) -> Result<Vec<QuadPoint>> {
    if order == 0 || order > MAX_QUAD_ORDER {
        return Err(Error::Cell {
            cell,
            reason: format!("unsupported quadrature order {order}"),
        });
    }
    let g = cell_geometry(mesh, cell)?;
    polygon_points_quadrature(&mesh.cell_points(cell), g.centroid, order).ok_or_else(|| Error::Cell {
        cell,
        reason: "not star-shaped with respect to its centroid (negative fan triangle)".into(),
    })
}
