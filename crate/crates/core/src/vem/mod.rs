//! Degree-2 divergence-free Stokes virtual element on one polygonal cell.
//!
//! Local velocity dofs of a cell with `n` edges (`4n + 2` in total):
//!
//! * `2k + c`: component `c` at vertex `k` (counter-clockwise);
//! * `2n + 2k + c`: component `c` at the midpoint of edge `k`, which joins
//!   vertices `k` and `k + 1` (the interior 3-point Gauss–Lobatto node);
//! * `4n + α`: scaled divergence moment `(h_K/|K|) ∫_K div v m_{1+α}`.
//!
//! Pressures are P1 on each cell, stored as coefficients of the scaled
//! monomials `m0, m1, m2`.
//!
//! Every quantity is computed from dofs only. Edge integrals use the
//! 3-point Gauss–Lobatto rule (weights L/6, 4L/6, L/6), exact for the
//! cubic integrands involved; cell integrals of polynomials use the fan
//! quadrature of [`crate::mesh::geometry`].

pub mod monomials;

use nalgebra::{DMatrix, DVector};

pub use monomials::{ScaledMonomials, N_P1, N_P2, N_VEC_P2};

use crate::error::{Error, Result};
use crate::mesh::geometry::{polygon_geometry, polygon_points_quadrature, CellGeometry, QuadPoint};
use crate::mesh::{Point, PolyMesh};

/// Quadrature degree for cell integrals of polynomial products.
const CELL_QUAD_ORDER: usize = 4;

/// Local dof layout of a cell with `n_edges` edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalDofLayout {
    pub n_edges: usize,
}

impl LocalDofLayout {
    pub fn n_velocity(&self) -> usize {
        4 * self.n_edges + 2
    }

    pub fn n_pressure(&self) -> usize {
        N_P1
    }

    pub fn vertex(&self, k: usize, c: usize) -> usize {
        2 * k + c
    }

    pub fn edge(&self, k: usize, c: usize) -> usize {
        2 * self.n_edges + 2 * k + c
    }

    pub fn moment(&self, alpha: usize) -> usize {
        4 * self.n_edges + alpha
    }
}

/// Dof-computable operators of one cell, independent of the viscosity.
#[derive(Clone, Debug)]
pub struct LocalElement {
    pub cell: usize,
    pub layout: LocalDofLayout,
    pub geometry: CellGeometry,
    pub monomials: ScaledMonomials,
    /// Π∇ as coefficients in `[P2]²` (12 × N).
    pub pi_star: DMatrix<f64>,
    /// Dofs of the 12 vector monomials (N × 12).
    pub d: DMatrix<f64>,
    /// Exact stiffness Gram matrix `∫ ∇p_j : ∇p_k` (12 × 12).
    pub gram: DMatrix<f64>,
    /// `∫_K div v m_a` for the three P1 monomials (3 × N).
    pub b: DMatrix<f64>,
    /// `∫_K v_c` for both components (2 × N).
    pub mean: DMatrix<f64>,
    /// `∫_K m_a m_b` (3 × 3).
    pub mass_q: DMatrix<f64>,
    consistency: DMatrix<f64>,
    stabilization: DMatrix<f64>,
    sigma: f64,
}

/// Gauss–Lobatto nodes of edge `k`: (point, weight, local node id, ...).
struct EdgeRule {
    normal: [f64; 2],
    nodes: [(Point, f64, usize); 3],
}

impl LocalElement {
    pub fn new(mesh: &PolyMesh, cell: usize) -> Result<Self> {
        if cell >= mesh.n_cells() {
            return Err(Error::InvalidMesh(format!("no cell with id {cell}")));
        }
        Self::from_points(&mesh.cell_points(cell), cell)
    }

    /// Builds the element for a counter-clockwise vertex loop; `cell` is
    /// used in error messages only.
    pub fn from_points(pts: &[Point], cell: usize) -> Result<Self> {
        let n = pts.len();
        let layout = LocalDofLayout { n_edges: n };
        let nd = layout.n_velocity();
        let geometry = polygon_geometry(pts);
        if !(geometry.area > 0.0) {
            return Err(Error::Cell {
                cell,
                reason: "non-positive area".into(),
            });
        }
        let area = geometry.area;
        let h = geometry.diameter;
        let mono = ScaledMonomials::new(geometry.centroid, h);
        let quad: Vec<QuadPoint> =
            polygon_points_quadrature(pts, geometry.centroid, CELL_QUAD_ORDER).ok_or_else(|| Error::Cell {
                cell,
                reason: "not star-shaped with respect to its centroid".into(),
            })?;

        let rules: Vec<EdgeRule> = (0..n)
            .map(|k| {
                let (p, q) = (pts[k], pts[(k + 1) % n]);
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                let l = dx.hypot(dy);
                let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                EdgeRule {
                    normal: [dy / l, -dx / l],
                    nodes: [(p, l / 6.0, k), (mid, 4.0 * l / 6.0, n + k), (q, l / 6.0, (k + 1) % n)],
                }
            })
            .collect();
        // nodal id -> (x dof, y dof)
        let node_dofs = |id: usize| -> [usize; 2] {
            if id < n {
                [layout.vertex(id, 0), layout.vertex(id, 1)]
            } else {
                [layout.edge(id - n, 0), layout.edge(id - n, 1)]
            }
        };

        // ∫_K ∂_c m_a m_b for the divergence moments, ∫ ∇m_a·∇m_b, ∫ m_a m_b
        let mut dm = [[[0.0; 2]; 2]; N_P2]; // [a][c][alpha]
        let mut gm = [[0.0; N_P2]; N_P2];
        let mut mq = [[0.0; N_P1]; N_P1];
        for qp in &quad {
            let v = mono.eval(qp.x);
            let g = mono.grad(qp.x);
            for a in 0..N_P2 {
                for c in 0..2 {
                    for al in 0..2 {
                        dm[a][c][al] += qp.w * g[a][c] * v[1 + al];
                    }
                }
                for b in 0..N_P2 {
                    gm[a][b] += qp.w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
            for a in 0..N_P1 {
                for b in 0..N_P1 {
                    mq[a][b] += qp.w * v[a] * v[b];
                }
            }
        }

        // dofs of the vector monomials
        let mut d = DMatrix::zeros(nd, N_VEC_P2);
        for a in 0..N_P2 {
            for c in 0..2 {
                let j = 2 * a + c;
                for k in 0..n {
                    d[(layout.vertex(k, c), j)] = mono.eval(pts[k])[a];
                    let mid = [
                        0.5 * (pts[k][0] + pts[(k + 1) % n][0]),
                        0.5 * (pts[k][1] + pts[(k + 1) % n][1]),
                    ];
                    d[(layout.edge(k, c), j)] = mono.eval(mid)[a];
                }
                for al in 0..2 {
                    d[(layout.moment(al), j)] = h / area * dm[a][c][al];
                }
            }
        }

        // ∫_K v_c = -|K| d_c + h ∫_∂K (v·n) m_{1+c}
        let mut mean = DMatrix::zeros(2, nd);
        for c in 0..2 {
            mean[(c, layout.moment(c))] = -area;
            for r in &rules {
                for &(x, w, id) in &r.nodes {
                    let m = mono.eval(x)[1 + c];
                    let dofs = node_dofs(id);
                    mean[(c, dofs[0])] += h * w * r.normal[0] * m;
                    mean[(c, dofs[1])] += h * w * r.normal[1] * m;
                }
            }
        }

        // right-hand side of the projection: ∫∇v:∇p_j for non-constant p_j,
        // vertex averages for the constants
        let lap = mono.laplacian();
        let mut bt = DMatrix::zeros(N_VEC_P2, nd);
        for c in 0..2 {
            for k in 0..n {
                bt[(c, layout.vertex(k, c))] = 1.0 / n as f64;
            }
        }
        for a in 1..N_P2 {
            for c in 0..2 {
                let j = 2 * a + c;
                if lap[a] != 0.0 {
                    for col in 0..nd {
                        bt[(j, col)] -= lap[a] * mean[(c, col)];
                    }
                }
                for r in &rules {
                    for &(x, w, id) in &r.nodes {
                        let g = mono.grad(x)[a];
                        let dn = g[0] * r.normal[0] + g[1] * r.normal[1];
                        bt[(j, node_dofs(id)[c])] += w * dn;
                    }
                }
            }
        }
        let gt = &bt * &d;
        let lu = gt.clone().lu();
        let pi_star = lu.solve(&bt).ok_or_else(|| Error::Cell {
            cell,
            reason: "singular projection Gram matrix".into(),
        })?;
        let rcond_check = (&pi_star * &d - DMatrix::<f64>::identity(N_VEC_P2, N_VEC_P2))
            .abs()
            .max();
        if !rcond_check.is_finite() || rcond_check > 1e-6 {
            return Err(Error::Cell {
                cell,
                reason: format!("ill-conditioned projection (reproduction error {rcond_check:e})"),
            });
        }

        let mut gram = DMatrix::zeros(N_VEC_P2, N_VEC_P2);
        for a in 0..N_P2 {
            for b in 0..N_P2 {
                for c in 0..2 {
                    gram[(2 * a + c, 2 * b + c)] = gm[a][b];
                }
            }
        }

        let mut b = DMatrix::zeros(N_P1, nd);
        for r in &rules {
            for &(_, w, id) in &r.nodes {
                let dofs = node_dofs(id);
                b[(0, dofs[0])] += w * r.normal[0];
                b[(0, dofs[1])] += w * r.normal[1];
            }
        }
        for al in 0..2 {
            b[(1 + al, layout.moment(al))] = area / h;
        }

        let mass_q = DMatrix::from_fn(N_P1, N_P1, |i, j| mq[i][j]);
        let consistency = {
            let c = pi_star.transpose() * &gram * &pi_star;
            (&c + c.transpose()) * 0.5
        };
        let proj = &d * &pi_star;
        let resid = DMatrix::<f64>::identity(nd, nd) - proj;
        let stabilization = {
            let s = resid.transpose() * &resid;
            (&s + s.transpose()) * 0.5
        };
        let sigma = consistency.trace() / nd as f64;

        Ok(Self {
            cell,
            layout,
            geometry,
            monomials: mono,
            pi_star,
            d,
            gram,
            b,
            mean,
            mass_q,
            consistency,
            stabilization,
            sigma,
        })
    }

    pub fn n_velocity(&self) -> usize {
        self.layout.n_velocity()
    }

    /// Π∇ as a map from dofs to dofs (N × N).
    pub fn projector_dofs(&self) -> DMatrix<f64> {
        &self.d * &self.pi_star
    }

    /// `ν̄ [Π*ᵀ G Π* + σ (I - DΠ*)ᵀ(I - DΠ*)]` with σ the trace scaling.
    pub fn stiffness(&self, nu: f64) -> Result<DMatrix<f64>> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::Cell {
                cell: self.cell,
                reason: format!("viscosity must be positive, got {nu}"),
            });
        }
        Ok((&self.consistency + &self.stabilization * self.sigma) * nu)
    }

    /// Load vector `f(x_K) · ∫_K v`.
    pub fn load(&self, f: [f64; 2]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_velocity());
        for c in 0..2 {
            if f[c] != 0.0 {
                out.axpy(f[c], &self.mean.row(c).transpose(), 1.0);
            }
        }
        out
    }

    /// Dofs of the vector polynomial with coefficients `coef`.
    pub fn interpolate_poly(&self, coef: &[f64]) -> DVector<f64> {
        &self.d * DVector::from_column_slice(coef)
    }

    /// Dofs of a smooth field given its values and divergence; the moments
    /// are integrated with a rule of degree `order`.
    pub fn interpolate(
        &self,
        pts: &[Point],
        u: impl Fn(Point) -> [f64; 2],
        div_u: impl Fn(Point) -> f64,
        order: usize,
    ) -> DVector<f64> {
        let n = self.layout.n_edges;
        let mut v = DVector::zeros(self.n_velocity());
        for k in 0..n {
            let p = pts[k];
            let q = pts[(k + 1) % n];
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let (a, b) = (u(p), u(mid));
            for c in 0..2 {
                v[self.layout.vertex(k, c)] = a[c];
                v[self.layout.edge(k, c)] = b[c];
            }
        }
        let quad = polygon_points_quadrature(pts, self.geometry.centroid, order).expect("checked in new");
        for qp in &quad {
            let m = self.monomials.eval(qp.x);
            let dv = div_u(qp.x);
            for al in 0..2 {
                v[self.layout.moment(al)] += qp.w * dv * m[1 + al];
            }
        }
        let s = self.geometry.diameter / self.geometry.area;
        for al in 0..2 {
            v[self.layout.moment(al)] *= s;
        }
        v
    }
}

/// Scaled monomial basis of cell `cell`.
pub fn scaled_monomials(mesh: &PolyMesh, cell: usize) -> Result<ScaledMonomials> {
    let g = crate::mesh::cell_geometry(mesh, cell)?;
    Ok(ScaledMonomials::new(g.centroid, g.diameter))
}

/// Π∇ coefficients (12 × N) of cell `cell`.
pub fn energy_projector(mesh: &PolyMesh, cell: usize) -> Result<DMatrix<f64>> {
    Ok(LocalElement::new(mesh, cell)?.pi_star)
}

/// Divergence coupling `B_K` (3 × N).
pub fn local_divergence(mesh: &PolyMesh, cell: usize) -> Result<DMatrix<f64>> {
    Ok(LocalElement::new(mesh, cell)?.b)
}

/// Stabilized stiffness `A_K` for viscosity `nu`.
pub fn local_stiffness(mesh: &PolyMesh, cell: usize, nu: f64) -> Result<DMatrix<f64>> {
    LocalElement::new(mesh, cell)?.stiffness(nu)
}

/// Pressure mass matrix `M_Q` (3 × 3).
pub fn local_pressure_mass(mesh: &PolyMesh, cell: usize) -> Result<DMatrix<f64>> {
    Ok(LocalElement::new(mesh, cell)?.mass_q)
}

/// Load vector with `f` sampled at the centroid.
pub fn local_load(mesh: &PolyMesh, cell: usize, f: impl Fn(Point) -> [f64; 2]) -> Result<DVector<f64>> {
    let el = LocalElement::new(mesh, cell)?;
    Ok(el.load(f(el.geometry.centroid)))
}
