//! Application of `M⁻¹ = T R̃_Dᵀ S̃⁻¹ R̃_D Tᵀ` on `[u_Γ; p0]` vectors.
//!
//! After the per-edge change of basis `T`, primal coordinates (corner dofs
//! and the leading transformed coordinates of every edge) are assembled and
//! coupled to the subdomain pressure constants in a coarse saddle problem;
//! the remaining dual coordinates are eliminated subdomain by subdomain.

use std::ops::Range;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, FullPivLU};
use rayon::prelude::*;

use super::{build_scaling, EdgeTransformation, ScalingKind, ScalingOperator};
use crate::assembly::SubdomainOperator;
use crate::decomp::{DofClassification, InterfaceSkeleton};
use crate::error::{Error, Result};
use crate::linalg::{principal, submatrix, symmetrized};

/// Relative size of the transformed `b0` on dual coordinates above which
/// the flux constraint is considered missing.
const B0_DUAL_TOL: f64 = 1e-8;

/// One dual block of a subdomain: coordinates `offset..offset+len` of the
/// local dual vector belong to edge `edge`, seen from side `side`.
#[derive(Clone, Copy, Debug)]
struct Segment {
    edge: usize,
    side: usize,
    offset: usize,
    len: usize,
}

#[derive(Debug)]
struct SubLocal {
    sub: usize,
    primal_global: Vec<usize>,
    segments: Vec<Segment>,
    n_dual: usize,
    chol: Option<Cholesky<f64, Dyn>>,
    /// `S_ΔΠ` in the transformed basis.
    s_dp: DMatrix<f64>,
    /// `S_ΔΔ⁻¹ S_ΔΠ`.
    phi: DMatrix<f64>,
    /// Local primal Schur complement `S_ΠΠ − S_ΠΔ S_ΔΔ⁻¹ S_ΔΠ`.
    coarse_local: DMatrix<f64>,
    b0_primal: DVector<f64>,
}

/// A vector of the partially assembled space: one copy of the primal
/// coordinates and per-subdomain dual coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialVector {
    pub primal: Vec<f64>,
    pub dual: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct BddcPreconditioner {
    n_gamma: usize,
    n_sub: usize,
    n_primal: usize,
    edge_ranges: Vec<Range<usize>>,
    edge_subs: Vec<(usize, usize)>,
    transforms: Vec<EdgeTransformation>,
    /// Γ coordinate (in the transformed basis) of each primal unknown.
    primal_coords: Vec<usize>,
    scaling: ScalingOperator,
    subs: Vec<SubLocal>,
    coarse_matrix: DMatrix<f64>,
    coarse_lu: FullPivLU<f64, Dyn, Dyn>,
}

/// Block-diagonal local transformation of a subdomain's interface.
fn local_transformation(
    op: &SubdomainOperator,
    classes: &DofClassification,
    skeleton: &InterfaceSkeleton,
    transforms: &[EdgeTransformation],
) -> Result<DMatrix<f64>> {
    let n = op.n_gamma();
    let mut t = DMatrix::identity(n, n);
    for e in skeleton.edges_of(op.sub) {
        let lr = op.local_range(&classes.edge_ranges[e]).ok_or_else(|| Error::Edge {
            edge: e,
            reason: format!("not contiguous in subdomain {}", op.sub),
        })?;
        t.view_mut((lr.start, lr.start), (lr.len(), lr.len()))
            .copy_from(&transforms[e].q);
    }
    Ok(t)
}

impl BddcPreconditioner {
    /// `transforms` holds one transformation per macro edge whose leading
    /// columns include the no-net-flux constraint.
    pub fn new(
        subs: &[SubdomainOperator],
        skeleton: &InterfaceSkeleton,
        classes: &DofClassification,
        transforms: Vec<EdgeTransformation>,
        scaling: ScalingKind,
    ) -> Result<Self> {
        let n_gamma = classes.n_gamma();
        let n_sub = subs.len();
        if transforms.len() != skeleton.edges.len() {
            return Err(Error::Dimension(format!(
                "{} edge transformations for {} macro edges",
                transforms.len(),
                skeleton.edges.len()
            )));
        }
        for (e, t) in transforms.iter().enumerate() {
            if t.dim() != classes.edge_ranges[e].len() {
                return Err(Error::Dimension(format!("transformation of edge {e} has wrong size")));
            }
        }
        let scaling = build_scaling(scaling, subs, skeleton, classes, Some(&transforms))?;

        let mut gamma_primal = vec![None; n_gamma];
        let mut primal_coords = Vec::new();
        for g in classes.corner_range.clone() {
            gamma_primal[g] = Some(primal_coords.len());
            primal_coords.push(g);
        }
        for (e, r) in classes.edge_ranges.iter().enumerate() {
            for g in r.start..r.start + transforms[e].n_primal {
                gamma_primal[g] = Some(primal_coords.len());
                primal_coords.push(g);
            }
        }
        let n_primal = primal_coords.len();

        let locals: Vec<SubLocal> = subs
            .par_iter()
            .map(|op| build_local(op, skeleton, classes, &transforms, &gamma_primal))
            .collect::<Result<_>>()?;

        let nc = n_primal + n_sub + 1;
        let mut cm = DMatrix::zeros(nc, nc);
        for loc in &locals {
            for (a, &ga) in loc.primal_global.iter().enumerate() {
                for (b, &gb) in loc.primal_global.iter().enumerate() {
                    cm[(ga, gb)] += loc.coarse_local[(a, b)];
                }
                cm[(n_primal + loc.sub, ga)] += loc.b0_primal[a];
                cm[(ga, n_primal + loc.sub)] += loc.b0_primal[a];
            }
            cm[(n_primal + loc.sub, nc - 1)] = 1.0;
            cm[(nc - 1, n_primal + loc.sub)] = 1.0;
        }
        let lu = cm.clone().full_piv_lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..nc).map(|k| u[(k, k)].abs()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(dmin > 1e-15 * nc as f64 * dmax) {
            return Err(Error::Singular(format!(
                "coarse matrix (pivot ratio {:e})",
                dmin / dmax
            )));
        }

        Ok(Self {
            n_gamma,
            n_sub,
            n_primal,
            edge_ranges: classes.edge_ranges.clone(),
            edge_subs: skeleton.edges.iter().map(|e| e.subs).collect(),
            transforms,
            primal_coords,
            scaling,
            subs: locals,
            coarse_matrix: cm,
            coarse_lu: lu,
        })
    }

    pub fn n_primal(&self) -> usize {
        self.n_primal
    }

    /// Size of the coarse saddle system (primal velocities, subdomain
    /// pressure constants, gauge multiplier).
    pub fn coarse_dim(&self) -> usize {
        self.coarse_matrix.nrows()
    }

    pub fn coarse_matrix(&self) -> &DMatrix<f64> {
        &self.coarse_matrix
    }

    pub fn scaling(&self) -> &ScalingOperator {
        &self.scaling
    }

    pub fn transforms(&self) -> &[EdgeTransformation] {
        &self.transforms
    }

    pub fn dim(&self) -> usize {
        self.n_gamma + self.n_sub
    }

    /// Dual dimension of every subdomain.
    pub fn dual_dims(&self) -> Vec<usize> {
        self.subs.iter().map(|s| s.n_dual).collect()
    }

    /// `Tᵀ x` on the interface part.
    pub fn to_transformed(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x[..self.n_gamma].to_vec();
        for (r, t) in self.edge_ranges.iter().zip(&self.transforms) {
            let v = t.q.tr_mul(&DVector::from_column_slice(&x[r.clone()]));
            y[r.clone()].copy_from_slice(v.as_slice());
        }
        y
    }

    /// `T x̂` on the interface part.
    pub fn from_transformed(&self, xh: &[f64]) -> Vec<f64> {
        let mut y = xh[..self.n_gamma].to_vec();
        for (r, t) in self.edge_ranges.iter().zip(&self.transforms) {
            let v = &t.q * DVector::from_column_slice(&xh[r.clone()]);
            y[r.clone()].copy_from_slice(v.as_slice());
        }
        y
    }

    fn dual_coords(&self, seg: &Segment) -> Range<usize> {
        let r = &self.edge_ranges[seg.edge];
        let np = self.transforms[seg.edge].n_primal;
        r.start + np..r.end
    }

    /// `M⁻¹ r`.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.dim());
        let rh = self.to_transformed(r);

        let stage1: Vec<(DVector<f64>, DVector<f64>)> = self
            .subs
            .par_iter()
            .map(|loc| {
                let mut rd = DVector::zeros(loc.n_dual);
                for seg in &loc.segments {
                    let d = &self.scaling.edge_blocks[seg.edge][seg.side];
                    let re = DVector::from_column_slice(&rh[self.dual_coords(seg)]);
                    rd.rows_mut(seg.offset, seg.len).copy_from(&d.tr_mul(&re));
                }
                let v = match &loc.chol {
                    Some(c) => c.solve(&rd),
                    None => rd,
                };
                let c = loc.s_dp.tr_mul(&v);
                (v, c)
            })
            .collect();

        let nc = self.coarse_dim();
        let mut b = DVector::zeros(nc);
        for (k, &g) in self.primal_coords.iter().enumerate() {
            b[k] = rh[g];
        }
        for (loc, (_, c)) in self.subs.iter().zip(&stage1) {
            for (a, &ga) in loc.primal_global.iter().enumerate() {
                b[ga] -= c[a];
            }
            b[self.n_primal + loc.sub] = r[self.n_gamma + loc.sub];
        }
        let xc = self.coarse_lu.solve(&b).expect("coarse matrix checked at construction");

        let w: Vec<DVector<f64>> = self
            .subs
            .par_iter()
            .zip(stage1)
            .map(|(loc, (v, _))| {
                let up = DVector::from_iterator(loc.primal_global.len(), loc.primal_global.iter().map(|&g| xc[g]));
                v - &loc.phi * up
            })
            .collect();

        let mut uh = vec![0.0; self.n_gamma];
        for (k, &g) in self.primal_coords.iter().enumerate() {
            uh[g] = xc[k];
        }
        for (loc, wl) in self.subs.iter().zip(&w) {
            for seg in &loc.segments {
                let d = &self.scaling.edge_blocks[seg.edge][seg.side];
                let contrib = d * wl.rows(seg.offset, seg.len);
                for (k, g) in self.dual_coords(seg).enumerate() {
                    uh[g] += contrib[k];
                }
            }
        }
        let mut out = self.from_transformed(&uh);
        out.extend((0..self.n_sub).map(|s| xc[self.n_primal + s]));
        out
    }

    /// Averaging operator `E_D = R̃ R̃_Dᵀ` on the partially assembled space.
    pub fn average(&self, w: &PartialVector) -> PartialVector {
        let mut uh = vec![0.0; self.n_gamma];
        for (loc, wl) in self.subs.iter().zip(&w.dual) {
            for seg in &loc.segments {
                let d = &self.scaling.edge_blocks[seg.edge][seg.side];
                let contrib = d * DVector::from_column_slice(&wl[seg.offset..seg.offset + seg.len]);
                for (k, g) in self.dual_coords(seg).enumerate() {
                    uh[g] += contrib[k];
                }
            }
        }
        let dual = self
            .subs
            .iter()
            .map(|loc| {
                let mut v = vec![0.0; loc.n_dual];
                for seg in &loc.segments {
                    for (k, g) in self.dual_coords(seg).enumerate() {
                        v[seg.offset + k] = uh[g];
                    }
                }
                v
            })
            .collect();
        PartialVector {
            primal: w.primal.clone(),
            dual,
        }
    }

    /// Subdomain pair of each macro edge.
    pub fn edge_subs(&self) -> &[(usize, usize)] {
        &self.edge_subs
    }
}

fn build_local(
    op: &SubdomainOperator,
    skeleton: &InterfaceSkeleton,
    classes: &DofClassification,
    transforms: &[EdgeTransformation],
    gamma_primal: &[Option<usize>],
) -> Result<SubLocal> {
    let t = local_transformation(op, classes, skeleton, transforms)?;
    let st = symmetrized(&(t.transpose() * &op.schur * &t));
    let b0t = t.tr_mul(&op.b0);

    let mut primal_local = Vec::new();
    let mut primal_global = Vec::new();
    for (k, &g) in op.gamma.iter().enumerate() {
        if let Some(p) = gamma_primal[g] {
            primal_local.push(k);
            primal_global.push(p);
        }
    }
    let mut dual_local = Vec::new();
    let mut segments = Vec::new();
    for e in skeleton.edges_of(op.sub) {
        let lr = op
            .local_range(&classes.edge_ranges[e])
            .expect("checked in local_transformation");
        let np = transforms[e].n_primal;
        let side = if skeleton.edges[e].subs.0 == op.sub { 0 } else { 1 };
        segments.push(Segment {
            edge: e,
            side,
            offset: dual_local.len(),
            len: lr.len() - np,
        });
        dual_local.extend(lr.start + np..lr.end);
    }
    debug_assert_eq!(primal_local.len() + dual_local.len(), op.n_gamma());

    let b0_norm = op.b0.norm();
    let b0_dual = dual_local.iter().map(|&k| b0t[k] * b0t[k]).sum::<f64>().sqrt();
    if b0_dual > B0_DUAL_TOL * b0_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Subdomain {
            sub: op.sub,
            reason: format!("divergence row has dual part {b0_dual:e}; no-net-flux constraint missing"),
        });
    }
    let b0_primal = DVector::from_iterator(primal_local.len(), primal_local.iter().map(|&k| b0t[k]));

    let s_dd = principal(&st, &dual_local);
    let s_dp = submatrix(&st, &dual_local, &primal_local);
    let s_pp = principal(&st, &primal_local);
    let (chol, phi, coarse_local) = if dual_local.is_empty() {
        (None, DMatrix::zeros(0, primal_local.len()), s_pp)
    } else {
        let chol = s_dd.cholesky().ok_or_else(|| Error::Subdomain {
            sub: op.sub,
            reason: "singular dual block".into(),
        })?;
        let phi = chol.solve(&s_dp);
        let sc = symmetrized(&(s_pp - s_dp.tr_mul(&phi)));
        (Some(chol), phi, sc)
    };
    Ok(SubLocal {
        sub: op.sub,
        primal_global,
        segments,
        n_dual: dual_local.len(),
        chol,
        s_dp,
        phi,
        coarse_local,
        b0_primal,
    })
}
