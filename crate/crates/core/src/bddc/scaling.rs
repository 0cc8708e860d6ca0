//! Interface averaging weights.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::EdgeTransformation;
use crate::assembly::SubdomainOperator;
use crate::decomp::{DofClassification, InterfaceSkeleton};
use crate::error::{Error, Result};
use crate::linalg::principal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalingKind {
    Multiplicity,
    /// Deluxe weights from the edge Schur blocks in the transformed basis,
    /// restricted to the dual coordinates.
    Deluxe,
    /// Deluxe weights from the nodal edge Schur blocks, then projected onto
    /// the dual coordinates so that the flux rows are excluded.
    DeluxeNodal,
}

impl fmt::Display for ScalingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingKind::Multiplicity => "multiplicity",
            ScalingKind::Deluxe => "deluxe",
            ScalingKind::DeluxeNodal => "deluxe-nodal",
        })
    }
}

impl FromStr for ScalingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "multiplicity" | "mult" => Ok(ScalingKind::Multiplicity),
            "deluxe" => Ok(ScalingKind::Deluxe),
            "deluxe-nodal" => Ok(ScalingKind::DeluxeNodal),
            other => Err(Error::Config(format!("unknown scaling '{other}'"))),
        }
    }
}

/// Weight blocks per macro edge and weights per corner dof.
///
/// With `transformed` set the edge blocks act on the dual coordinates of
/// the edge's transformed basis; otherwise on all nodal edge dofs.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingOperator {
    pub kind: ScalingKind,
    pub transformed: bool,
    /// `[D^(subs.0), D^(subs.1)]` for every macro edge.
    pub edge_blocks: Vec<[DMatrix<f64>; 2]>,
    /// `1/multiplicity` for each corner Γ position.
    pub corner_weights: Vec<f64>,
}

impl ScalingOperator {
    /// Largest deviation from the partition of unity over all blocks.
    pub fn partition_of_unity_error(&self, classes: &DofClassification) -> f64 {
        let mut err: f64 = 0.0;
        for [a, b] in &self.edge_blocks {
            let n = a.nrows();
            err = err.max((a + b - DMatrix::<f64>::identity(n, n)).abs().max());
        }
        for (k, g) in classes.corner_range.clone().enumerate() {
            let m = classes.multiplicity(classes.gamma[g]) as f64;
            err = err.max((self.corner_weights[k] * m - 1.0).abs());
        }
        err
    }
}

fn corner_weights(classes: &DofClassification) -> Vec<f64> {
    classes
        .corner_range
        .clone()
        .map(|g| 1.0 / classes.multiplicity(classes.gamma[g]) as f64)
        .collect()
}

fn block_dim(classes: &DofClassification, transforms: Option<&[EdgeTransformation]>, e: usize) -> usize {
    match transforms {
        Some(t) => t[e].n_dual(),
        None => classes.edge_ranges[e].len(),
    }
}

/// `1/mult` on every interface dof (`½` on edges).
pub fn multiplicity_scaling(
    skeleton: &InterfaceSkeleton,
    classes: &DofClassification,
    transforms: Option<&[EdgeTransformation]>,
) -> ScalingOperator {
    let edge_blocks = (0..skeleton.edges.len())
        .map(|e| {
            let n = block_dim(classes, transforms, e);
            let h = DMatrix::identity(n, n) * 0.5;
            [h.clone(), h]
        })
        .collect();
    ScalingOperator {
        kind: ScalingKind::Multiplicity,
        transformed: transforms.is_some(),
        edge_blocks,
        corner_weights: corner_weights(classes),
    }
}

/// `D^(i) = (S_i + S_j)⁻¹ S_i`, `D^(j) = (S_i + S_j)⁻¹ S_j`.
pub fn deluxe_blocks(s_i: &DMatrix<f64>, s_j: &DMatrix<f64>) -> Result<[DMatrix<f64>; 2]> {
    let n = s_i.nrows();
    if s_j.nrows() != n || s_i.ncols() != n || s_j.ncols() != n {
        return Err(Error::Dimension("deluxe blocks of different sizes".into()));
    }
    if n == 0 {
        return Ok([DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)]);
    }
    let chol = (s_i + s_j)
        .cholesky()
        .ok_or_else(|| Error::Singular("sum of edge Schur blocks is not positive definite".into()))?;
    Ok([chol.solve(s_i), chol.solve(s_j)])
}

/// Principal block of `S^(l)` on the dofs of macro edge `e`, optionally
/// expressed in the edge's transformed basis and restricted to its dual
/// coordinates.
pub fn edge_block(
    op: &SubdomainOperator,
    classes: &DofClassification,
    e: usize,
    transform: Option<&EdgeTransformation>,
) -> Result<DMatrix<f64>> {
    let r = op.local_range(&classes.edge_ranges[e]).ok_or_else(|| Error::Edge {
        edge: e,
        reason: format!("not contiguous in subdomain {}", op.sub),
    })?;
    let idx: Vec<usize> = r.collect();
    let s = principal(&op.schur, &idx);
    Ok(match transform {
        None => s,
        Some(t) => {
            let w = t.dual_basis();
            w.transpose() * s * w
        }
    })
}

/// Deluxe weights from principal edge blocks of the subdomain Schur
/// complements; corners keep multiplicity weights. With `nodal` set the
/// weights are formed from the nodal blocks and then restricted to the
/// dual coordinates of `transforms`.
pub fn deluxe_scaling(
    subs: &[SubdomainOperator],
    skeleton: &InterfaceSkeleton,
    classes: &DofClassification,
    transforms: Option<&[EdgeTransformation]>,
    nodal: bool,
) -> Result<ScalingOperator> {
    let mut edge_blocks = Vec::with_capacity(skeleton.edges.len());
    for (e, me) in skeleton.edges.iter().enumerate() {
        let t = transforms.map(|t| &t[e]);
        let block_basis = if nodal { None } else { t };
        let si = edge_block(&subs[me.subs.0], classes, e, block_basis)?;
        let sj = edge_block(&subs[me.subs.1], classes, e, block_basis)?;
        let mut d = deluxe_blocks(&si, &sj).map_err(|err| Error::Edge {
            edge: e,
            reason: err.to_string(),
        })?;
        if let (true, Some(t)) = (nodal, t) {
            let w = t.dual_basis();
            d = [w.transpose() * &d[0] * &w, w.transpose() * &d[1] * &w];
        }
        edge_blocks.push(d);
    }
    Ok(ScalingOperator {
        kind: if nodal {
            ScalingKind::DeluxeNodal
        } else {
            ScalingKind::Deluxe
        },
        transformed: transforms.is_some(),
        edge_blocks,
        corner_weights: corner_weights(classes),
    })
}

/// Dispatches on `kind`.
pub fn build_scaling(
    kind: ScalingKind,
    subs: &[SubdomainOperator],
    skeleton: &InterfaceSkeleton,
    classes: &DofClassification,
    transforms: Option<&[EdgeTransformation]>,
) -> Result<ScalingOperator> {
    match kind {
        ScalingKind::Multiplicity => Ok(multiplicity_scaling(skeleton, classes, transforms)),
        ScalingKind::Deluxe => deluxe_scaling(subs, skeleton, classes, transforms, false),
        ScalingKind::DeluxeNodal => deluxe_scaling(subs, skeleton, classes, transforms, true),
    }
}
