//! Sparse and dense linear-algebra helpers shared by the assembly and
//! preconditioner layers.
//!
//! Sparse factorizations are delegated to `faer` (LU with partial pivoting,
//! which handles the symmetric-indefinite saddle blocks); dense work uses
//! `nalgebra`.

use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Coordinate-format accumulator; duplicate entries are summed on
/// compression.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if val != 0.0 {
            self.entries.push((row, col, val));
        }
    }

    /// Sorted, duplicate-free entries (row-major order).
    pub fn merged(&self) -> Vec<(usize, usize, f64)> {
        let mut e = self.entries.clone();
        e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(e.len());
        for (r, c, v) in e {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_sorted(self.nrows, self.ncols, &self.merged())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

/// Compressed sparse row matrix with just enough functionality for
/// residual checks and operator application.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    fn from_sorted(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut offsets = vec![0usize; nrows + 1];
        for &(r, _, _) in entries {
            offsets[r + 1] += 1;
        }
        for i in 0..nrows {
            offsets[i + 1] += offsets[i];
        }
        Self {
            nrows,
            ncols,
            offsets,
            cols: entries.iter().map(|e| e.1).collect(),
            vals: entries.iter().map(|e| e.2).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `y += self^T x`
    pub fn tmatvec_add(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (j, v) in self.row(i) {
                    y[j] += v * xi;
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    pub fn max_asymmetry(&self) -> f64 {
        let d = self.to_dense();
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - d[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Largest accepted forward error of the LU probe solve (probe entries are
/// 1 and 2).
pub const PROBE_FORWARD_TOL: f64 = 0.5;

/// Largest accepted normwise backward error of the LU probe solve.
pub const PROBE_BACKWARD_TOL: f64 = 1e-10;

/// Sparse LU factorization (partial pivoting) of a square matrix after
/// symmetric diagonal equilibration `S A S` with `S_ii = ‖row_i‖∞^{-1/2}`.
pub struct SparseLu {
    n: usize,
    scale: Vec<f64>,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

impl SparseLu {
    /// Factorizes the matrix and verifies the factors by a probe solve; a
    /// numerically singular matrix yields `Error::Singular`.
    pub fn new(m: &TripletBuilder, what: &str) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "{what}: LU of a {}x{} matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        faer::set_global_parallelism(Par::Seq);
        let n = m.nrows();
        let merged = m.merged();
        let mut row_max = vec![0.0f64; n];
        for &(r, _, v) in &merged {
            row_max[r] = row_max[r].max(v.abs());
        }
        let scale: Vec<f64> = row_max
            .iter()
            .map(|&r| if r > 0.0 && r.is_finite() { 1.0 / r.sqrt() } else { 1.0 })
            .collect();
        let trip: Vec<Triplet<usize, usize, f64>> = merged
            .into_iter()
            .map(|(r, c, v)| Triplet::new(r, c, v * scale[r] * scale[c]))
            .collect();
        let a = SparseColMat::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Singular(format!("{what}: sparse matrix creation failed: {e:?}")))?;
        let lu = a.sp_lu().map_err(|e| Error::Singular(format!("{what}: {e:?}")))?;
        let out = Self { n, scale, lu };
        if n > 0 {
            // probe: x = (1, 2, 1, 2, ...) must be reproduced with a small
            // normwise backward error and a bounded forward error
            let csr = m.to_csr();
            let probe: Vec<f64> = (0..n).map(|i| 1.0 + (i % 2) as f64).collect();
            let rhs = csr.matvec(&probe);
            let x = out.solve(&rhs);
            let ax = csr.matvec(&x);
            let inf = |v: &mut dyn Iterator<Item = f64>| {
                v.fold(0.0f64, |e, d| if d.is_nan() { f64::INFINITY } else { e.max(d.abs()) })
            };
            let forward = inf(&mut x.iter().zip(&probe).map(|(a, b)| a - b));
            let residual = inf(&mut ax.iter().zip(&rhs).map(|(a, b)| a - b));
            let backward = residual / (csr.max_abs() * inf(&mut x.iter().copied()) + inf(&mut rhs.iter().copied()));
            if !(forward <= PROBE_FORWARD_TOL && backward <= PROBE_BACKWARD_TOL) {
                return Err(Error::Singular(format!(
                    "{what}: probe solve forward error {forward:e}, backward error {backward:e}"
                )));
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        use faer::prelude::Solve;
        assert_eq!(rhs.len(), self.n);
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i] * self.scale[i]);
        self.lu.solve_in_place(b.as_mut());
        (0..self.n).map(|i| b[(i, 0)] * self.scale[i]).collect()
    }

    /// Solves for every column of `rhs`.
    pub fn solve_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        use faer::prelude::Solve;
        assert_eq!(rhs.nrows(), self.n);
        let mut b = Mat::<f64>::from_fn(self.n, rhs.ncols(), |i, j| rhs[(i, j)] * self.scale[i]);
        self.lu.solve_in_place(b.as_mut());
        DMatrix::from_fn(self.n, rhs.ncols(), |i, j| b[(i, j)] * self.scale[i])
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending
/// order and eigenvector signs normalized (largest-magnitude entry
/// positive) so results are reproducible.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = symmetrized(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &k) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(k).into_owned();
        let (imax, _) =
            col.iter().enumerate().fold(
                (0, 0.0f64),
                |(bi, bv), (i, v)| {
                    if v.abs() > bv + 1e-14 {
                        (i, v.abs())
                    } else {
                        (bi, bv)
                    }
                },
            );
        if col[imax] < 0.0 {
            col.neg_mut();
        }
        vecs.set_column(dst, &col);
    }
    (vals, vecs)
}

pub fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Dense principal submatrix `m[idx, idx]`.
pub fn principal(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Dense submatrix `m[rows, cols]`.
pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])])
}

/// Schur complement of `m` onto `keep`, eliminating `elim`.
pub fn schur_complement(m: &DMatrix<f64>, keep: &[usize], elim: &[usize]) -> Result<DMatrix<f64>> {
    let mkk = principal(m, keep);
    if elim.is_empty() {
        return Ok(mkk);
    }
    let mee = principal(m, elim);
    let mek = submatrix(m, elim, keep);
    let lu = mee.lu();
    let x = lu
        .solve(&mek)
        .ok_or_else(|| Error::Singular("Schur complement elimination block".into()))?;
    Ok(symmetrized(&(mkk - mek.transpose() * x)))
}

/// Outcome of orthonormalizing a list of candidate vectors.
#[derive(Clone, Debug, Default)]
pub struct Orthonormalized {
    /// Orthonormal basis spanning the accepted candidates.
    pub basis: Vec<DVector<f64>>,
    /// Candidate indices that were accepted, in order.
    pub accepted: Vec<usize>,
    /// Candidate indices dropped as (near) dependent.
    pub dropped: Vec<usize>,
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. A candidate
/// whose residual norm falls below `drop_tol` times its original norm is
/// dropped.
pub fn mgs(candidates: &[DVector<f64>], drop_tol: f64) -> Orthonormalized {
    let mut out = Orthonormalized::default();
    for (k, c) in candidates.iter().enumerate() {
        let norm0 = c.norm();
        if norm0 == 0.0 || !norm0.is_finite() {
            out.dropped.push(k);
            continue;
        }
        let mut v = c.clone();
        for _pass in 0..2 {
            for q in &out.basis {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm <= drop_tol * norm0 {
            out.dropped.push(k);
        } else {
            out.basis.push(v / norm);
            out.accepted.push(k);
        }
    }
    out
}

/// Completes an orthonormal set in R^n to a full orthonormal basis, adding
/// unit vectors greedily by largest residual (ties broken by lowest index).
pub fn complete_basis(basis: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = basis.to_vec();
    // captured[k] = squared norm of the projection of e_k onto span(cols)
    let mut captured = vec![0.0; n];
    for q in &cols {
        for k in 0..n {
            captured[k] += q[k] * q[k];
        }
    }
    while cols.len() < n {
        let mut best = 0;
        for k in 1..n {
            if 1.0 - captured[k] > 1.0 - captured[best] + 1e-12 {
                best = k;
            }
        }
        let mut v = DVector::zeros(n);
        v[best] = 1.0;
        for _pass in 0..2 {
            for q in &cols {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let v = &v / v.norm();
        for k in 0..n {
            captured[k] += v[k] * v[k];
        }
        cols.push(v);
    }
    let mut q = DMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        q.set_column(j, c);
    }
    q
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.0);
        t.push(1, 0, -1.0);
        let m = t.merged();
        assert_eq!(m, vec![(0, 0, 3.0), (1, 0, -1.0)]);
    }

    #[test]
    fn lu_handles_zero_diagonal_saddle() {
        let mut t = TripletBuilder::new(3, 3);
        t.push(0, 0, 2.0);
        t.push(1, 1, 3.0);
        t.push(0, 2, 1.0);
        t.push(2, 0, 1.0);
        t.push(1, 2, 1.0);
        t.push(2, 1, 1.0);
        let lu = SparseLu::new(&t, "saddle").unwrap();
        let x = lu.solve(&[3.0, 4.0, 2.0]);
        let ax = t.to_csr().matvec(&x);
        for (a, b) in ax.iter().zip([3.0, 4.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        assert!(SparseLu::new(&t, "rank one").is_err());
    }

    #[test]
    fn mgs_drops_duplicates_and_completes() {
        let a = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]);
        let out = mgs(&[a.clone(), a * 2.0], 1e-10);
        assert_eq!(out.accepted, vec![0]);
        assert_eq!(out.dropped, vec![1]);
        let q = complete_basis(&out.basis, 4);
        let qtq = q.transpose() * &q;
        assert!((qtq - DMatrix::identity(4, 4)).abs().max() < 1e-12);
    }

    #[test]
    fn eigen_sorted_descending() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let (vals, _) = sym_eigen_desc(&m);
        assert_eq!(vals, vec![2.0, 1.0]);
    }
}

/// Eigenvalues `(re, im)` of a general square matrix.
pub fn general_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    faer::set_global_parallelism(Par::Seq);
    let n = m.nrows();
    let fm = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let ev = fm
        .eigenvalues()
        .map_err(|e| Error::Singular(format!("eigenvalue iteration failed: {e:?}")))?;
    Ok(ev.iter().map(|c| (c.re, c.im)).collect())
}
