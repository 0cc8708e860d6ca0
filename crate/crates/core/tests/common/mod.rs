//! Oracles and fixtures shared by the integration test targets.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stokes_bddc::bddc::{deluxe_blocks, Constraint, ConstraintKind, EdgeTransformation, ScalingKind};
use stokes_bddc::coarse::EdgeContext;
use stokes_bddc::linalg::schur_complement;
use stokes_bddc::problem::DdSystem;

pub fn random_spd(n: usize, rng: &mut ChaCha8Rng, shift: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &m * m.transpose() + DMatrix::identity(n, n) * shift
}

/// Dense two-stage oracle: `B = L Lᵀ`, eigenvalues of `L⁻¹ A L⁻ᵀ`.
pub fn cholesky_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let l = b.clone().cholesky().unwrap().l();
    let li = l.clone().try_inverse().unwrap();
    let c = &li * a * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Tridiagonal chain stiffness with per-segment coefficients `k`, anchored
/// at both ends so the matrix is definite.
pub fn chain(k: &[f64]) -> DMatrix<f64> {
    let n = k.len() - 1;
    let mut m = DMatrix::zeros(n, n);
    for (s, &ks) in k.iter().enumerate() {
        let (a, b) = (s.checked_sub(1), if s < n { Some(s) } else { None });
        if let Some(a) = a {
            m[(a, a)] += ks;
        }
        if let Some(b) = b {
            m[(b, b)] += ks;
        }
        if let (Some(a), Some(b)) = (a, b) {
            m[(a, b)] -= ks;
            m[(b, a)] -= ks;
        }
    }
    m
}

/// Edge fixture on a horizontal edge with `nodes` nodes. `s_hat` is built
/// from per-component chains; `s_ee` adds a positive diagonal so that the
/// principal block dominates the edge Schur complement.
pub fn crafted(coef: [&[f64]; 2], scaling: ScalingKind, extra: f64) -> EdgeContext {
    let nodes = coef[0].len() - 1;
    let n = 2 * nodes;
    let mut s_hat = Vec::new();
    let mut s_ee = Vec::new();
    for c in coef {
        let ch = chain(c);
        let mut s = DMatrix::zeros(n, n);
        for i in 0..nodes {
            for j in 0..nodes {
                s[(2 * i, 2 * j)] = ch[(i, j)];
                s[(2 * i + 1, 2 * j + 1)] = ch[(i, j)];
            }
        }
        let diag = DMatrix::from_diagonal(&s.diagonal()) * extra;
        s_ee.push(&s + diag);
        s_hat.push(s);
    }
    let s_ee = [s_ee[0].clone(), s_ee[1].clone()];
    let s_hat = [s_hat[0].clone(), s_hat[1].clone()];
    let points: Vec<[f64; 2]> = (0..nodes).map(|k| [(k + 1) as f64 / (nodes + 1) as f64, 0.5]).collect();
    let mut flux = DVector::zeros(n);
    for k in 0..nodes {
        flux[2 * k + 1] = if k % 2 == 0 { 4.0 } else { 2.0 } / (6.0 * (nodes + 1) as f64);
    }
    let d = match scaling {
        ScalingKind::Multiplicity => {
            let h = DMatrix::identity(n, n) * 0.5;
            [h.clone(), h]
        }
        ScalingKind::Deluxe | ScalingKind::DeluxeNodal => deluxe_blocks(&s_ee[0], &s_ee[1]).unwrap(),
    };
    EdgeContext {
        edge: 0,
        subs: (0, 1),
        points,
        flux,
        s_ee,
        s_hat,
        scaling: d,
        diameters: [0.5, 0.5],
        centers: [[0.5, 0.25], [0.5, 0.75]],
    }
}

pub fn heterogeneous_fixtures() -> Vec<EdgeContext> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut out = Vec::new();
    for _ in 0..4 {
        let nodes = rng.gen_range(5..10);
        let ki: Vec<f64> = (0..=nodes).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
        let kj: Vec<f64> = (0..=nodes).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
        for scaling in [ScalingKind::Deluxe, ScalingKind::Multiplicity] {
            out.push(crafted([&ki, &kj], scaling, rng.gen_range(0.0..0.5)));
        }
    }
    out
}

/// Dense elimination of the whole reduced saddle system onto `[u_Γ, p0]`,
/// with the pressure split `p = p̃ + Σ p0_i 1_i` and per-subdomain mean
/// constraints on `p̃`.
pub fn global_elimination(dd: &DdSystem) -> (DMatrix<f64>, DVector<f64>) {
    let red = &dd.reduced;
    let nf = red.free.len();
    let np = red.rhs_p.len();
    let ns = dd.subs.len();
    let n = nf + np + 2 * ns;
    let sub_of_pressure: Vec<usize> = {
        let mut v = vec![0; np];
        for op in &dd.subs {
            for &p in &op.pressure {
                v[p] = op.sub;
            }
        }
        v
    };
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for i in 0..nf {
        for (j, v) in red.a_ff.row(i) {
            m[(i, j)] += v;
        }
        rhs[i] = red.rhs_u[i];
    }
    for p in 0..np {
        let s = sub_of_pressure[p];
        for (j, v) in red.b_f.row(p) {
            m[(nf + p, j)] += v;
            m[(j, nf + p)] += v;
            if p % 3 == 0 {
                m[(nf + np + s, j)] += v;
                m[(j, nf + np + s)] += v;
            }
        }
        rhs[nf + p] = red.rhs_p[p];
        if p % 3 == 0 {
            rhs[nf + np + s] += red.rhs_p[p];
            m[(nf + p, nf + np + ns + s)] = red.gauge[p];
            m[(nf + np + ns + s, nf + p)] = red.gauge[p];
        }
    }
    let mut keep = vec![0; dd.classes.n_gamma()];
    let mut elim = Vec::new();
    for (k, &d) in red.free.iter().enumerate() {
        match dd.classes.gamma_index[d] {
            Some(g) => keep[g] = k,
            None => elim.push(k),
        }
    }
    keep.extend((0..ns).map(|s| nf + np + s));
    elim.extend(nf..nf + np);
    elim.extend(nf + np + ns..n);
    let s = schur_complement(&m, &keep, &elim).unwrap();
    let kee = m.select_rows(&elim).select_columns(&elim);
    let kke = m.select_rows(&keep).select_columns(&elim);
    let y = kee.lu().solve(&rhs.select_rows(&elim)).unwrap();
    let g = rhs.select_rows(&keep) - kke * y;
    (s, g)
}

/// Edge transformation with the flux constraint followed by `constraints`.
pub fn transform_with(ctx: &EdgeContext, constraints: &[DVector<f64>]) -> EdgeTransformation {
    let mut list = vec![Constraint {
        vector: ctx.flux.clone(),
        kind: ConstraintKind::Flux,
    }];
    list.extend(constraints.iter().map(|c| Constraint {
        vector: c.clone(),
        kind: ConstraintKind::Adaptive,
    }));
    EdgeTransformation::new(&list, ctx.dim())
}
