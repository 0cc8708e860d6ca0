use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stokes_bddc::assembly::lid_velocity;
use stokes_bddc::bddc::{build_edge_transformations, Constraint, ConstraintKind, ScalingKind};
use stokes_bddc::coarse::{
    adaptive_first_constraints, adaptive_second_constraints, constrained_rayleigh_max, enrich, frugal_constraints,
    gevp_sym, parallel_sum, rigid_body_modes, rigid_mode_traces, AdaptiveKind, CoarseKind, CoarseSpaceSpec,
    EdgeContext,
};
use stokes_bddc::decomp::{partition_mesh, Decomposition, PartitionMethod};
use stokes_bddc::mesh::{generate_cvt, PolyMesh};
use stokes_bddc::problem::DdSystem;

mod common;
use common::{cholesky_oracle, crafted, heterogeneous_fixtures, random_spd, transform_with};

#[test]
fn rigid_modes_examples() {
    let c = [0.3, 0.7];
    let r = rigid_body_modes(0.5, c, c);
    assert_eq!(r[0], [1.0, 0.0]);
    assert_eq!(r[1], [0.0, 1.0]);
    assert_eq!(r[2], [0.0, 0.0]);
    let r = rigid_body_modes(0.5, c, [c[0] + 0.5, c[1]]);
    assert!((r[2][0]).abs() < 1e-15 && (r[2][1] + 1.0).abs() < 1e-15);

    let pts: Vec<[f64; 2]> = (0..5).map(|k| [0.1 + 0.05 * k as f64, 0.2 + 0.01 * k as f64]).collect();
    let t = rigid_mode_traces(0.4, [0.5, 0.5], &pts);
    let m = DMatrix::from_columns(&t);
    assert_eq!(m.rank(1e-10), 3);
    let single = rigid_mode_traces(0.4, [0.5, 0.5], &[[0.1, 0.2]]);
    assert!(DMatrix::from_columns(&single).rank(1e-10) < 3);
}

#[test]
fn parallel_sum_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_spd(6, &mut rng, 0.1);
    let half = parallel_sum(&a, &a).unwrap();
    assert!((&half - &a * 0.5).abs().max() < 1e-12 * a.abs().max());
    let zero = parallel_sum(&a, &DMatrix::zeros(6, 6)).unwrap();
    assert!(zero.abs().max() < 1e-12);
    let b = random_spd(6, &mut rng, 0.1);
    let oracle = (a.clone().try_inverse().unwrap() + b.clone().try_inverse().unwrap())
        .try_inverse()
        .unwrap();
    let ps = parallel_sum(&a, &b).unwrap();
    assert!((&ps - &oracle).abs().max() < 1e-10 * oracle.abs().max());
    assert!(parallel_sum(&a, &DMatrix::zeros(5, 5)).is_err());
}

#[test]
fn gevp_examples() {
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
    let g = gevp_sym(&a, &DMatrix::identity(2, 2), 1e-10).unwrap();
    assert!((g.values[0] - 2.0).abs() < 1e-14 && (g.values[1] - 1.0).abs() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = random_spd(5, &mut rng, 0.5);
    let g = gevp_sym(&b, &b, 1e-10).unwrap();
    assert!(g.values.iter().all(|&m| (m - 1.0).abs() < 1e-10));

    assert!(gevp_sym(&a, &DMatrix::zeros(2, 2), 1e-10).is_err());
    assert!(gevp_sym(&a, &DMatrix::identity(3, 3), 1e-10).is_err());
}

#[test]
fn gevp_matches_cholesky_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let a = random_spd(8, &mut rng, 0.0);
        let b = random_spd(8, &mut rng, 0.2);
        let g = gevp_sym(&a, &b, 1e-10).unwrap();
        let oracle = cholesky_oracle(&a, &b);
        assert_eq!(g.values.len(), 8);
        for (m, o) in g.values.iter().zip(&oracle) {
            assert!((m - o).abs() <= 1e-9 * o.abs().max(1.0), "{m} vs {o}");
        }
        let v = &g.vectors;
        let gram = v.transpose() * &b * v;
        assert!((&gram - DMatrix::identity(8, 8)).abs().max() < 1e-9);
        for k in 0..8 {
            let r = &a * v.column(k) - &b * v.column(k) * g.values[k];
            assert!(r.norm() < 1e-9 * a.norm());
        }
    }
}

#[test]
fn gevp_deflates_null_space_of_mass() {
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 5.0]));
    let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.0]));
    let g = gevp_sym(&a, &b, 1e-10).unwrap();
    assert_eq!(g.values.len(), 2);
    assert!((g.values[0] - 3.0).abs() < 1e-14 && (g.values[1] - 0.5).abs() < 1e-14);
    assert_eq!(g.null_space.ncols(), 1);
    assert!((g.null_space[(2, 0)].abs() - 1.0).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn parallel_sum_is_symmetric_and_dominated(seed in 0u64..10_000, n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_spd(n, &mut rng, 0.01);
        let b = random_spd(n, &mut rng, 0.01);
        let p = parallel_sum(&a, &b).unwrap();
        prop_assert!((&p - p.transpose()).abs().max() <= 1e-10 * a.abs().max());
        let ea = (&a - &p).symmetric_eigen().eigenvalues.min();
        let eb = (&b - &p).symmetric_eigen().eigenvalues.min();
        prop_assert!(ea >= -1e-9 * a.abs().max());
        prop_assert!(eb >= -1e-9 * b.abs().max());
    }

    #[test]
    fn gevp_eigenvalues_lie_in_rayleigh_range(seed in 0u64..10_000, n in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_spd(n, &mut rng, 0.0);
        let b = random_spd(n, &mut rng, 0.1);
        let g = gevp_sym(&a, &b, 1e-10).unwrap();
        prop_assert!(g.values.windows(2).all(|w| w[0] >= w[1]));
        for _ in 0..5 {
            let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let q = (x.transpose() * &a * &x)[(0, 0)] / (x.transpose() * &b * &x)[(0, 0)];
            prop_assert!(q <= g.values[0] * (1.0 + 1e-9) + 1e-12);
            prop_assert!(q >= g.values[n - 1] * (1.0 - 1e-9) - 1e-12);
        }
    }
}

#[test]
fn frugal_with_identity_schur_is_a_rigid_trace() {
    let mut ctx = crafted([&[1.0; 4], &[1.0; 4]], ScalingKind::Multiplicity, 0.0);
    let n = ctx.dim();
    ctx.s_ee = [DMatrix::identity(n, n), DMatrix::identity(n, n)];
    let c = frugal_constraints(&ctx);
    assert_eq!(c.len(), 3);
    // K = D^T I D + D^T I D = I/2, so c_m = (r_m^i + r_m^j)/2.
    let expected_c1 = DVector::from_fn(n, |k, _| if k % 2 == 0 { 1.0 } else { 0.0 });
    assert!((&c[0] - &expected_c1).norm() < 1e-14);
    let ri = rigid_mode_traces(0.5, ctx.centers[0], &ctx.points);
    let rj = rigid_mode_traces(0.5, ctx.centers[1], &ctx.points);
    assert!((&c[2] - (&ri[2] + &rj[2]) * 0.5).norm() < 1e-14);
}

#[test]
fn frugal_translation_spanned_by_flux_is_dropped() {
    let n = 6;
    let flux = DVector::from_fn(n, |k, _| if k % 2 == 1 { 1.0 } else { 0.0 });
    let c2 = flux.clone() * 3.0;
    let list = vec![
        Constraint {
            vector: flux,
            kind: ConstraintKind::Flux,
        },
        Constraint {
            vector: c2,
            kind: ConstraintKind::Frugal,
        },
    ];
    let t = build_edge_transformations(&[list], &[n]);
    assert_eq!(t[0].n_primal, 1);
    assert_eq!(t[0].dropped, vec![ConstraintKind::Frugal]);
}

#[test]
fn mirror_symmetric_edge_emits_nothing() {
    let coef = [3.0, 1.0, 7.0, 2.0, 5.0, 1.0];
    for scaling in [ScalingKind::Deluxe, ScalingKind::Multiplicity] {
        let ctx = crafted([&coef, &coef], scaling, 0.0);
        let first = adaptive_first_constraints(&ctx, 100.0, 10).unwrap();
        let second = adaptive_second_constraints(&ctx, 100.0, 10).unwrap();
        assert!(first.constraints.is_empty() && second.constraints.is_empty());
        assert!(first.spectrum.iter().all(|&m| m <= 1.0 + 1e-10), "{:?}", first.spectrum);
        assert!(
            second.spectrum.iter().all(|&m| m <= 1.0 + 1e-10),
            "{:?}",
            second.spectrum
        );
    }
}

#[test]
fn stiffness_jump_across_edge_is_detected() {
    let soft = [1.0; 6];
    let hard = [1e6; 6];
    let ctx = crafted([&soft, &hard], ScalingKind::Multiplicity, 0.0);
    let z = ctx.flux_complement();
    let a = z.transpose() * ctx.jump_stiffness() * &z;
    let b = z.transpose() * parallel_sum(&ctx.s_hat[0], &ctx.s_hat[1]).unwrap() * &z;
    let oracle = cholesky_oracle(&a, &b);
    assert!(oracle[0] >= 100.0);
    let out = adaptive_first_constraints(&ctx, 100.0, 20).unwrap();
    let expected = oracle.iter().filter(|&&m| m >= 100.0).count();
    assert_eq!(out.constraints.len(), expected);
    for (m, o) in out.spectrum.iter().zip(&oracle) {
        assert!((m - o).abs() <= 1e-9 * o.abs());
    }
}

#[test]
fn infinite_threshold_and_invalid_tol() {
    let ctx = crafted([&[1.0; 6], &[1e6; 6]], ScalingKind::Multiplicity, 0.0);
    assert!(adaptive_first_constraints(&ctx, f64::INFINITY, 10)
        .unwrap()
        .constraints
        .is_empty());
    assert!(adaptive_second_constraints(&ctx, f64::INFINITY, 10)
        .unwrap()
        .constraints
        .is_empty());
    assert!(CoarseSpaceSpec::new(CoarseKind::AdaptiveFirst, 1.0).validate().is_err());
    assert!(CoarseSpaceSpec::new(CoarseKind::AdaptiveSecond, 0.5)
        .validate()
        .is_err());
    assert!(CoarseSpaceSpec::new(CoarseKind::Frugal, 0.5).validate().is_ok());
}

#[test]
fn cap_truncates_largest_first() {
    let ctx = crafted([&[1.0; 9], &[1e6; 9]], ScalingKind::Multiplicity, 0.0);
    let all = adaptive_first_constraints(&ctx, 100.0, 100).unwrap();
    assert!(all.constraints.len() > 3);
    let capped = adaptive_first_constraints(&ctx, 100.0, 3).unwrap();
    assert_eq!(capped.constraints.len(), 3);
    assert_eq!(capped.truncated, all.constraints.len() - 3);
    for k in 0..3 {
        assert!((&capped.constraints[k] - &all.constraints[k]).norm() < 1e-12);
    }
}

#[test]
fn rayleigh_quotient_is_bounded_after_enrichment() {
    let tol = 100.0;
    for ctx in heterogeneous_fixtures() {
        for kind in [AdaptiveKind::First, AdaptiveKind::Second] {
            let out = match kind {
                AdaptiveKind::First => adaptive_first_constraints(&ctx, tol, 1000).unwrap(),
                AdaptiveKind::Second => adaptive_second_constraints(&ctx, tol, 1000).unwrap(),
            };
            let t = transform_with(&ctx, &out.constraints);
            let before = constrained_rayleigh_max(&ctx, kind, &transform_with(&ctx, &[])).unwrap();
            let after = constrained_rayleigh_max(&ctx, kind, &t).unwrap();
            assert!(after <= tol * (1.0 + 1e-8), "{kind}: {before} -> {after}");
            if !out.constraints.is_empty() {
                assert!(before >= tol);
            }
        }
    }
}

/// Builds the paired-space pencil literally: numerator `P_Dᵀ S P_D` with
/// `S = blockdiag(S_EE)`, denominator `blockdiag(Ŝ)`, both on the range of
/// the flux projector applied to each side.
#[test]
fn second_kind_matches_paired_space_pencil() {
    for ctx in heterogeneous_fixtures() {
        let n = ctx.dim();
        let [di, dj] = &ctx.scaling;
        let mut pd = DMatrix::zeros(2 * n, 2 * n);
        pd.view_mut((0, 0), (n, n)).copy_from(dj);
        pd.view_mut((0, n), (n, n)).copy_from(&(-dj));
        pd.view_mut((n, 0), (n, n)).copy_from(&(-di));
        pd.view_mut((n, n), (n, n)).copy_from(di);
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n)).copy_from(&ctx.s_ee[0]);
        s.view_mut((n, n), (n, n)).copy_from(&ctx.s_ee[1]);
        let mut sh = DMatrix::zeros(2 * n, 2 * n);
        sh.view_mut((0, 0), (n, n)).copy_from(&ctx.s_hat[0]);
        sh.view_mut((n, n), (n, n)).copy_from(&ctx.s_hat[1]);
        // Orthonormal basis of {c0ᵀw_i = 0, c0ᵀw_j = 0} by Householder QR.
        let c = &ctx.flux / ctx.flux.norm();
        let mut full = DMatrix::identity(n, n);
        full.set_column(0, &c);
        let q = full.qr().q();
        let z = q.columns(1, n - 1).into_owned();
        let mut zz = DMatrix::zeros(2 * n, 2 * (n - 1));
        zz.view_mut((0, 0), (n, n - 1)).copy_from(&z);
        zz.view_mut((n, n - 1), (n, n - 1)).copy_from(&z);
        let num = zz.transpose() * pd.transpose() * &s * &pd * &zz;
        let den = zz.transpose() * &sh * &zz;
        let literal: Vec<f64> = cholesky_oracle(&num, &den).into_iter().filter(|&m| m > 1e-9).collect();
        let reduced = adaptive_second_constraints(&ctx, 1e300, 10).unwrap().spectrum;
        let reduced: Vec<f64> = reduced.into_iter().filter(|&m| m > 1e-9).collect();
        assert_eq!(literal.len(), reduced.len());
        for (a, b) in literal.iter().zip(&reduced) {
            assert!((a - b).abs() <= 1e-8 * a.max(1.0), "{a} vs {b}");
        }
    }
}

fn mesh_fixture() -> (PolyMesh, Decomposition, DdSystem) {
    let mesh = generate_cvt(160, 9, 1e-3, 60).unwrap();
    let decomp = partition_mesh(&mesh, 6, &PartitionMethod::CoordinateBisection, 0).unwrap();
    let dd = DdSystem::new(
        &mesh,
        &decomp,
        &|x| {
            if (x[0] - 0.5).hypot(x[1] - 0.45) < 0.15 {
                1e3
            } else {
                1e-3
            }
        },
        &|x| [0.0, -x[0]],
        &lid_velocity,
    )
    .unwrap();
    (mesh, decomp, dd)
}

#[test]
fn enrich_counts_determinism_and_rayleigh_on_mesh() {
    let (mesh, decomp, dd) = mesh_fixture();
    let frugal = CoarseSpaceSpec::new(CoarseKind::Frugal, 0.0);
    let set = enrich(&frugal, &mesh, &dd, &decomp, ScalingKind::Deluxe).unwrap();
    assert_eq!(
        set.n_primal_requested(),
        2 * dd.skeleton.corners.len() + 4 * dd.skeleton.edges.len()
    );
    for (e, ec) in set.edges.iter().enumerate() {
        assert_eq!(ec.edge, e);
        assert_eq!(ec.constraints[0].kind, ConstraintKind::Flux);
        for c in &ec.constraints {
            assert_eq!(c.vector.len(), dd.classes.edge_ranges[e].len());
        }
    }
    let again = enrich(&frugal, &mesh, &dd, &decomp, ScalingKind::Deluxe).unwrap();
    assert_eq!(set.to_debug_string(), again.to_debug_string());

    let flux = enrich(
        &CoarseSpaceSpec::new(CoarseKind::Flux, 0.0),
        &mesh,
        &dd,
        &decomp,
        ScalingKind::Deluxe,
    )
    .unwrap();
    assert_eq!(
        flux.n_primal_requested(),
        2 * dd.skeleton.corners.len() + dd.skeleton.edges.len()
    );
    let inf = CoarseSpaceSpec::new(CoarseKind::AdaptiveFirst, f64::INFINITY);
    let set_inf = enrich(&inf, &mesh, &dd, &decomp, ScalingKind::Deluxe).unwrap();
    assert_eq!(set_inf.n_primal_requested(), flux.n_primal_requested());

    let tol = 10.0;
    for (kind, ak) in [
        (CoarseKind::AdaptiveFirst, AdaptiveKind::First),
        (CoarseKind::AdaptiveSecond, AdaptiveKind::Second),
    ] {
        for scaling in [ScalingKind::Deluxe, ScalingKind::Multiplicity] {
            let mut spec = CoarseSpaceSpec::new(kind, tol);
            spec.max_per_edge = 1000;
            let set = enrich(&spec, &mesh, &dd, &decomp, scaling).unwrap();
            let ts = set.transformations(&dd);
            for (e, t) in ts.iter().enumerate() {
                let ctx = EdgeContext::new(&mesh, &dd, &decomp, e, scaling).unwrap();
                let r = constrained_rayleigh_max(&ctx, ak, t).unwrap();
                assert!(r <= tol * (1.0 + 1e-8), "{kind} {scaling} edge {e}: {r}");
            }
        }
    }
}

#[test]
fn coarse_kind_round_trip() {
    for k in [
        CoarseKind::Flux,
        CoarseKind::Frugal,
        CoarseKind::AdaptiveFirst,
        CoarseKind::AdaptiveSecond,
    ] {
        assert_eq!(k.to_string().parse::<CoarseKind>().unwrap(), k);
    }
    assert!("bogus".parse::<CoarseKind>().is_err());
}
