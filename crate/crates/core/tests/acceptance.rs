//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p stokes-bddc --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stokes_bddc::assembly::{
    apply_dirichlet, assemble_global, direct_solve_reference, lid_velocity, DofMap, GlobalSystem, VelocityDof,
};
use stokes_bddc::bddc::{
    build_edge_transformations, dense_preconditioned_spectrum, flux_constraints, full_primal_transformations,
    solve_interface, BddcPreconditioner, PartialVector, ScalingKind,
};
use stokes_bddc::bench::{run_experiment_matrix, to_csv, ExperimentConfig, ReportTable, RowStatus};
use stokes_bddc::coarse::{
    adaptive_first_constraints, adaptive_second_constraints, constrained_rayleigh_max, gevp_sym, AdaptiveKind,
    CoarseKind,
};
use stokes_bddc::decomp::{partition_mesh, Decomposition, PartitionMethod};
use stokes_bddc::mesh::{generate_cvt, generate_random_voronoi, polygon_quadrature, PolyMesh};
use stokes_bddc::problem::DdSystem;

mod common;
use common::{cholesky_oracle, global_elimination, heterogeneous_fixtures, random_spd, transform_with};

type Outcome = Result<String, String>;

struct Criterion {
    id: &'static str,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn patch_velocity(x: [f64; 2]) -> [f64; 2] {
    [x[0] * x[0], -2.0 * x[0] * x[1]]
}

/// Largest relative dof error of the quadratic patch solution.
fn patch_error(mesh: &PolyMesh) -> Result<f64, String> {
    let dm = DofMap::new(mesh);
    let sys = assemble_global(mesh, &dm, &|_| 1.0, &|_| [-3.0, 0.0]).map_err(|e| e.to_string())?;
    let red = apply_dirichlet(mesh, &sys, &patch_velocity).map_err(|e| e.to_string())?;
    let sol = direct_solve_reference(&red).map_err(|e| e.to_string())?;
    let exact_u: Vec<f64> = (0..dm.n_velocity())
        .map(|d| match dm.kind(d) {
            VelocityDof::Moment { .. } => 0.0,
            _ => patch_velocity(dm.node_point(mesh, d).unwrap())[d % 2],
        })
        .collect();
    let mut exact_p = vec![0.0; dm.n_pressure()];
    for (c, el) in sys.elements.iter().enumerate() {
        let m = el.monomials;
        let coef = [m.center[0] - 0.5, m.h, 0.0];
        for (a, v) in coef.iter().enumerate() {
            exact_p[dm.pressure_dof(c, a)] = *v;
        }
    }
    let eu = max_abs_diff(&sol.velocity, &exact_u) / max_abs(&exact_u);
    let ep = max_abs_diff(&sol.pressure, &exact_p) / max_abs(&exact_p);
    Ok(eu.max(ep))
}

fn criterion_patch() -> Outcome {
    let meshes = [
        ("structured", PolyMesh::structured(8, 8)),
        ("cvt-64", generate_cvt(64, 7, 1e-3, 60).map_err(|e| e.to_string())?),
        ("rnd-64", generate_random_voronoi(64, 7, 0).map_err(|e| e.to_string())?),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, mesh) in &meshes {
        let e = patch_error(mesh)?;
        worst = worst.max(e);
        parts.push(format!("{name} {e:.2e}"));
    }
    check(
        worst <= 1e-8,
        format!("relative dof error {} (tol 1e-8)", parts.join(", ")),
    )
}

/// Stream function `sin²(πx) sin²(πy)` gives a divergence-free velocity
/// vanishing with its gradient on the boundary; `p = cos(πx) cos(πy)`.
fn smooth_velocity_grad(x: [f64; 2]) -> [[f64; 2]; 2] {
    let (a, b) = (PI * x[0], PI * x[1]);
    let p2 = PI * PI;
    [
        [
            p2 * (2.0 * a).sin() * (2.0 * b).sin(),
            2.0 * p2 * a.sin().powi(2) * (2.0 * b).cos(),
        ],
        [
            -2.0 * p2 * (2.0 * a).cos() * b.sin().powi(2),
            -p2 * (2.0 * a).sin() * (2.0 * b).sin(),
        ],
    ]
}

/// Load for `−Δu − ∇p = f` with the solution above.
fn smooth_load(x: [f64; 2]) -> [f64; 2] {
    let (a, b) = (PI * x[0], PI * x[1]);
    let p3 = PI * PI * PI;
    [
        -2.0 * p3 * (2.0 * b).sin() * (1.0 - 4.0 * a.sin().powi(2)) + PI * a.sin() * b.cos(),
        -2.0 * p3 * (2.0 * a).sin() * (4.0 * b.sin().powi(2) - 1.0) + PI * a.cos() * b.sin(),
    ]
}

/// Relative broken H1 seminorm error between the exact velocity and the
/// element-wise projection `Π∇ u_h`.
fn energy_error(mesh: &PolyMesh, sys: &GlobalSystem, velocity: &[f64]) -> Result<f64, String> {
    let (mut err, mut norm) = (0.0, 0.0);
    for (c, el) in sys.elements.iter().enumerate() {
        let local = DVector::from_iterator(sys.cell_dofs[c].len(), sys.cell_dofs[c].iter().map(|&d| velocity[d]));
        let coef = &el.pi_star * local;
        for q in polygon_quadrature(mesh, c, 8).map_err(|e| e.to_string())? {
            let gh = el.monomials.grad_vec(coef.as_slice(), q.x);
            let g = smooth_velocity_grad(q.x);
            for i in 0..2 {
                for j in 0..2 {
                    err += q.w * (g[i][j] - gh[i][j]).powi(2);
                    norm += q.w * g[i][j].powi(2);
                }
            }
        }
    }
    Ok((err / norm).sqrt())
}

fn criterion_convergence() -> Outcome {
    let mut pts = Vec::new();
    for n in [64, 256, 1024] {
        let mesh = generate_cvt(n, 3, 1e-4, 200).map_err(|e| e.to_string())?;
        let dm = DofMap::new(&mesh);
        let sys = assemble_global(&mesh, &dm, &|_| 1.0, &smooth_load).map_err(|e| e.to_string())?;
        let red = apply_dirichlet(&mesh, &sys, &|_| [0.0, 0.0]).map_err(|e| e.to_string())?;
        let sol = direct_solve_reference(&red).map_err(|e| e.to_string())?;
        let e = energy_error(&mesh, &sys, &sol.velocity)?;
        pts.push(((1.0 / n as f64).sqrt().ln(), e.ln(), n, e));
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let order = num / den;
    let errs: Vec<String> = pts.iter().map(|p| format!("{}:{:.3e}", p.2, p.3)).collect();
    check(
        (order - 2.0).abs() <= 0.3,
        format!("observed order {order:.3} (target 2 +- 0.3), errors {}", errs.join(" ")),
    )
}

fn criterion_exactness() -> Outcome {
    let mesh = PolyMesh::structured(4, 2);
    let part: Vec<usize> = (0..8).map(|c| usize::from(c % 4 >= 2)).collect();
    let decomp = Decomposition::new(&mesh, 2, part).map_err(|e| e.to_string())?;
    let dd = DdSystem::new(
        &mesh,
        &decomp,
        &|x| 1.0 + x[0] * x[1],
        &|x| [x[1] - 0.5, x[0] * x[0]],
        &lid_velocity,
    )
    .map_err(|e| e.to_string())?;

    let ip = dd.interface();
    let (oracle, g) = global_elimination(&dd);
    let schur_diff = (&ip.to_dense() - &oracle).abs().max() / oracle.abs().max();
    let rhs_diff = (&DVector::from_vec(ip.rhs()) - &g).abs().max() / g.abs().max().max(1e-300);

    let m = BddcPreconditioner::new(
        &dd.subs,
        &dd.skeleton,
        &dd.classes,
        full_primal_transformations(&dd),
        ScalingKind::Multiplicity,
    )
    .map_err(|e| e.to_string())?;
    let (_, _, full) = solve_interface(&dd, &m, 1e-10, 10).map_err(|e| e.to_string())?;

    let cons = flux_constraints(&mesh, &dd).map_err(|e| e.to_string())?;
    let dims: Vec<usize> = dd.classes.edge_ranges.iter().map(|r| r.len()).collect();
    let m = BddcPreconditioner::new(
        &dd.subs,
        &dd.skeleton,
        &dd.classes,
        build_edge_transformations(&cons, &dims),
        ScalingKind::Deluxe,
    )
    .map_err(|e| e.to_string())?;
    let (sol, _, rep) = solve_interface(&dd, &m, 1e-10, 200).map_err(|e| e.to_string())?;
    let reference = direct_solve_reference(&dd.reduced).map_err(|e| e.to_string())?;
    let du = max_abs_diff(&sol.velocity, &reference.velocity) / max_abs(&reference.velocity);
    let dp = max_abs_diff(&sol.pressure, &reference.pressure) / max_abs(&reference.pressure);

    let ok = schur_diff <= 1e-9 && rhs_diff <= 1e-9 && full.iterations <= 1 && rep.converged() && du.max(dp) <= 1e-5;
    check(
        ok,
        format!(
            "(a) schur {schur_diff:.2e} rhs {rhs_diff:.2e} (tol 1e-9); (b) full-primal iterations {}; \
             (c) pcg velocity {du:.2e} pressure {dp:.2e} (tol 1e-5)",
            full.iterations
        ),
    )
}

fn sixteen_subdomain_fixture(cells: usize) -> Result<(PolyMesh, DdSystem), String> {
    let mesh = generate_cvt(cells, 5, 1e-3, 60).map_err(|e| e.to_string())?;
    let decomp = partition_mesh(&mesh, 16, &PartitionMethod::CoordinateBisection, 0).map_err(|e| e.to_string())?;
    let dd = DdSystem::new(
        &mesh,
        &decomp,
        &|x| {
            if (x[0] - 0.3).hypot(x[1] - 0.6) < 0.15 {
                1e3
            } else {
                1.0
            }
        },
        &|x| [0.0, -x[0]],
        &lid_velocity,
    )
    .map_err(|e| e.to_string())?;
    Ok((mesh, dd))
}

fn flux_preconditioner(mesh: &PolyMesh, dd: &DdSystem, kind: ScalingKind) -> Result<BddcPreconditioner, String> {
    let cons = flux_constraints(mesh, dd).map_err(|e| e.to_string())?;
    let dims: Vec<usize> = dd.classes.edge_ranges.iter().map(|r| r.len()).collect();
    BddcPreconditioner::new(
        &dd.subs,
        &dd.skeleton,
        &dd.classes,
        build_edge_transformations(&cons, &dims),
        kind,
    )
    .map_err(|e| e.to_string())
}

fn criterion_averaging() -> Outcome {
    let (mesh, dd) = sixteen_subdomain_fixture(400)?;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [ScalingKind::Multiplicity, ScalingKind::Deluxe] {
        let m = flux_preconditioner(&mesh, &dd, kind)?;
        let pou = m.scaling().partition_of_unity_error(&dd.classes);
        let mut idem: f64 = 0.0;
        for _ in 0..20 {
            let w = PartialVector {
                primal: (0..m.n_primal()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                dual: m
                    .dual_dims()
                    .iter()
                    .map(|&n| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect(),
            };
            let e1 = m.average(&w);
            let e2 = m.average(&e1);
            let a: Vec<f64> = e1.primal.iter().chain(e1.dual.iter().flatten()).copied().collect();
            let b: Vec<f64> = e2.primal.iter().chain(e2.dual.iter().flatten()).copied().collect();
            idem = idem.max(max_abs_diff(&a, &b));
        }
        ok &= pou <= 1e-12 && idem <= 1e-10;
        parts.push(format!("{kind}: sum D - I {pou:.2e}, |E^2 - E| {idem:.2e}"));
    }
    check(ok, format!("{} (tol 1e-12, 1e-10)", parts.join("; ")))
}

fn criterion_lanczos() -> Outcome {
    let (mesh, dd) = sixteen_subdomain_fixture(300)?;
    let m = flux_preconditioner(&mesh, &dd, ScalingKind::Multiplicity)?;
    let ip = dd.interface();
    if ip.dim() > 2000 {
        return Err(format!("fixture has {} interface dofs", ip.dim()));
    }
    let ev = dense_preconditioned_spectrum(&ip, &m, 2000).map_err(|e| e.to_string())?;
    let dense = ev.last().unwrap() / ev[0];
    let (_, _, rep) = solve_interface(&dd, &m, 1e-12, 1000).map_err(|e| e.to_string())?;
    let rel = (rep.k2 - dense).abs() / dense;
    check(
        rel <= 0.1,
        format!(
            "{} interface dofs, lanczos k2 {:.4} dense {dense:.4}, deviation {:.2}%",
            ip.dim(),
            rep.k2,
            100.0 * rel
        ),
    )
}

fn criterion_gevp() -> Outcome {
    let tol = 100.0;
    let mut worst: f64 = 0.0;
    let mut n_constraints = 0;
    for ctx in heterogeneous_fixtures() {
        for kind in [AdaptiveKind::First, AdaptiveKind::Second] {
            let out = match kind {
                AdaptiveKind::First => adaptive_first_constraints(&ctx, tol, usize::MAX),
                AdaptiveKind::Second => adaptive_second_constraints(&ctx, tol, usize::MAX),
            }
            .map_err(|e| e.to_string())?;
            n_constraints += out.constraints.len();
            let t = transform_with(&ctx, &out.constraints);
            let r = constrained_rayleigh_max(&ctx, kind, &t).map_err(|e| e.to_string())?;
            worst = worst.max(r);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut oracle_err: f64 = 0.0;
    for n in [3, 8, 15] {
        for _ in 0..4 {
            let a = random_spd(n, &mut rng, 0.0);
            let b = random_spd(n, &mut rng, 0.2);
            let g = gevp_sym(&a, &b, 1e-10).map_err(|e| e.to_string())?;
            let o = cholesky_oracle(&a, &b);
            if g.values.len() != o.len() {
                return Err(format!("gevp returned {} of {} eigenvalues", g.values.len(), o.len()));
            }
            for (x, y) in g.values.iter().zip(&o) {
                oracle_err = oracle_err.max((x - y).abs() / y.abs().max(1.0));
            }
        }
    }
    check(
        worst <= tol * (1.0 + 1e-8) && oracle_err <= 1e-9,
        format!(
            "max constrained Rayleigh {worst:.4} (bound {tol}), {n_constraints} constraints; \
             gevp vs dense oracle {oracle_err:.2e} (tol 1e-9)"
        ),
    )
}

fn campaign_config() -> Result<ExperimentConfig, String> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/campaign.cfg");
    ExperimentConfig::from_file(path).map_err(|e| e.to_string())
}

static CAMPAIGN: std::sync::OnceLock<Result<(ReportTable, String), String>> = std::sync::OnceLock::new();

fn campaign() -> Result<&'static (ReportTable, String), String> {
    CAMPAIGN
        .get_or_init(|| {
            let cfg = campaign_config()?;
            let table = run_experiment_matrix(&cfg).map_err(|e| e.to_string())?;
            let csv = to_csv(&table);
            Ok((table, csv))
        })
        .as_ref()
        .map_err(Clone::clone)
}

fn criterion_campaign() -> Outcome {
    let (table, _) = campaign()?;
    let mut failures = Vec::new();
    let find = |r: &stokes_bddc::bench::ReportRow, coarse: CoarseKind, scaling: ScalingKind| {
        table.rows.iter().find(|o| {
            o.family == r.family
                && o.cells == r.cells
                && o.nsub == r.nsub
                && o.nsink == r.nsink
                && o.coarse == coarse
                && o.scaling == scaling
        })
    };
    let (mut min_ratio, mut max_adaptive_k2, mut max_adaptive_it) = (f64::INFINITY, 0.0_f64, 0usize);
    let mut formula_rows = 0;
    for r in &table.rows {
        if r.status == RowStatus::Error || r.status == RowStatus::MaxIterations {
            failures.push(format!(
                "{} {} {} nsink {}: {} {}",
                r.family, r.coarse, r.scaling, r.nsink, r.status, r.message
            ));
        }
        if r.coarse == CoarseKind::Frugal {
            formula_rows += 1;
            let expect = 2 * r.n_corners + 4 * r.n_edges;
            if r.n_pi_requested != expect {
                failures.push(format!(
                    "(c) {} nsink {} {}: n_pi {} vs {expect}",
                    r.family, r.nsink, r.scaling, r.n_pi_requested
                ));
            }
            if r.scaling == ScalingKind::Multiplicity {
                match find(r, CoarseKind::Frugal, ScalingKind::Deluxe) {
                    Some(d) => {
                        let ratio = r.k2 / d.k2;
                        min_ratio = min_ratio.min(ratio);
                        if !(ratio >= 5.0) {
                            failures.push(format!(
                                "(a) {} nsink {}: k2 {:.2} vs {:.2}",
                                r.family, r.nsink, r.k2, d.k2
                            ));
                        }
                    }
                    None => failures.push(format!("(a) {} nsink {}: no deluxe row", r.family, r.nsink)),
                }
            }
        }
        if r.coarse.adaptive().is_some() && r.scaling == ScalingKind::Deluxe {
            max_adaptive_k2 = max_adaptive_k2.max(r.k2);
            max_adaptive_it = max_adaptive_it.max(r.iters);
            if !(r.k2 <= 150.0 && r.iters <= 40) {
                failures.push(format!(
                    "(b) {} {} nsink {}: k2 {:.2} it {}",
                    r.family, r.coarse, r.nsink, r.k2, r.iters
                ));
            }
        }
    }
    let check_failed = table.rows.iter().filter(|r| r.status == RowStatus::CheckFailed).count();
    let summary = format!(
        "{} rows; (a) min frugal mult/deluxe k2 ratio {min_ratio:.1} (>= 5); (b) adaptive+deluxe max k2 {max_adaptive_k2:.2} \
         (<= 150), max it {max_adaptive_it} (<= 40); (c) {formula_rows} frugal rows checked; {check_failed} row(s) above \
         the direct-solve check",
        table.rows.len()
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; failures: {}", failures.join("; ")))
    }
}

fn criterion_determinism() -> Outcome {
    let (_, first) = campaign()?;
    let cfg = campaign_config()?;
    let table = run_experiment_matrix(&cfg).map_err(|e| e.to_string())?;
    let second = to_csv(&table);
    check(
        first.as_bytes() == second.as_bytes(),
        format!("{} CSV bytes, rerun identical: {}", first.len(), first == &second),
    )
}

fn main() {
    let criteria = [
        Criterion {
            id: "1",
            name: "patch test",
            limit: Duration::from_secs(10),
            run: criterion_patch,
        },
        Criterion {
            id: "2",
            name: "convergence order",
            limit: Duration::from_secs(120),
            run: criterion_convergence,
        },
        Criterion {
            id: "3",
            name: "schur and bddc exactness",
            limit: Duration::from_secs(10),
            run: criterion_exactness,
        },
        Criterion {
            id: "4",
            name: "partition of unity and averaging",
            limit: Duration::from_secs(30),
            run: criterion_averaging,
        },
        Criterion {
            id: "5",
            name: "condition estimate",
            limit: Duration::from_secs(60),
            run: criterion_lanczos,
        },
        Criterion {
            id: "6",
            name: "gevp contract",
            limit: Duration::from_secs(30),
            run: criterion_gevp,
        },
        Criterion {
            id: "7",
            name: "sinker campaign trends",
            limit: Duration::from_secs(900),
            run: criterion_campaign,
        },
        Criterion {
            id: "8",
            name: "campaign determinism",
            limit: Duration::from_secs(900),
            run: criterion_determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let within = elapsed <= c.limit;
        let (pass, detail) = match outcome {
            Ok(d) => (within, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {} ({}): {} [{:.1}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
