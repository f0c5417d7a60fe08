//! Oracle tests for the local projectors, the stiffness construction and
//! the virtual interpolant, on randomized polygons and generated meshes.

mod common;

use common::random_polygon;
use hvem::analysis::{custom_on_mesh, u1, unit_square_polygon};
use hvem::assembly::{assemble, impose_dirichlet, solve, DegreeVector, DirichletMode};
use hvem::basis::HarmonicBasis;
use hvem::geometry::{triangulate, Point};
use hvem::local::{edge_dof_moments, LocalElementSpace};
use hvem::mesh::{
    generate_cartesian, generate_graded_lshape, generate_voronoi_lloyd, GradedFamily, Mesh,
};
use hvem::quadrature::{edge_quadrature, triangle_quadrature};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Legendre orthogonality holds on every edge of every generator's output.
#[test]
fn legendre_orthogonality_across_generated_meshes() {
    let meshes: Vec<Mesh> = vec![
        generate_cartesian(2, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap(),
        generate_voronoi_lloyd(5, &unit_square_polygon(), 10, 11).unwrap(),
        generate_graded_lshape(2, 0.5, GradedFamily::A).unwrap().0,
        generate_graded_lshape(2, 0.5, GradedFamily::B).unwrap().0,
        generate_graded_lshape(2, 0.5, GradedFamily::C).unwrap().0,
    ];
    let p = 4usize;
    let rule = edge_quadrature(2 * p);
    for mesh in &meshes {
        for edge in &mesh.edges {
            let a = mesh.vertices[edge.v[0]];
            let b = mesh.vertices[edge.v[1]];
            let basis = hvem::basis::EdgeLegendreBasis::new(a, b, p);
            for r in 0..p {
                for s in 0..p {
                    let mut acc = 0.0;
                    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                        acc += 0.5 * basis.h_e * w * basis.eval_param(r, t) * basis.eval_param(s, t);
                    }
                    let exact = if r == s {
                        basis.h_e / (2.0 * r as f64 + 1.0)
                    } else {
                        0.0
                    };
                    assert!(
                        (acc - exact).abs() < 1e-12,
                        "edge ({},{}) r={r} s={s}: {acc} vs {exact}",
                        edge.v[0],
                        edge.v[1]
                    );
                }
            }
        }
    }
}

/// Pi* D = I and Pi idempotent on 100 random polygons for p = 1..6.
#[test]
fn projector_identities_on_random_polygons() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let n_edges = rng.random_range(3..=8);
        let poly = random_polygon(&mut rng, n_edges);
        for p in 1..=6 {
            let space = LocalElementSpace::from_polygon(&poly, p);
            let m = space.build_matrices().unwrap();
            let dim = space.bulk_dim();
            let id = DMatrix::<f64>::identity(dim, dim);
            let defect = ((&m.pi_star * &m.d) - id).abs().max();
            assert!(defect < 1e-10, "trial {trial} p={p}: Pi*D defect {defect:.2e}");
            let idem = ((&m.pi * &m.pi) - &m.pi).abs().max();
            assert!(idem < 1e-10, "trial {trial} p={p}: Pi^2 defect {idem:.2e}");
            // the projector fixes DOF vectors of harmonic polynomials
            let fix = ((&m.pi * &m.d) - &m.d).abs().max();
            assert!(fix < 1e-10, "trial {trial} p={p}: Pi D defect {fix:.2e}");
        }
    }
}

/// Boundary-reduced stiffness rows of G equal bulk quadrature over the
/// sub-triangulation on 50 random polygons.
#[test]
fn boundary_reduction_matches_bulk_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..50 {
        let n_edges = rng.random_range(3..=8);
        let poly = random_polygon(&mut rng, n_edges);
        let p = rng.random_range(1..=4);
        let space = LocalElementSpace::from_polygon(&poly, p);
        let g = space.compute_g();
        let tris = triangulate(&poly);
        let rule = triangle_quadrature(2 * p);
        let dim = space.bulk_dim();
        for a in 1..dim {
            for b in 1..dim {
                let mut acc = 0.0;
                for tri in &tris {
                    for (x, w) in rule.mapped(tri) {
                        acc += w
                            * space
                                .harmonic
                                .gradient(a + 1, x)
                                .dot(space.harmonic.gradient(b + 1, x));
                    }
                }
                assert!(
                    (g[(b, a)] - acc).abs() < 1e-12,
                    "trial {trial} p={p} G[{b},{a}]: {} vs {acc}",
                    g[(b, a)]
                );
            }
        }
    }
}

/// Patch test: harmonic polynomials are reproduced exactly through the
/// whole pipeline (assembly, elimination, solve, projection).
#[test]
fn global_patch_test_on_mixed_meshes() {
    let meshes = vec![
        generate_cartesian(2, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap(),
        generate_voronoi_lloyd(6, &unit_square_polygon(), 25, 3).unwrap(),
        generate_graded_lshape(1, 0.5, GradedFamily::A).unwrap().0,
    ];
    for mesh in &meshes {
        let domain_basis = HarmonicBasis::new(Point::new(0.25, 0.25), 2.0, 3);
        for p in [1usize, 3] {
            for alpha in 1..=(2 * p + 1) {
                let b = domain_basis.clone();
                let g = move |x: Point| b.value(alpha, x);
                let degrees = DegreeVector::uniform(mesh, p).unwrap();
                let bc = impose_dirichlet(mesh, &degrees, &g, DirichletMode::ExactMoments, None);
                let system = assemble(mesh, &degrees, &bc).unwrap();
                let sol = solve(&system).unwrap();
                // every element's projection must equal the polynomial itself
                let b2 = domain_basis.clone();
                let gref = move |x: Point| b2.gradient(alpha, x);
                let b3 = domain_basis.clone();
                let vref = move |x: Point| b3.value(alpha, x);
                let reference = custom_on_mesh("qa", mesh, vref, gref);
                let err = hvem::analysis::compute_errors(mesh, &sol, &reference);
                assert!(
                    err.abs_h1_semi < 1e-10 * (1.0 + reference.h1_norm),
                    "p={p} alpha={alpha}: abs H1 {:.2e}",
                    err.abs_h1_semi
                );
            }
        }
    }
}

/// The virtual interpolant (exact edge moments of u as DOFs) projects to
/// the same harmonic polynomial as the direct best fit: its computable H1
/// error is within a factor 2 of the brute-force least-squares fit error.
#[test]
fn interpolant_is_near_best_approximation() {
    let reference = u1();
    let meshes = vec![
        generate_cartesian(2, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap(),
        generate_voronoi_lloyd(4, &unit_square_polygon(), 50, 7).unwrap(),
    ];
    let p = 3usize;
    let rule = triangle_quadrature(2 * p + 6);
    for mesh in &meshes {
        for k in 0..mesh.n_elements() {
            let edge_p = vec![p; mesh.elements[k].len()];
            let space = LocalElementSpace::on_element(mesh, k, &edge_p, p);
            let m = space.build_matrices().unwrap();
            // DOFs of u via exact edge moments
            let r2 = reference.clone();
            let dofs = space.dofs_of(move |x| r2.value(x), 10);
            let coeffs = &m.pi_star * DVector::from_column_slice(&dofs);
            // computable H1 error of the interpolant's projection
            let tris = mesh.sub_triangulate(k);
            let mut err_pi = 0.0;
            for tri in &tris {
                for (x, w) in rule.mapped(tri) {
                    let mut g = Point::new(0.0, 0.0);
                    for alpha in 1..=space.bulk_dim() {
                        g = g.add(space.harmonic.gradient(alpha, x).scale(coeffs[alpha - 1]));
                    }
                    let d = reference.gradient(x).sub(g);
                    err_pi += w * d.dot(d);
                }
            }
            // brute-force least-squares fit of grad u in the harmonic basis
            let dim = space.bulk_dim() - 1; // constants dropped
            let mut normal = DMatrix::<f64>::zeros(dim, dim);
            let mut rhs = DVector::<f64>::zeros(dim);
            let mut uu = 0.0;
            for tri in &tris {
                for (x, w) in rule.mapped(tri) {
                    let gu = reference.gradient(x);
                    uu += w * gu.dot(gu);
                    for a in 0..dim {
                        let ga = space.harmonic.gradient(a + 2, x);
                        rhs[a] += w * ga.dot(gu);
                        for b in a..dim {
                            let gb = space.harmonic.gradient(b + 2, x);
                            normal[(a, b)] += w * ga.dot(gb);
                            normal[(b, a)] = normal[(a, b)];
                        }
                    }
                }
            }
            let best = normal.clone().lu().solve(&rhs).unwrap();
            let err_best_sq: f64 = uu - 2.0 * rhs.dot(&best) + (best.transpose() * normal * &best)[(0, 0)];
            let err_best = err_best_sq.max(0.0).sqrt();
            let err_pi = err_pi.sqrt();
            assert!(
                err_pi <= 2.0 * err_best + 1e-12,
                "element {k}: interpolant error {err_pi:.3e} vs best fit {err_best:.3e}"
            );
        }
    }
}

/// Monotone h-refinement of u1 on Cartesian meshes.
#[test]
fn cartesian_errors_decrease_monotonically() {
    let reference = u1();
    let mut last_h1 = f64::INFINITY;
    let mut last_l2 = f64::INFINITY;
    for level in 0..3 {
        let n = 4usize << level;
        let mesh = generate_cartesian(n, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        let degrees = DegreeVector::uniform(&mesh, 2).unwrap();
        let r2 = reference.clone();
        let g = move |x: Point| r2.value(x);
        let bc = impose_dirichlet(&mesh, &degrees, &g, DirichletMode::ExactMoments, None);
        let sol = solve(&assemble(&mesh, &degrees, &bc).unwrap()).unwrap();
        let err = hvem::analysis::compute_errors(&mesh, &sol, &reference);
        assert!(err.rel_h1 < last_h1);
        assert!(err.rel_l2 < last_l2);
        last_h1 = err.rel_h1;
        last_l2 = err.rel_l2;
    }
}

/// Exact edge moments of a rough-but-finite-energy solution still assemble
/// and solve on a Voronoi h-refinement with the expected qualitative rate.
#[test]
fn voronoi_h_study_converges_at_order_two() {
    let config = hvem::analysis::StudyConfig {
        cond_dense_threshold: 0,
        lloyd_iters: 20,
        ..Default::default()
    };
    let study =
        hvem::analysis::run_h_study("u1", hvem::analysis::HFamily::Voronoi, 2, 3, &config)
            .unwrap();
    let fit = study.h1_fit.unwrap();
    assert!(
        (fit.slope - 2.0).abs() < 0.4,
        "H1 slope {:.3} not ~2",
        fit.slope
    );
    for w in study.rows.windows(2) {
        assert!(w[1].rel_h1 < w[0].rel_h1);
    }
}

/// p-refinement keeps converging on the non-convex pinwheel mesh, with
/// bounded error ratios once the decay sets in.
#[test]
fn p_decay_on_nonconvex_demo_mesh() {
    let mesh = hvem::mesh::generate_nonconvex_demo();
    let config = hvem::analysis::StudyConfig {
        cond_dense_threshold: 0,
        ..Default::default()
    };
    let study = hvem::analysis::run_p_study("u1", &mesh, "nonconvex", 8, &config).unwrap();
    for w in study.rows.windows(2) {
        if w[0].p_max >= 3 {
            let ratio = w[1].rel_h1 / w[0].rel_h1;
            assert!(ratio < 0.75, "p={}->{}: ratio {ratio}", w[0].p_max, w[1].p_max);
        }
    }
    assert!(study.rows.last().unwrap().rel_h1 < 1e-5);
}

/// Exact DOF moments of the canonical edge basis land on the right global
/// indices (single-valued moments across neighbours).
#[test]
fn shared_edge_moments_are_single_valued() {
    let mesh = generate_voronoi_lloyd(5, &unit_square_polygon(), 15, 5).unwrap();
    let p = 3;
    let degrees = DegreeVector::uniform(&mesh, p).unwrap();
    let (offsets, _) = degrees.edge_offsets();
    // a smooth function's moments computed from both adjacent elements agree
    let f = |x: Point| (1.3 * x.x - 0.7 * x.y).sin();
    for (eid, edge) in mesh.edges.iter().enumerate() {
        if edge.boundary {
            continue;
        }
        let mut values: Vec<Vec<f64>> = Vec::new();
        for &k in &edge.elements {
            let edge_p: Vec<usize> = mesh.element_edges[k]
                .iter()
                .map(|&e| degrees.p_edge[e])
                .collect();
            let space = LocalElementSpace::on_element(&mesh, k, &edge_p, p);
            let j = mesh.element_edges[k].iter().position(|&e| e == eid).unwrap();
            values.push(edge_dof_moments(&space.edges[j].basis, &f, 8));
        }
        for (a, b) in values[0].iter().zip(&values[1]) {
            assert!((a - b).abs() < 1e-13, "edge {eid} ({:?})", offsets[eid]);
        }
    }
}
