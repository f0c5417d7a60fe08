//! Property-based tests of the structural invariants.

mod common;

use common::random_polygon;
use hvem::analysis::unit_square_polygon;
use hvem::geometry::{signed_area, Point};
use hvem::local::LocalElementSpace;
use hvem::mesh::generate_voronoi_lloyd;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Voronoi generation: a partition of the domain (areas sum to 1),
    /// conforming adjacency, deterministic serialization.
    #[test]
    fn voronoi_partition_conformity_determinism(
        seeds in 2usize..14,
        iters in 0usize..12,
        rng_seed in 0u64..1000,
    ) {
        let domain = unit_square_polygon();
        let m1 = generate_voronoi_lloyd(seeds, &domain, iters, rng_seed).unwrap();
        let m2 = generate_voronoi_lloyd(seeds, &domain, iters, rng_seed).unwrap();
        prop_assert_eq!(m1.to_json_string(), m2.to_json_string());
        prop_assert!((m1.total_area() - 1.0).abs() < 1e-12);
        for e in &m1.edges {
            prop_assert!(e.elements.len() == 1 || e.elements.len() == 2);
        }
        // every element is CCW with positive area
        for k in 0..m1.n_elements() {
            prop_assert!(signed_area(&m1.element_polygon(k)) > 0.0);
        }
    }

    /// The local stiffness matrix is invariant under rigid translation and
    /// scaling of the element, and stays symmetric PSD with a 1D kernel.
    #[test]
    fn local_stiffness_scale_invariance(
        seed in 0u64..10_000,
        n_edges in 3usize..=8,
        p in 1usize..=4,
        scale in 0.05f64..50.0,
        tx in -20.0f64..20.0,
        ty in -20.0f64..20.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = random_polygon(&mut rng, n_edges);
        let moved: Vec<Point> = poly
            .iter()
            .map(|q| Point::new(tx + scale * q.x, ty + scale * q.y))
            .collect();
        let a1 = LocalElementSpace::from_polygon(&poly, p).local_stiffness().unwrap();
        let a2 = LocalElementSpace::from_polygon(&moved, p).local_stiffness().unwrap();
        let scale_ref = a1.abs().max().max(1.0);
        prop_assert!((a1.clone() - &a2).abs().max() < 1e-9 * scale_ref);
        // constants in the kernel
        let space = LocalElementSpace::from_polygon(&poly, p);
        let mut c = nalgebra::DVector::zeros(space.n_dofs);
        for off in &space.offsets {
            c[*off] = 1.0;
        }
        prop_assert!((a1 * c).abs().max() < 1e-10 * scale_ref);
    }

    /// Harmonic basis values depend on the point only through the scaled
    /// coordinate, for arbitrary centers and diameters.
    #[test]
    fn harmonic_basis_scaling_invariance(
        cx in -5.0f64..5.0,
        cy in -5.0f64..5.0,
        h in 0.01f64..100.0,
        px in -0.7f64..0.7,
        py in -0.7f64..0.7,
    ) {
        let unit = hvem::basis::HarmonicBasis::new(Point::new(0.0, 0.0), 1.0, 6);
        let moved = hvem::basis::HarmonicBasis::new(Point::new(cx, cy), h, 6);
        let x0 = Point::new(px, py);
        let x1 = Point::new(cx + h * px, cy + h * py);
        for alpha in 1..=unit.dim() {
            prop_assert!((unit.value(alpha, x0) - moved.value(alpha, x1)).abs() < 1e-12);
        }
    }
}
