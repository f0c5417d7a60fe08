//! Shared helpers for the integration tests.

use hvem::geometry::Point;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random simple CCW polygon with `n_edges` vertices: jittered angles
/// around a circle with varying radii, then anisotropically scaled and
/// translated. Star-shaped with respect to its center by construction,
/// frequently non-convex.
pub fn random_polygon(rng: &mut ChaCha8Rng, n_edges: usize) -> Vec<Point> {
    let n = n_edges as f64;
    let scale_x = rng.random_range(0.5..2.0);
    let scale_y = rng.random_range(0.5..2.0);
    let cx = rng.random_range(-3.0..3.0);
    let cy = rng.random_range(-3.0..3.0);
    (0..n_edges)
        .map(|i| {
            let theta =
                2.0 * std::f64::consts::PI * (i as f64 + rng.random_range(0.0..0.55)) / n;
            let r = rng.random_range(0.45..1.0);
            Point::new(
                cx + scale_x * r * theta.cos(),
                cy + scale_y * r * theta.sin(),
            )
        })
        .collect()
}
