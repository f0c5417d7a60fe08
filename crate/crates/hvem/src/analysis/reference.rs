//! Reference solutions of the Dirichlet-Laplace problem with analytic
//! gradients, and the over-integrated norm constants used to normalize
//! relative errors.
//!
//! The three built-in solutions are harmonic:
//!
//! * u1(x,y) = e^x sin y            (entire; Im e^z),
//! * u2(r,t) = r^2 (log r sin 2t + t cos 2t)   (Im z^2 log z; H^{3-eps}
//!   regularity with the singular point at the origin),
//! * u3(r,t) = r^{2/3} sin(2t/3 + pi/3)        (Im e^{i pi/3} z^{2/3};
//!   H^{5/3-eps}, the natural corner singularity of the L-shape).
//!
//! Gradients come from the holomorphic representation: for u = Im f the
//! Cauchy-Riemann equations give grad u = (Im f', Re f').

use crate::geometry::{self, Point, Triangle};
use crate::mesh::Mesh;
use crate::quadrature::triangle_quadrature;
use num_complex::Complex64;
use std::sync::Arc;

/// Smoothness tag of a reference solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularity {
    Analytic,
    /// u is in H^s but no better (up to epsilon).
    FiniteSobolev(f64),
}

/// A known exact solution with analytic gradient and precomputed norms over
/// its study domain.
#[derive(Clone)]
pub struct ReferenceSolution {
    pub id: String,
    value: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    gradient: Arc<dyn Fn(Point) -> Point + Send + Sync>,
    /// L2 norm over the study domain.
    pub l2_norm: f64,
    /// Full H1 norm over the study domain.
    pub h1_norm: f64,
    pub regularity: Regularity,
    /// Corner where derivatives (or higher derivatives) blow up; quadrature
    /// is geometrically refined toward it.
    pub singular_corner: Option<Point>,
}

impl std::fmt::Debug for ReferenceSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReferenceSolution")
            .field("id", &self.id)
            .field("l2_norm", &self.l2_norm)
            .field("h1_norm", &self.h1_norm)
            .finish()
    }
}

impl ReferenceSolution {
    pub fn value(&self, x: Point) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: Point) -> Point {
        (self.gradient)(x)
    }
}

/// Unit square (0,1)^2, the study domain of u1 and u2.
pub fn unit_square_polygon() -> Vec<Point> {
    vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ]
}

/// The built-in reference solutions by identifier: "u1", "u2", "u3", or
/// "const:<value>".
pub fn reference(id: &str) -> crate::Result<ReferenceSolution> {
    match id {
        "u1" => Ok(u1()),
        "u2" => Ok(u2()),
        "u3" => Ok(u3()),
        _ => {
            if let Some(c) = id.strip_prefix("const:") {
                let c: f64 = c.parse().map_err(|_| {
                    crate::Error::Parameter(format!("cannot parse constant in '{id}'"))
                })?;
                Ok(constant(c, &unit_square_polygon()))
            } else {
                Err(crate::Error::Parameter(format!(
                    "unknown reference solution '{id}' (expected u1, u2, u3 or const:<c>)"
                )))
            }
        }
    }
}

/// u1 = e^x sin y on the unit square.
pub fn u1() -> ReferenceSolution {
    let value = |x: Point| x.x.exp() * x.y.sin();
    let gradient = |x: Point| {
        let f1 = Complex64::new(x.x, x.y).exp();
        Point::new(f1.im, f1.re)
    };
    let (l2, h1) = domain_norms(&unit_square_polygon(), &value, &gradient, None);
    ReferenceSolution {
        id: "u1".into(),
        value: Arc::new(value),
        gradient: Arc::new(gradient),
        l2_norm: l2,
        h1_norm: h1,
        regularity: Regularity::Analytic,
        singular_corner: None,
    }
}

/// u2 = Im(z^2 log z) on the unit square; singular point at the origin.
pub fn u2() -> ReferenceSolution {
    let value = |x: Point| {
        let z = Complex64::new(x.x, x.y);
        if z.norm() == 0.0 {
            return 0.0;
        }
        (z * z * z.ln()).im
    };
    let gradient = |x: Point| {
        let z = Complex64::new(x.x, x.y);
        if z.norm() == 0.0 {
            // z log z -> 0, so the gradient extends continuously by 0
            return Point::new(0.0, 0.0);
        }
        let f1 = 2.0 * z * z.ln() + z;
        Point::new(f1.im, f1.re)
    };
    let corner = Point::new(0.0, 0.0);
    let (l2, h1) = domain_norms(&unit_square_polygon(), &value, &gradient, Some(corner));
    ReferenceSolution {
        id: "u2".into(),
        value: Arc::new(value),
        gradient: Arc::new(gradient),
        l2_norm: l2,
        h1_norm: h1,
        regularity: Regularity::FiniteSobolev(3.0),
        singular_corner: Some(corner),
    }
}

/// u3 = Im(e^{i pi/3} z^{2/3}) on the L-shaped domain; gradient singular at
/// the reentrant corner (flagged as NaN exactly there).
pub fn u3() -> ReferenceSolution {
    let rot = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    let value = move |x: Point| {
        let z = Complex64::new(x.x, x.y);
        if z.norm() == 0.0 {
            return 0.0;
        }
        (rot * z.powf(2.0 / 3.0)).im
    };
    let gradient = move |x: Point| {
        let z = Complex64::new(x.x, x.y);
        if z.norm() == 0.0 {
            return Point::new(f64::NAN, f64::NAN);
        }
        let f1 = rot * (2.0 / 3.0) * z.powf(-1.0 / 3.0);
        Point::new(f1.im, f1.re)
    };
    let corner = Point::new(0.0, 0.0);
    let (l2, h1) = domain_norms(
        &crate::mesh::lshape_polygon(),
        &value,
        &gradient,
        Some(corner),
    );
    ReferenceSolution {
        id: "u3".into(),
        value: Arc::new(value),
        gradient: Arc::new(gradient),
        l2_norm: l2,
        h1_norm: h1,
        regularity: Regularity::FiniteSobolev(5.0 / 3.0),
        singular_corner: Some(corner),
    }
}

/// Constant reference over an arbitrary polygonal domain.
pub fn constant(c: f64, domain: &[Point]) -> ReferenceSolution {
    let area = geometry::signed_area(domain);
    let norm = c.abs() * area.sqrt();
    ReferenceSolution {
        id: format!("const:{c}"),
        value: Arc::new(move |_| c),
        gradient: Arc::new(|_| Point::new(0.0, 0.0)),
        l2_norm: norm,
        h1_norm: norm,
        regularity: Regularity::Analytic,
        singular_corner: None,
    }
}

/// Reference built from closures, normalized over the given mesh
/// (used by patch tests with harmonic polynomials as exact solutions).
pub fn custom_on_mesh(
    id: &str,
    mesh: &Mesh,
    value: impl Fn(Point) -> f64 + Send + Sync + 'static,
    gradient: impl Fn(Point) -> Point + Send + Sync + 'static,
) -> ReferenceSolution {
    let rule = triangle_quadrature(20);
    let mut l2sq = 0.0;
    let mut h1sq = 0.0;
    for k in 0..mesh.n_elements() {
        for tri in mesh.sub_triangulate(k) {
            for (x, w) in rule.mapped(&tri) {
                let v = value(x);
                let g = gradient(x);
                l2sq += w * v * v;
                h1sq += w * g.dot(g);
            }
        }
    }
    ReferenceSolution {
        id: id.into(),
        value: Arc::new(value),
        gradient: Arc::new(gradient),
        l2_norm: l2sq.sqrt(),
        h1_norm: (l2sq + h1sq).sqrt(),
        regularity: Regularity::Analytic,
        singular_corner: None,
    }
}

/// Splits a triangle into geometrically graded pieces toward `corner` when
/// the corner is one of its vertices (3 rings, ratio 0.15); otherwise
/// returns the triangle unchanged. Used for integrands with radial
/// singularities like r^{-2/3}.
pub fn graded_triangles(tri: &Triangle, corner: Option<Point>, scale: f64) -> Vec<Triangle> {
    let Some(c) = corner else {
        return vec![*tri];
    };
    let tol = 1e-9 * scale;
    let verts = [tri.a, tri.b, tri.c];
    let Some(ci) = verts.iter().position(|v| v.dist(c) < tol) else {
        return vec![*tri];
    };
    let u = verts[(ci + 1) % 3];
    let v = verts[(ci + 2) % 3];
    let ratio: f64 = 0.15;
    let rings = 3;
    let mut pieces = Vec::with_capacity(2 * rings + 1);
    let at = |w: Point, t: f64| c.add(w.sub(c).scale(t));
    let t1 = ratio.powi(rings as i32);
    pieces.push(Triangle {
        a: c,
        b: at(u, t1),
        c: at(v, t1),
    });
    for k in (0..rings).rev() {
        let t0 = ratio.powi(k as i32 + 1);
        let t1 = ratio.powi(k as i32);
        pieces.push(Triangle {
            a: at(u, t0),
            b: at(u, t1),
            c: at(v, t1),
        });
        pieces.push(Triangle {
            a: at(u, t0),
            b: at(v, t1),
            c: at(v, t0),
        });
    }
    pieces
}

/// L2 and full H1 norms over a polygonal domain by composite quadrature of
/// exactness 20, geometrically refined toward a singular corner.
pub fn domain_norms(
    domain: &[Point],
    value: &(impl Fn(Point) -> f64 + ?Sized),
    gradient: &(impl Fn(Point) -> Point + ?Sized),
    singular_corner: Option<Point>,
) -> (f64, f64) {
    let rule = triangle_quadrature(20);
    let scale = geometry::diameter(domain);
    let mut l2sq = 0.0;
    let mut h1sq = 0.0;
    for tri in geometry::triangulate(domain) {
        for piece in graded_triangles(&tri, singular_corner, scale) {
            for (x, w) in rule.mapped(&piece) {
                let v = value(x);
                let g = gradient(x);
                l2sq += w * v * v;
                h1sq += w * g.dot(g);
            }
        }
    }
    (l2sq.sqrt(), (l2sq + h1sq).sqrt())
}
