//! Edge Legendre bases and bulk harmonic polynomial bases.
//!
//! Edge moments are taken against Legendre polynomials mapped from [-1,1] to
//! the edge, so that distinct moments are L2-orthogonal on the edge. The bulk
//! basis of harmonic polynomials of degree p has dimension 2p+1 and is built
//! from real and imaginary parts of powers of the scaled complex coordinate
//! Z = ((x,y) - center)/diam, which keeps evaluation well conditioned across
//! element sizes.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::legendre_with_deriv;
use num_complex::Complex64;

/// Legendre basis {m_r}_{r=0..p-1} of polynomials of degree p-1 on an edge.
///
/// The affine parametrization maps -1 to `a` and +1 to `b`; moments are
/// single-valued between neighbouring elements because edges are always
/// parametrized in a canonical direction.
#[derive(Debug, Clone)]
pub struct EdgeLegendreBasis {
    pub a: Point,
    pub b: Point,
    pub h_e: f64,
    /// Number of moments (polynomial degrees 0..p-1).
    pub p: usize,
}

impl EdgeLegendreBasis {
    pub fn new(a: Point, b: Point, p: usize) -> Self {
        EdgeLegendreBasis {
            a,
            b,
            h_e: a.dist(b),
            p,
        }
    }

    /// Midpoint of the edge.
    pub fn midpoint(&self) -> Point {
        self.a.mid(self.b)
    }

    /// Physical point of the parameter t in [-1,1].
    pub fn point_at(&self, t: f64) -> Point {
        self.a.add(self.b.sub(self.a).scale(0.5 * (t + 1.0)))
    }

    /// Parameter of a point assumed to lie on the edge line.
    pub fn param_of(&self, x: Point) -> f64 {
        let ab = self.b.sub(self.a);
        2.0 * x.sub(self.a).dot(ab) / ab.dot(ab) - 1.0
    }

    /// Legendre value m_r at parameter t (no geometric checks).
    pub fn eval_param(&self, r: usize, t: f64) -> f64 {
        legendre_with_deriv(r, t).0
    }

    /// Value of m_r at a physical point; the point must lie on the edge
    /// within a relative tolerance of 1e-12.
    pub fn eval(&self, r: usize, x: Point) -> Result<f64> {
        let t = self.param_of(x);
        let foot = self.point_at(t.clamp(-1.0, 1.0));
        if x.dist(foot) > 1e-12 * self.h_e.max(1.0) {
            return Err(Error::Domain(format!(
                "point ({}, {}) is not on the edge",
                x.x, x.y
            )));
        }
        Ok(self.eval_param(r, t))
    }
}

/// Basis of harmonic polynomials of degree `p` on an element: dimension
/// 2p+1, with q_1 = 1, q_{2l} = Im(Z^l), q_{2l+1} = Re(Z^l) in the scaled
/// coordinate Z.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub center: Point,
    pub h_k: f64,
    pub p: usize,
}

impl HarmonicBasis {
    pub fn new(center: Point, h_k: f64, p: usize) -> Self {
        assert!(h_k > 0.0);
        HarmonicBasis { center, h_k, p }
    }

    /// Dimension 2p+1 of the harmonic polynomial space.
    pub fn dim(&self) -> usize {
        2 * self.p + 1
    }

    fn scaled(&self, x: Point) -> Complex64 {
        Complex64::new((x.x - self.center.x) / self.h_k, (x.y - self.center.y) / self.h_k)
    }

    /// Value and analytic gradient of q_alpha (1-based) at a point.
    pub fn eval(&self, alpha: usize, x: Point) -> (f64, Point) {
        assert!(
            (1..=self.dim()).contains(&alpha),
            "basis index {alpha} out of range 1..={}",
            self.dim()
        );
        if alpha == 1 {
            return (1.0, Point::new(0.0, 0.0));
        }
        let l = (alpha / 2) as i32;
        let imaginary = alpha.is_multiple_of(2);
        let z = self.scaled(x);
        let zl1 = z.powi(l - 1);
        let w = zl1 * z;
        let dw = (l as f64) * zl1 / self.h_k;
        if imaginary {
            (w.im, Point::new(dw.im, dw.re))
        } else {
            (w.re, Point::new(dw.re, -dw.im))
        }
    }

    /// Value only.
    pub fn value(&self, alpha: usize, x: Point) -> f64 {
        self.eval(alpha, x).0
    }

    /// Gradient only.
    pub fn gradient(&self, alpha: usize, x: Point) -> Point {
        self.eval(alpha, x).1
    }
}
