//! Quadrature rules: Gauss-Legendre on [-1,1], Gauss-Lobatto nodes, and
//! collapsed tensor rules on the reference triangle.

use crate::geometry::{Point, Triangle};
use nalgebra::DMatrix;

/// A rule on the reference interval [-1,1]; weights sum to 2.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

/// A rule on the reference triangle {x >= 0, y >= 0, x + y <= 1};
/// weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub nodes: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

/// Gauss-Legendre nodes and weights with `n` points (exact to degree 2n-1).
///
/// Newton iteration on the Legendre recurrence; accurate to ~1e-15 for the
/// moderate orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // standard asymptotic initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        if 2 * i + 1 == n {
            x = 0.0;
        }
        let (_, d) = legendre_with_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x.abs();
        weights[i] = w;
        nodes[n - 1 - i] = x.abs();
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial of degree `n` at `x`.
pub fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = if (x * x - 1.0).abs() < 1e-14 {
        // endpoint derivative of P_n
        let nf = n as f64;
        x.powi((n as i32) - 1) * nf * (nf + 1.0) / 2.0
    } else {
        (n as f64) * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// Smallest Gauss-Legendre rule integrating polynomials of degree
/// `exactness` exactly.
pub fn edge_quadrature(exactness: usize) -> EdgeRule {
    // n points give exactness 2n-1, so n = ceil((exactness+1)/2)
    let n = (exactness + 1).div_ceil(2).max(1);
    let (nodes, weights) = gauss_legendre(n);
    EdgeRule {
        nodes,
        weights,
        exactness: 2 * n - 1,
    }
}

/// Gauss-Lobatto nodes on [-1,1] for degree `p` (p+1 nodes, endpoints
/// included). Interior nodes are the roots of the derivative of the Legendre
/// polynomial of degree p, obtained as eigenvalues of the Jacobi matrix of
/// the Gegenbauer(3/2) recurrence.
pub fn gauss_lobatto_nodes(p: usize) -> Vec<f64> {
    assert!(p >= 1, "Gauss-Lobatto needs p >= 1");
    let m = p - 1; // number of interior nodes
    let mut nodes = Vec::with_capacity(p + 1);
    nodes.push(-1.0);
    if m > 0 {
        let mut jac = DMatrix::<f64>::zeros(m, m);
        for k in 1..m {
            let kf = k as f64;
            // monic Gegenbauer(lambda = 3/2) recurrence coefficient
            let beta = kf * (kf + 2.0) / ((2.0 * kf + 3.0) * (2.0 * kf + 1.0));
            let b = beta.sqrt();
            jac[(k - 1, k)] = b;
            jac[(k, k - 1)] = b;
        }
        let eig = jac.symmetric_eigen();
        let mut interior: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // clean tiny asymmetry
        for x in &mut interior {
            if x.abs() < 1e-13 {
                *x = 0.0;
            }
        }
        nodes.extend(interior);
    }
    nodes.push(1.0);
    nodes
}

/// Smallest collapsed tensor rule on the reference triangle integrating
/// polynomials of total degree `exactness` exactly.
pub fn triangle_quadrature(exactness: usize) -> TriangleRule {
    let mu = (exactness + 2).div_ceil(2).max(1); // degree d+1 appears in the collapsed direction
    let mv = (exactness + 1).div_ceil(2).max(1);
    let (tu, wu) = gauss_legendre(mu);
    let (tv, wv) = gauss_legendre(mv);
    let mut nodes = Vec::with_capacity(mu * mv);
    let mut weights = Vec::with_capacity(mu * mv);
    for (i, &u1) in tu.iter().enumerate() {
        let u = 0.5 * (u1 + 1.0);
        for (j, &v1) in tv.iter().enumerate() {
            let v = 0.5 * (v1 + 1.0);
            nodes.push((u, v * (1.0 - u)));
            weights.push(0.25 * wu[i] * wv[j] * (1.0 - u));
        }
    }
    TriangleRule {
        nodes,
        weights,
        exactness,
    }
}

impl EdgeRule {
    /// Physical nodes and ds-weights along the segment from `a` to `b`.
    pub fn mapped(&self, a: Point, b: Point) -> Vec<(Point, f64)> {
        let h = a.dist(b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| {
                let p = a.add(b.sub(a).scale(0.5 * (t + 1.0)));
                (p, 0.5 * h * w)
            })
            .collect()
    }
}

impl TriangleRule {
    /// Physical nodes and area-weights on a triangle.
    pub fn mapped(&self, tri: &Triangle) -> Vec<(Point, f64)> {
        // reference area is 1/2, so the weight scale factor is 2*area
        let jac = (tri.b.sub(tri.a)).cross(tri.c.sub(tri.a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&(x, y), &w)| {
                let p = tri
                    .a
                    .add(tri.b.sub(tri.a).scale(x))
                    .add(tri.c.sub(tri.a).scale(y));
                (p, w * jac)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule() {
        let r = edge_quadrature(1);
        assert_eq!(r.nodes.len(), 1);
        assert!(r.nodes[0].abs() < 1e-15);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule_is_classical() {
        let r = edge_quadrature(3);
        assert_eq!(r.nodes.len(), 2);
        let inv_sqrt3 = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + inv_sqrt3).abs() < 1e-14);
        assert!((r.nodes[1] - inv_sqrt3).abs() < 1e-14);
        assert!((r.weights[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quartic_moment() {
        let r = edge_quadrature(4);
        let s: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| w * x.powi(4))
            .sum();
        assert!((s - 0.4).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_monomial_sweep() {
        for n in 1..20usize {
            let (x, w) = gauss_legendre(n);
            for d in 0..=(2 * n - 1) {
                let q: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(d as i32)).sum();
                let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
                assert!(
                    (q - exact).abs() < 1e-13,
                    "n={n} degree={d}: {q} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn lobatto_small_degrees() {
        assert_eq!(gauss_lobatto_nodes(1), vec![-1.0, 1.0]);
        let n2 = gauss_lobatto_nodes(2);
        assert_eq!(n2.len(), 3);
        assert!(n2[1].abs() < 1e-13);
        let n4 = gauss_lobatto_nodes(4);
        let r = (3f64 / 7f64).sqrt();
        assert!((n4[1] + r).abs() < 1e-12);
        assert!((n4[2]).abs() < 1e-12);
        assert!((n4[3] - r).abs() < 1e-12);
    }

    #[test]
    fn triangle_constant_and_xy() {
        let r = triangle_quadrature(2);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 0.5).abs() < 1e-14);
        let q: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(&(x, y), &w)| w * x * y)
            .sum();
        assert!((q - 1.0 / 24.0).abs() < 1e-14);
    }

    /// Oracle: reference-triangle monomial integrals are a! b! / (a+b+2)!.
    #[test]
    fn triangle_monomial_sweep() {
        fn exact(a: u32, b: u32) -> f64 {
            let fact = |m: u32| (1..=m as u64).product::<u64>() as f64;
            fact(a) * fact(b) / fact(a + b + 2)
        }
        for d in 0..=12usize {
            let r = triangle_quadrature(d);
            for a in 0..=d {
                for b in 0..=(d - a) {
                    let q: f64 = r
                        .nodes
                        .iter()
                        .zip(&r.weights)
                        .map(|(&(x, y), &w)| w * x.powi(a as i32) * y.powi(b as i32))
                        .sum();
                    let e = exact(a as u32, b as u32);
                    assert!(
                        (q - e).abs() < 1e-14,
                        "d={d} x^{a} y^{b}: {q} vs {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn mapped_edge_rule_integrates_arclength() {
        let r = edge_quadrature(2);
        let pts = r.mapped(Point::new(0.0, 0.0), Point::new(3.0, 4.0));
        let s: f64 = pts.iter().map(|&(_, w)| w).sum();
        assert!((s - 5.0).abs() < 1e-13);
    }
}
