//! Per-element spaces: DOF layout, the edge L2 and bulk H1 projectors, and
//! the matrices behind the local discrete bilinear form.
//!
//! The local virtual space on a polygon K consists of harmonic functions
//! whose normal derivative on edge e is a polynomial of degree p_e - 1; its
//! DOFs are the scaled Legendre edge moments (1/h_e) int_e v m_r. With
//! the matrices
//!
//! * D[(j,r), a] = dof_{j,r}(q_a)                    (DOFs of the bulk basis),
//! * G[0, a]     = int_{dK} q_a,  G[b, a] = (grad q_a, grad q_b)_K,
//! * B[0, (j,r)] = h_j delta_{r0},  B[b, (j,r)] = (grad phi_{j,r}, grad q_b)_K,
//!
//! the H1 projector onto harmonic polynomials is Pi* = G^{-1} B in the bulk
//! basis and Pi = D Pi* in the DOF basis, and the local stiffness matrix is
//! Pi*^T Gt Pi* + (I - Pi)^T S (I - Pi), where Gt is G with its first
//! (mean-value) row zeroed and S is the diagonal stabilization.
//!
//! Every bulk integral is reduced to the boundary through harmonicity, so
//! no area quadrature appears here at all; canonical basis functions are
//! never evaluated pointwise.

use crate::basis::{EdgeLegendreBasis, HarmonicBasis};
use crate::error::{Error, Result};
use crate::geometry::{centroid, diameter, Point};
use crate::mesh::Mesh;
use crate::quadrature::{edge_quadrature, EdgeRule};
use nalgebra::DMatrix;

/// One edge of a local element space.
#[derive(Debug, Clone)]
pub struct LocalEdge {
    /// Legendre basis in the canonical (mesh-wide) orientation of the edge.
    pub basis: EdgeLegendreBasis,
    /// Outward unit normal of this element on the edge.
    pub normal: Point,
    /// Number of moments carried by the edge.
    pub p: usize,
}

/// DOF layout and bases of the local virtual element space on one polygon.
#[derive(Debug, Clone)]
pub struct LocalElementSpace {
    pub edges: Vec<LocalEdge>,
    /// Bulk harmonic basis of degree p (dimension 2p+1).
    pub harmonic: HarmonicBasis,
    /// Local DOF offset of each edge; DOF (j, r) sits at offsets[j] + r.
    pub offsets: Vec<usize>,
    pub n_dofs: usize,
}

impl LocalElementSpace {
    /// Uniform-degree space on a standalone polygon (CCW).
    pub fn from_polygon(poly: &[Point], p: usize) -> Self {
        let degrees = vec![p; poly.len()];
        Self::from_polygon_with_degrees(poly, &degrees, p)
    }

    /// Space with per-edge moment counts and a given bulk degree. Edge
    /// orientation follows the polygon traversal.
    pub fn from_polygon_with_degrees(poly: &[Point], edge_p: &[usize], bulk_p: usize) -> Self {
        assert_eq!(poly.len(), edge_p.len());
        assert!(bulk_p >= 1 && edge_p.iter().all(|&p| p >= 1));
        let n = poly.len();
        let edges: Vec<LocalEdge> = (0..n)
            .map(|i| {
                let a = poly[i];
                let b = poly[(i + 1) % n];
                let t = b.sub(a);
                let len = t.norm();
                LocalEdge {
                    basis: EdgeLegendreBasis::new(a, b, edge_p[i]),
                    normal: Point::new(t.y / len, -t.x / len),
                    p: edge_p[i],
                }
            })
            .collect();
        Self::assemble(poly, edges, bulk_p)
    }

    /// Space of a mesh element. Edges use the mesh-canonical orientation so
    /// that moments are single-valued across neighbouring elements.
    pub fn on_element(mesh: &Mesh, k: usize, edge_p: &[usize], bulk_p: usize) -> Self {
        let loop_ = &mesh.elements[k];
        let n = loop_.len();
        assert_eq!(n, edge_p.len());
        let poly = mesh.element_polygon(k);
        let edges: Vec<LocalEdge> = (0..n)
            .map(|i| {
                let va = loop_[i];
                let vb = loop_[(i + 1) % n];
                let a = mesh.vertices[va];
                let b = mesh.vertices[vb];
                let t = b.sub(a);
                let len = t.norm();
                // canonical orientation: lower vertex index first
                let (ca, cb) = if va < vb { (a, b) } else { (b, a) };
                LocalEdge {
                    basis: EdgeLegendreBasis::new(ca, cb, edge_p[i]),
                    normal: Point::new(t.y / len, -t.x / len),
                    p: edge_p[i],
                }
            })
            .collect();
        Self::assemble(&poly, edges, bulk_p)
    }

    fn assemble(poly: &[Point], edges: Vec<LocalEdge>, bulk_p: usize) -> Self {
        let mut offsets = Vec::with_capacity(edges.len());
        let mut acc = 0;
        for e in &edges {
            offsets.push(acc);
            acc += e.p;
        }
        LocalElementSpace {
            harmonic: HarmonicBasis::new(centroid(poly), diameter(poly), bulk_p),
            edges,
            offsets,
            n_dofs: acc,
        }
    }

    /// Dimension 2p+1 of the bulk harmonic space.
    pub fn bulk_dim(&self) -> usize {
        self.harmonic.dim()
    }

    fn quad_rule(&self) -> EdgeRule {
        let pmax = self
            .edges
            .iter()
            .map(|e| e.p)
            .max()
            .unwrap()
            .max(self.harmonic.p);
        edge_quadrature(2 * pmax)
    }

    /// D[(j,r), a] = (1/h_e) int_e q_a m_r ds.
    pub fn compute_d(&self) -> DMatrix<f64> {
        self.compute_d_with_rule(&self.quad_rule())
    }

    /// Same as [`compute_d`](Self::compute_d) with an explicit rule
    /// (used by the over-integration oracle in tests).
    pub fn compute_d_with_rule(&self, rule: &EdgeRule) -> DMatrix<f64> {
        let dim = self.bulk_dim();
        let mut d = DMatrix::zeros(self.n_dofs, dim);
        for (j, edge) in self.edges.iter().enumerate() {
            let pts = rule.mapped(edge.basis.a, edge.basis.b);
            for alpha in 1..=dim {
                for r in 0..edge.p {
                    let mut acc = 0.0;
                    for (&t, &(x, w)) in rule.nodes.iter().zip(&pts) {
                        acc += w * self.harmonic.value(alpha, x) * edge.basis.eval_param(r, t);
                    }
                    d[(self.offsets[j] + r, alpha - 1)] = acc / edge.basis.h_e;
                }
            }
        }
        d
    }

    /// G: first row int_{dK} q_a ds, remaining rows the stiffness couples
    /// (grad q_a, grad q_b)_K computed as boundary integrals of the normal
    /// derivative (exact since the basis is harmonic).
    pub fn compute_g(&self) -> DMatrix<f64> {
        let dim = self.bulk_dim();
        let rule = self.quad_rule();
        let mut g = DMatrix::zeros(dim, dim);
        for edge in &self.edges {
            let pts = rule.mapped(edge.basis.a, edge.basis.b);
            for &(x, w) in &pts {
                let evals: Vec<(f64, Point)> =
                    (1..=dim).map(|a| self.harmonic.eval(a, x)).collect();
                for (a, &(va, _)) in evals.iter().enumerate() {
                    g[(0, a)] += w * va;
                }
                for b in 1..dim {
                    let dn_b = evals[b].1.dot(edge.normal);
                    for a in b..dim {
                        g[(b, a)] += w * dn_b * evals[a].0;
                    }
                }
            }
        }
        // mirror the strictly upper stiffness block; column 0 of those rows
        // is exactly zero because grad q_1 = 0
        for b in 1..dim {
            for a in (b + 1)..dim {
                g[(a, b)] = g[(b, a)];
            }
        }
        g
    }

    /// B: first row h_j delta_{r0}; remaining rows from the Legendre
    /// expansion of the normal derivative of q_b on each edge,
    /// B[b, (j,r)] = (2r+1) int_e (dq_b/dn) m_r ds.
    pub fn compute_b(&self) -> DMatrix<f64> {
        let dim = self.bulk_dim();
        let rule = self.quad_rule();
        let mut bm = DMatrix::zeros(dim, self.n_dofs);
        for (j, edge) in self.edges.iter().enumerate() {
            bm[(0, self.offsets[j])] = edge.basis.h_e;
            let pts = rule.mapped(edge.basis.a, edge.basis.b);
            for beta in 1..dim {
                for r in 0..edge.p {
                    let mut acc = 0.0;
                    for (&t, &(x, w)) in rule.nodes.iter().zip(&pts) {
                        let dn = self.harmonic.gradient(beta + 1, x).dot(edge.normal);
                        acc += w * dn * edge.basis.eval_param(r, t);
                    }
                    bm[(beta, self.offsets[j] + r)] = (2.0 * r as f64 + 1.0) * acc;
                }
            }
        }
        bm
    }

    /// Diagonal stabilization: the edge projection form
    /// sum_e (p / h_e) (Pi^e u, Pi^e v)_e collapses to the diagonal matrix
    /// with entries p (2r+1) in the Legendre moment basis.
    pub fn compute_s(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.n_dofs, self.n_dofs);
        let weight = self.harmonic.p as f64;
        for (j, edge) in self.edges.iter().enumerate() {
            for r in 0..edge.p {
                let i = self.offsets[j] + r;
                s[(i, i)] = weight * (2.0 * r as f64 + 1.0);
            }
        }
        s
    }

    /// Matrix of the H1 projector in the bulk basis: Pi* = G^{-1} B.
    pub fn pi_star(&self) -> Result<DMatrix<f64>> {
        let g = self.compute_g();
        let b = self.compute_b();
        g.lu()
            .solve(&b)
            .ok_or_else(|| Error::Numerical("singular G matrix (degenerate element)".into()))
    }

    /// Estimated 2-norm condition number of G.
    pub fn g_condition(&self) -> f64 {
        let svd = self.compute_g().svd(false, false);
        let max = svd.singular_values.max();
        let min = svd.singular_values.min();
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }

    /// All local matrices and the local stiffness matrix.
    pub fn build_matrices(&self) -> Result<ProjectionMatrices> {
        let d = self.compute_d();
        let g = self.compute_g();
        let b = self.compute_b();
        let s = self.compute_s();
        let pi_star = g
            .clone()
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Numerical("singular G matrix (degenerate element)".into()))?;
        let pi = &d * &pi_star;
        let mut g_tilde = g.clone();
        for a in 0..g_tilde.ncols() {
            g_tilde[(0, a)] = 0.0;
        }
        let n = self.n_dofs;
        let consistency = pi_star.transpose() * &g_tilde * &pi_star;
        let i_minus_pi = DMatrix::identity(n, n) - &pi;
        let stability = i_minus_pi.transpose() * &s * &i_minus_pi;
        let mut a_local = consistency + stability;
        // enforce exact symmetry; the blocks are symmetric up to roundoff
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (a_local[(i, j)] + a_local[(j, i)]);
                a_local[(i, j)] = v;
                a_local[(j, i)] = v;
            }
        }
        Ok(ProjectionMatrices {
            d,
            g,
            b,
            s,
            pi_star,
            pi,
            a_local,
        })
    }

    /// Local stiffness matrix only.
    pub fn local_stiffness(&self) -> Result<DMatrix<f64>> {
        Ok(self.build_matrices()?.a_local)
    }

    /// DOF vector of a smooth function: all scaled edge moments.
    pub fn dofs_of(&self, f: impl Fn(Point) -> f64, extra_exactness: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs];
        for (j, edge) in self.edges.iter().enumerate() {
            let m = edge_dof_moments(&edge.basis, &f, extra_exactness);
            out[self.offsets[j]..self.offsets[j] + edge.p].copy_from_slice(&m);
        }
        out
    }
}

/// The matrices of the local discrete bilinear form.
#[derive(Debug, Clone)]
pub struct ProjectionMatrices {
    pub d: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub s: DMatrix<f64>,
    /// G^{-1} B: bulk-basis coefficients of the projection of each canonical
    /// basis function.
    pub pi_star: DMatrix<f64>,
    /// D G^{-1} B: the projector expressed DOFs-to-DOFs.
    pub pi: DMatrix<f64>,
    pub a_local: DMatrix<f64>,
}

/// Scaled moments (1/h_e) int_e f m_r ds of a function against the edge
/// Legendre basis, via Gauss quadrature of exactness 2p + extra.
pub fn edge_dof_moments(
    basis: &EdgeLegendreBasis,
    f: &impl Fn(Point) -> f64,
    extra_exactness: usize,
) -> Vec<f64> {
    let rule = edge_quadrature(2 * basis.p + extra_exactness);
    let pts = rule.mapped(basis.a, basis.b);
    let mut out = vec![0.0; basis.p];
    for (&t, &(x, w)) in rule.nodes.iter().zip(&pts) {
        let fv = f(x);
        for (r, o) in out.iter_mut().enumerate() {
            *o += w * fv * basis.eval_param(r, t);
        }
    }
    for o in &mut out {
        *o /= basis.h_e;
    }
    out
}

/// L2 projection of a function onto the edge polynomial space: Legendre
/// coefficients c_r = (2r+1)/h_e int_e f m_r ds.
pub fn edge_l2_project(
    basis: &EdgeLegendreBasis,
    f: &impl Fn(Point) -> f64,
    extra_exactness: usize,
) -> Vec<f64> {
    edge_dof_moments(basis, f, extra_exactness)
        .into_iter()
        .enumerate()
        .map(|(r, m)| (2.0 * r as f64 + 1.0) * m)
        .collect()
}
