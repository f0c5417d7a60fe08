//! Global system: DOF numbering over edges, non-conforming coupling, hp
//! degree vectors with the maximum rule, Dirichlet imposition via edge
//! moments, sparse assembly, solve and condition estimates.
//!
//! Every edge carries p_edge(e) moment DOFs shared verbatim by both adjacent
//! elements, which enforces the vanishing of jump moments across internal
//! edges by construction. Dirichlet data is eliminated: boundary DOFs are
//! fixed to the edge moments of g and moved to the right-hand side, leaving
//! an SPD interior block.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::{
    lambda_max_power, lambda_min_inverse, sym_eigenvalues_dense, CooMatrix, CsrMatrix,
    EnvelopeCholesky,
};
use crate::local::LocalElementSpace;
use crate::mesh::{LayerDecomposition, Mesh};
use crate::quadrature::{edge_quadrature, gauss_lobatto_nodes};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Per-element and per-edge polynomial degrees.
#[derive(Debug, Clone)]
pub struct DegreeVector {
    pub p_elem: Vec<usize>,
    pub p_edge: Vec<usize>,
}

impl DegreeVector {
    /// Uniform degree p everywhere.
    pub fn uniform(mesh: &Mesh, p: usize) -> Result<DegreeVector> {
        if p == 0 {
            return Err(Error::Parameter("degree must be at least 1".into()));
        }
        Ok(DegreeVector {
            p_elem: vec![p; mesh.n_elements()],
            p_edge: vec![p; mesh.n_edges()],
        })
    }

    /// Layer-graded degrees: 1 on layer 0 and max(1, ceil(mu (l+1))) on
    /// layer l, with edge degrees by the maximum rule.
    pub fn graded(mesh: &Mesh, layers: &LayerDecomposition, mu: f64) -> Result<DegreeVector> {
        if mu <= 0.0 {
            return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
        }
        let p_elem: Vec<usize> = layers
            .layer_of_element
            .iter()
            .map(|&l| {
                if l == 0 {
                    1
                } else {
                    ((mu * (l as f64 + 1.0)).ceil() as usize).max(1)
                }
            })
            .collect();
        Ok(Self::from_element_degrees(mesh, p_elem))
    }

    /// Edge degrees from element degrees by the maximum rule.
    pub fn from_element_degrees(mesh: &Mesh, p_elem: Vec<usize>) -> DegreeVector {
        assert_eq!(p_elem.len(), mesh.n_elements());
        let p_edge: Vec<usize> = mesh
            .edges
            .iter()
            .map(|e| e.elements.iter().map(|&k| p_elem[k]).max().unwrap())
            .collect();
        DegreeVector { p_elem, p_edge }
    }

    /// Global DOF offset of each edge plus the total count.
    pub fn edge_offsets(&self) -> (Vec<usize>, usize) {
        let mut offsets = Vec::with_capacity(self.p_edge.len());
        let mut acc = 0;
        for &p in &self.p_edge {
            offsets.push(acc);
            acc += p;
        }
        (offsets, acc)
    }

    pub fn n_dofs(&self) -> usize {
        self.p_edge.iter().sum()
    }

    pub fn max_degree(&self) -> usize {
        self.p_elem.iter().copied().max().unwrap_or(1)
    }
}

/// How Dirichlet edge moments are computed from the boundary datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirichletMode {
    /// Moments of g itself by over-integrated quadrature (default).
    ExactMoments,
    /// Moments of the Gauss-Lobatto interpolant of g of degree p.
    GaussLobattoInterp,
}

/// Geometric subdivision of [0,1] toward 0 used for integrands that are
/// singular at an edge endpoint: 3 rings of ratio 0.15.
fn graded_breakpoints() -> Vec<f64> {
    let ratio: f64 = 0.15;
    let rings = 3;
    let mut pts = vec![0.0];
    for k in (0..=rings).rev() {
        pts.push(ratio.powi(k));
    }
    pts
}

/// Scaled moments (1/h_e) int_e g m_r for one edge, optionally splitting
/// the quadrature geometrically toward a singular corner endpoint.
fn boundary_edge_moments(
    a: Point,
    b: Point,
    p: usize,
    g: &dyn Fn(Point) -> f64,
    singular_corner: Option<Point>,
) -> Vec<f64> {
    let h = a.dist(b);
    let rule = edge_quadrature(2 * p + 6);
    let basis = crate::basis::EdgeLegendreBasis::new(a, b, p);
    let corner_param = singular_corner.and_then(|c| {
        if c.dist(a) < 1e-12 * h.max(1.0) {
            Some(0.0)
        } else if c.dist(b) < 1e-12 * h.max(1.0) {
            Some(1.0)
        } else {
            None
        }
    });
    // pieces of [0,1] in edge parameter space
    let pieces: Vec<(f64, f64)> = match corner_param {
        None => vec![(0.0, 1.0)],
        Some(cp) => {
            let bp = graded_breakpoints();
            bp.windows(2)
                .map(|w| {
                    if cp == 0.0 {
                        (w[0], w[1])
                    } else {
                        (1.0 - w[1], 1.0 - w[0])
                    }
                })
                .collect()
        }
    };
    let mut out = vec![0.0; p];
    for &(s0, s1) in &pieces {
        let pa = a.add(b.sub(a).scale(s0));
        let pb = a.add(b.sub(a).scale(s1));
        for (x, w) in rule.mapped(pa, pb) {
            let gv = g(x);
            let t = basis.param_of(x);
            for (r, o) in out.iter_mut().enumerate() {
                *o += w * gv * basis.eval_param(r, t);
            }
        }
    }
    for o in &mut out {
        *o /= h;
    }
    out
}

/// Evaluates the Lagrange interpolant through (nodes, values) at t using
/// barycentric weights.
fn lagrange_eval(nodes: &[f64], values: &[f64], t: f64) -> f64 {
    let n = nodes.len();
    let mut weights = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                weights[i] /= nodes[i] - nodes[j];
            }
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let d = t - nodes[i];
        if d.abs() < 1e-14 {
            return values[i];
        }
        let w = weights[i] / d;
        num += w * values[i];
        den += w;
    }
    num / den
}

/// Dirichlet boundary DOF values: for each boundary edge the scaled moments
/// of g (or of its Gauss-Lobatto interpolant). Returns a full-length DOF
/// vector, zero at interior DOFs.
pub fn impose_dirichlet(
    mesh: &Mesh,
    degrees: &DegreeVector,
    g: &dyn Fn(Point) -> f64,
    mode: DirichletMode,
    singular_corner: Option<Point>,
) -> Vec<f64> {
    let (offsets, n_dofs) = degrees.edge_offsets();
    let mut values = vec![0.0; n_dofs];
    for (eid, edge) in mesh.edges.iter().enumerate() {
        if !edge.boundary {
            continue;
        }
        let p = degrees.p_edge[eid];
        let a = mesh.vertices[edge.v[0]];
        let b = mesh.vertices[edge.v[1]];
        let moments = match mode {
            DirichletMode::ExactMoments => boundary_edge_moments(a, b, p, g, singular_corner),
            DirichletMode::GaussLobattoInterp => {
                let nodes = gauss_lobatto_nodes(p);
                let basis = crate::basis::EdgeLegendreBasis::new(a, b, p);
                let gvals: Vec<f64> = nodes.iter().map(|&t| g(basis.point_at(t))).collect();
                let gp = move |x: Point| lagrange_eval(&nodes, &gvals, basis.param_of(x));
                boundary_edge_moments(a, b, p, &gp, None)
            }
        };
        values[offsets[eid]..offsets[eid] + p].copy_from_slice(&moments);
    }
    values
}

/// Assembled global system with Dirichlet data eliminated.
pub struct GlobalSystem {
    pub degrees: DegreeVector,
    pub edge_offsets: Vec<usize>,
    pub n_dofs: usize,
    /// Full symmetric stiffness matrix (no boundary elimination).
    pub a_full: CsrMatrix,
    /// Global indices of interior (internal-edge) DOFs.
    pub interior: Vec<usize>,
    /// Global indices of boundary DOFs.
    pub boundary: Vec<usize>,
    /// Imposed values at all DOFs (zero at interior positions).
    pub boundary_values: Vec<f64>,
    /// Interior block, SPD.
    pub a_interior: CsrMatrix,
    /// Right-hand side of the interior system.
    pub rhs: Vec<f64>,
    /// Per-element projector matrices Pi* (bulk coefficients per local DOF).
    pub pi_stars: Vec<DMatrix<f64>>,
    /// Per-element local-to-global DOF maps.
    pub elem_dofs: Vec<Vec<usize>>,
    /// Worst local G condition estimate seen during assembly.
    pub worst_g_condition: f64,
}

/// Discrete solution: the global DOF vector plus the projected harmonic
/// polynomial coefficients per element.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub dofs: Vec<f64>,
    /// 2p+1 bulk-basis coefficients of the H1 projection, per element.
    pub elem_coeffs: Vec<Vec<f64>>,
    pub p_elem: Vec<usize>,
    /// Relative residual of the interior solve.
    pub residual: f64,
}

/// Assembles the global stiffness matrix and the Dirichlet-reduced interior
/// system. `boundary_values` comes from [`impose_dirichlet`].
pub fn assemble(
    mesh: &Mesh,
    degrees: &DegreeVector,
    boundary_values: &[f64],
) -> Result<GlobalSystem> {
    let (edge_offsets, n_dofs) = degrees.edge_offsets();
    if boundary_values.len() != n_dofs {
        return Err(Error::Parameter(
            "boundary value vector length does not match the DOF count".into(),
        ));
    }
    // local matrices in parallel, deterministic scatter in element order
    type LocalPiece = (Vec<usize>, DMatrix<f64>, DMatrix<f64>, f64);
    let locals: Vec<LocalPiece> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|k| {
            let edge_ids = &mesh.element_edges[k];
            let edge_p: Vec<usize> = edge_ids.iter().map(|&e| degrees.p_edge[e]).collect();
            let space = LocalElementSpace::on_element(mesh, k, &edge_p, degrees.p_elem[k]);
            let m = space.build_matrices()?;
            let mut gmap = Vec::with_capacity(space.n_dofs);
            for (j, &eid) in edge_ids.iter().enumerate() {
                for r in 0..space.edges[j].p {
                    gmap.push(edge_offsets[eid] + r);
                }
            }
            Ok((gmap, m.a_local, m.pi_star, space.g_condition()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut coo = CooMatrix::new(n_dofs);
    let mut pi_stars = Vec::with_capacity(mesh.n_elements());
    let mut elem_dofs = Vec::with_capacity(mesh.n_elements());
    let mut worst_g_condition: f64 = 0.0;
    for (gmap, a_local, pi_star, gcond) in locals {
        for (i, &gi) in gmap.iter().enumerate() {
            for (j, &gj) in gmap.iter().enumerate() {
                coo.push(gi, gj, a_local[(i, j)]);
            }
        }
        pi_stars.push(pi_star);
        elem_dofs.push(gmap);
        worst_g_condition = worst_g_condition.max(gcond);
    }
    if worst_g_condition > 1e12 {
        eprintln!(
            "warning: local projector system is ill-conditioned (cond(G) ~ {worst_g_condition:.2e})"
        );
    }
    let a_full = coo.to_csr();

    let mut is_boundary = vec![false; n_dofs];
    for (eid, edge) in mesh.edges.iter().enumerate() {
        if edge.boundary {
            for r in 0..degrees.p_edge[eid] {
                is_boundary[edge_offsets[eid] + r] = true;
            }
        }
    }
    let interior: Vec<usize> = (0..n_dofs).filter(|&i| !is_boundary[i]).collect();
    let boundary: Vec<usize> = (0..n_dofs).filter(|&i| is_boundary[i]).collect();
    let mut global_to_interior = vec![usize::MAX; n_dofs];
    for (ii, &gi) in interior.iter().enumerate() {
        global_to_interior[gi] = ii;
    }
    // interior block and rhs = -A[interior, boundary] g_b
    let mut coo_int = CooMatrix::new(interior.len());
    let mut rhs = vec![0.0; interior.len()];
    for (ii, &gi) in interior.iter().enumerate() {
        for k in a_full.row_ptr[gi]..a_full.row_ptr[gi + 1] {
            let gj = a_full.cols[k];
            let v = a_full.vals[k];
            if is_boundary[gj] {
                rhs[ii] -= v * boundary_values[gj];
            } else {
                coo_int.push(ii, global_to_interior[gj], v);
            }
        }
    }
    Ok(GlobalSystem {
        degrees: degrees.clone(),
        edge_offsets,
        n_dofs,
        a_full,
        interior,
        boundary,
        boundary_values: boundary_values.to_vec(),
        a_interior: coo_int.to_csr(),
        rhs,
        pi_stars,
        elem_dofs,
        worst_g_condition,
    })
}

/// Solves the interior system by sparse Cholesky and extracts the
/// per-element projection coefficients.
pub fn solve(system: &GlobalSystem) -> Result<DiscreteSolution> {
    let mut dofs = system.boundary_values.clone();
    let residual = if system.interior.is_empty() {
        0.0
    } else {
        let chol = EnvelopeCholesky::factor(&system.a_interior).map_err(|e| {
            Error::Numerical(format!("interior block is not SPD ({e}); broken mesh or degrees"))
        })?;
        let x = chol.solve(&system.rhs);
        for (ii, &gi) in system.interior.iter().enumerate() {
            dofs[gi] = x[ii];
        }
        system.a_interior.rel_residual(&x, &system.rhs)
    };
    let mut elem_coeffs = Vec::with_capacity(system.pi_stars.len());
    for (pi_star, gmap) in system.pi_stars.iter().zip(&system.elem_dofs) {
        let local = nalgebra::DVector::from_iterator(gmap.len(), gmap.iter().map(|&g| dofs[g]));
        let coeffs = pi_star * local;
        elem_coeffs.push(coeffs.iter().copied().collect());
    }
    Ok(DiscreteSolution {
        dofs,
        elem_coeffs,
        p_elem: system.degrees.p_elem.clone(),
        residual,
    })
}

/// 2-norm condition numbers of the stiffness matrix.
#[derive(Debug, Clone, Copy)]
pub struct CondEstimate {
    /// Full matrix, smallest eigenvalue taken over the non-kernel modes
    /// (the constant function spans the kernel before elimination).
    pub full: f64,
    /// Plain SPD condition of the interior block.
    pub interior: f64,
}

fn warn_unconverged(label: &str, estimates: &[crate::linalg::EigEstimate]) {
    for e in estimates {
        if !e.converged {
            eprintln!(
                "warning: eigenvalue iteration for the {label} condition number stopped at relative change {:.1e}",
                e.achieved_tol
            );
        }
    }
}

/// DOF vector of the constant function 1: the r=0 moment on every edge.
pub fn constant_dof_vector(system: &GlobalSystem) -> Vec<f64> {
    let mut v = vec![0.0; system.n_dofs];
    for (eid, &off) in system.edge_offsets.iter().enumerate() {
        let _ = eid;
        v[off] = 1.0;
    }
    v
}

/// Estimates both condition numbers: dense symmetric eigendecomposition up
/// to n = 2000, power/inverse iteration beyond.
pub fn condition_estimate(system: &GlobalSystem) -> Result<CondEstimate> {
    condition_estimate_with_threshold(system, 2000)
}

/// Condition estimate with a custom dense/iterative crossover size.
pub fn condition_estimate_with_threshold(
    system: &GlobalSystem,
    dense_threshold: usize,
) -> Result<CondEstimate> {
    let full = if system.n_dofs <= dense_threshold {
        let ev = sym_eigenvalues_dense(&system.a_full);
        let lmax = *ev.last().unwrap();
        let lmin_pos = ev
            .iter()
            .copied()
            .find(|&l| l > 1e-10 * lmax)
            .ok_or_else(|| Error::Numerical("full matrix has no positive spectrum".into()))?;
        lmax / lmin_pos
    } else {
        let kernel = constant_dof_vector(system);
        let lmax = lambda_max_power(&system.a_full, Some(&kernel), 1e-9, 20_000);
        // shifted SPD factorization for the inverse iteration
        let mut coo = CooMatrix::new(system.n_dofs);
        let shift = 1e-10 * lmax.value;
        for i in 0..system.n_dofs {
            coo.push(i, i, shift);
            for k in system.a_full.row_ptr[i]..system.a_full.row_ptr[i + 1] {
                coo.push(i, system.a_full.cols[k], system.a_full.vals[k]);
            }
        }
        let chol = EnvelopeCholesky::factor(&coo.to_csr())?;
        let lmin = lambda_min_inverse(&system.a_full, &chol, Some(&kernel), 1e-9, 20_000);
        warn_unconverged("full stiffness", &[lmax, lmin]);
        lmax.value / lmin.value
    };
    let interior = if system.interior.is_empty() {
        1.0
    } else if system.interior.len() <= dense_threshold {
        let ev = sym_eigenvalues_dense(&system.a_interior);
        ev.last().unwrap() / ev[0]
    } else {
        let lmax = lambda_max_power(&system.a_interior, None, 1e-9, 20_000);
        let chol = EnvelopeCholesky::factor(&system.a_interior)?;
        let lmin = lambda_min_inverse(&system.a_interior, &chol, None, 1e-9, 20_000);
        warn_unconverged("interior block", &[lmax, lmin]);
        lmax.value / lmin.value
    };
    Ok(CondEstimate { full, interior })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_cartesian, generate_graded_lshape, GradedFamily};

    fn square_mesh(n: usize) -> Mesh {
        generate_cartesian(n, Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap()
    }

    #[test]
    fn uniform_degree_vector() {
        let m = square_mesh(2);
        let d = DegreeVector::uniform(&m, 3).unwrap();
        assert!(d.p_edge.iter().all(|&p| p == 3));
        assert_eq!(d.n_dofs(), 36);
        assert!(DegreeVector::uniform(&m, 0).is_err());
    }

    #[test]
    fn graded_degrees_follow_layer_formula() {
        let (m, layers) = generate_graded_lshape(2, 0.5, GradedFamily::B).unwrap();
        let d = DegreeVector::graded(&m, &layers, 1.0).unwrap();
        for (k, &l) in layers.layer_of_element.iter().enumerate() {
            let expect = if l == 0 { 1 } else { l + 1 };
            assert_eq!(d.p_elem[k], expect, "layer {l}");
        }
    }

    #[test]
    fn maximum_rule_on_shared_edges() {
        let m = square_mesh(2);
        // left column degree 2, right column degree 3
        let p_elem = vec![2, 3, 2, 3];
        let d = DegreeVector::from_element_degrees(&m, p_elem);
        for (eid, edge) in m.edges.iter().enumerate() {
            let expect = edge.elements.iter().map(|&k| d.p_elem[k]).max().unwrap();
            assert_eq!(d.p_edge[eid], expect);
        }
        // at least one internal edge mixes 2 and 3 and must get 3
        let mixed = m
            .edges
            .iter()
            .enumerate()
            .find(|(_, e)| {
                e.elements.len() == 2
                    && d.p_elem[e.elements[0]] != d.p_elem[e.elements[1]]
            })
            .map(|(eid, _)| eid)
            .unwrap();
        assert_eq!(d.p_edge[mixed], 3);
    }

    #[test]
    fn dirichlet_constant_and_legendre_trace() {
        let m = square_mesh(1);
        let d = DegreeVector::uniform(&m, 3).unwrap();
        let vals = impose_dirichlet(&m, &d, &|_| 1.0, DirichletMode::ExactMoments, None);
        let (offsets, _) = d.edge_offsets();
        for (eid, edge) in m.edges.iter().enumerate() {
            assert!(edge.boundary);
            assert!((vals[offsets[eid]] - 1.0).abs() < 1e-14);
            assert!(vals[offsets[eid] + 1].abs() < 1e-14);
            assert!(vals[offsets[eid] + 2].abs() < 1e-14);
        }
        // trace of m_1 on one edge: moments (0, 1/3, 0) since dof uses 1/h
        // scaling while the projection coefficient carries (2r+1)
        let e0 = &m.edges[0];
        let basis = crate::basis::EdgeLegendreBasis::new(
            m.vertices[e0.v[0]],
            m.vertices[e0.v[1]],
            3,
        );
        let b2 = basis.clone();
        let vals = impose_dirichlet(
            &m,
            &d,
            &move |x| {
                // m_1 on edge 0, zero elsewhere
                if b2.eval(0, x).is_ok() {
                    b2.eval_param(1, b2.param_of(x))
                } else {
                    0.0
                }
            },
            DirichletMode::ExactMoments,
            None,
        );
        assert!(vals[offsets[0]].abs() < 1e-13);
        assert!((vals[offsets[0] + 1] - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_lobatto_mode_converges_superalgebraically() {
        let m = square_mesh(1);
        let g = |x: Point| (x.x).exp() * (x.y).sin();
        let mut diffs = Vec::new();
        for p in 2..=10 {
            let d = DegreeVector::uniform(&m, p).unwrap();
            let exact = impose_dirichlet(&m, &d, &g, DirichletMode::ExactMoments, None);
            let interp = impose_dirichlet(&m, &d, &g, DirichletMode::GaussLobattoInterp, None);
            let diff = exact
                .iter()
                .zip(&interp)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            diffs.push(diff);
        }
        assert!(diffs[8] < 1e-10, "p=10 difference {}", diffs[8]);
        assert!(diffs[8] < diffs[0] * 1e-4);
    }

    #[test]
    fn interior_block_size_counts_internal_edges() {
        let m = square_mesh(2);
        let d = DegreeVector::uniform(&m, 1).unwrap();
        let bc = impose_dirichlet(&m, &d, &|_| 0.0, DirichletMode::ExactMoments, None);
        let sys = assemble(&m, &d, &bc).unwrap();
        assert_eq!(sys.interior.len(), 4);
        assert_eq!(sys.n_dofs, 12);
    }

    #[test]
    fn assembled_matrix_is_exactly_symmetric() {
        let m = square_mesh(3);
        let d = DegreeVector::uniform(&m, 2).unwrap();
        let bc = impose_dirichlet(&m, &d, &|x| x.x, DirichletMode::ExactMoments, None);
        let sys = assemble(&m, &d, &bc).unwrap();
        assert_eq!(sys.a_full.max_asymmetry(), 0.0);
        assert_eq!(sys.a_interior.max_asymmetry(), 0.0);
    }

    #[test]
    fn constant_solution_is_reproduced() {
        for p in [1usize, 3] {
            let m = square_mesh(2);
            let d = DegreeVector::uniform(&m, p).unwrap();
            let bc = impose_dirichlet(&m, &d, &|_| 2.5, DirichletMode::ExactMoments, None);
            let sys = assemble(&m, &d, &bc).unwrap();
            let sol = solve(&sys).unwrap();
            // all zeroth moments 2.5, higher moments 0
            for (eid, &off) in sys.edge_offsets.iter().enumerate() {
                assert!((sol.dofs[off] - 2.5).abs() < 1e-11);
                for r in 1..d.p_edge[eid] {
                    assert!(sol.dofs[off + r].abs() < 1e-11);
                }
            }
            // projection coefficients: constant coefficient 2.5, rest 0
            for c in &sol.elem_coeffs {
                assert!((c[0] - 2.5).abs() < 1e-11);
                for v in &c[1..] {
                    assert!(v.abs() < 1e-11);
                }
            }
            assert!(sol.residual < 1e-12);
        }
    }

    /// Quadratic form of the assembled matrix on DOFs of a global harmonic
    /// polynomial equals the broken Dirichlet energy (consistency summed
    /// over elements).
    #[test]
    fn global_consistency_with_harmonic_polynomial() {
        let m = square_mesh(2);
        let p = 3;
        let d = DegreeVector::uniform(&m, p).unwrap();
        let bc = vec![0.0; d.n_dofs()];
        let sys = assemble(&m, &d, &bc).unwrap();
        // q(x,y) = Re((x+iy)^3) = x^3 - 3 x y^2, harmonic of degree 3
        let q = |x: Point| x.x.powi(3) - 3.0 * x.x * x.y * x.y;
        let gq = |x: Point| Point::new(3.0 * x.x * x.x - 3.0 * x.y * x.y, -6.0 * x.x * x.y);
        // exact DOFs of q
        let (offsets, n) = d.edge_offsets();
        let mut dofs = vec![0.0; n];
        for (eid, edge) in m.edges.iter().enumerate() {
            let basis = crate::basis::EdgeLegendreBasis::new(
                m.vertices[edge.v[0]],
                m.vertices[edge.v[1]],
                p,
            );
            let mom = crate::local::edge_dof_moments(&basis, &q, 6);
            dofs[offsets[eid]..offsets[eid] + p].copy_from_slice(&mom);
        }
        let mut adofs = vec![0.0; n];
        sys.a_full.matvec(&dofs, &mut adofs);
        let quad: f64 = dofs.iter().zip(&adofs).map(|(a, b)| a * b).sum();
        // exact energy over the unit square by quadrature
        let rule = crate::quadrature::triangle_quadrature(2 * p + 2);
        let mut exact = 0.0;
        for k in 0..m.n_elements() {
            for tri in m.sub_triangulate(k) {
                for (x, w) in rule.mapped(&tri) {
                    let g = gq(x);
                    exact += w * g.dot(g);
                }
            }
        }
        assert!(
            (quad - exact).abs() < 1e-10 * exact,
            "{quad} vs {exact}"
        );
    }

    #[test]
    fn condition_estimates_on_small_matrices() {
        // identity
        let mut coo = CooMatrix::new(3);
        for i in 0..3 {
            coo.push(i, i, 1.0);
        }
        let ev = sym_eigenvalues_dense(&coo.to_csr());
        assert!((ev[2] / ev[0] - 1.0).abs() < 1e-13);
        // diag(1, 10)
        let mut coo = CooMatrix::new(2);
        coo.push(0, 0, 1.0);
        coo.push(1, 1, 10.0);
        let ev = sym_eigenvalues_dense(&coo.to_csr());
        assert!((ev[1] / ev[0] - 10.0).abs() < 1e-13);
    }

    /// One global index per (edge, moment): offsets partition the DOF range.
    #[test]
    fn dof_map_is_a_partition() {
        let (m, layers) = generate_graded_lshape(2, 0.5, GradedFamily::A).unwrap();
        let d = DegreeVector::graded(&m, &layers, 1.0).unwrap();
        let (offsets, n) = d.edge_offsets();
        assert_eq!(n, d.n_dofs());
        let mut seen = vec![false; n];
        for (eid, &off) in offsets.iter().enumerate() {
            for r in 0..d.p_edge[eid] {
                assert!(!seen[off + r]);
                seen[off + r] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    /// Permuting the element order leaves the per-element projection
    /// coefficients unchanged up to roundoff.
    #[test]
    fn element_order_independence() {
        let m = square_mesh(2);
        let perm: Vec<usize> = vec![3, 1, 0, 2];
        let elements_perm: Vec<Vec<usize>> = perm.iter().map(|&k| m.elements[k].clone()).collect();
        let m2 = Mesh::new(m.vertices.clone(), elements_perm).unwrap();
        let g = |x: Point| x.x * x.x - x.y * x.y;
        let run = |mesh: &Mesh| -> Vec<Vec<f64>> {
            let d = DegreeVector::uniform(mesh, 2).unwrap();
            let bc = impose_dirichlet(mesh, &d, &g, DirichletMode::ExactMoments, None);
            let sys = assemble(mesh, &d, &bc).unwrap();
            solve(&sys).unwrap().elem_coeffs
        };
        let c1 = run(&m);
        let c2 = run(&m2);
        for (k, &pk) in perm.iter().enumerate() {
            for (a, b) in c1[pk].iter().zip(&c2[k]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
