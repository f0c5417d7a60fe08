//! Computable error norms, convergence studies (h-, p- and hp-versions)
//! and least-squares rate fitting.
//!
//! Since the virtual basis functions are never available pointwise, errors
//! are measured against the elementwise H1 projection of the discrete
//! solution: relative L2 error ||u - Pi u_n|| / ||u|| and relative broken
//! H1 error |u - Pi u_n|_{1,mesh} / ||u||_{1}.

mod reference;

pub use reference::{
    constant, custom_on_mesh, domain_norms, graded_triangles, reference, u1, u2, u3,
    unit_square_polygon, ReferenceSolution, Regularity,
};

use crate::assembly::{
    assemble, condition_estimate_with_threshold, impose_dirichlet, solve, DegreeVector,
    DirichletMode,
};
use crate::basis::HarmonicBasis;
use crate::error::{Error, Result};
use crate::geometry::{centroid, diameter, Point};
use crate::mesh::{
    generate_cartesian, generate_graded_lshape, generate_voronoi_lloyd, GradedFamily, Mesh,
};
use crate::quadrature::triangle_quadrature;

/// Absolute and relative errors of a discrete solution.
#[derive(Debug, Clone, Copy)]
pub struct ErrorMeasures {
    pub rel_l2: f64,
    pub rel_h1: f64,
    pub abs_l2: f64,
    /// Broken H1 seminorm of u - Pi u_n.
    pub abs_h1_semi: f64,
}

/// Errors of the projected discrete solution against a reference.
///
/// Element integrals use the sub-triangulation with quadrature of exactness
/// 2p+6, geometrically refined toward the reference's singular corner. The
/// H1 numerator is the broken seminorm; the normalization uses the full
/// H1 norm of the reference.
pub fn compute_errors(
    mesh: &Mesh,
    solution: &crate::assembly::DiscreteSolution,
    reference: &ReferenceSolution,
) -> ErrorMeasures {
    compute_errors_with_extra_exactness(mesh, solution, reference, 0)
}

/// Same with additional quadrature exactness (quadrature-stability oracle).
pub fn compute_errors_with_extra_exactness(
    mesh: &Mesh,
    solution: &crate::assembly::DiscreteSolution,
    reference: &ReferenceSolution,
    extra: usize,
) -> ErrorMeasures {
    let scale = mesh.max_diameter();
    let mut l2sq = 0.0;
    let mut h1sq = 0.0;
    for k in 0..mesh.n_elements() {
        let p = solution.p_elem[k];
        let poly = mesh.element_polygon(k);
        let basis = HarmonicBasis::new(centroid(&poly), diameter(&poly), p);
        let coeffs = &solution.elem_coeffs[k];
        let rule = triangle_quadrature(2 * p + 6 + extra);
        for tri in mesh.sub_triangulate(k) {
            for piece in graded_triangles(&tri, reference.singular_corner, scale) {
                for (x, w) in rule.mapped(&piece) {
                    let mut v = 0.0;
                    let mut g = Point::new(0.0, 0.0);
                    for (alpha, &c) in coeffs.iter().enumerate() {
                        let (val, grad) = basis.eval(alpha + 1, x);
                        v += c * val;
                        g = g.add(grad.scale(c));
                    }
                    let dv = reference.value(x) - v;
                    let dg = reference.gradient(x).sub(g);
                    l2sq += w * dv * dv;
                    h1sq += w * dg.dot(dg);
                }
            }
        }
    }
    let abs_l2 = l2sq.sqrt();
    let abs_h1 = h1sq.sqrt();
    ErrorMeasures {
        rel_l2: abs_l2 / reference.l2_norm,
        rel_h1: abs_h1 / reference.h1_norm,
        abs_l2,
        abs_h1_semi: abs_h1,
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub level: usize,
    pub h: f64,
    pub p_max: usize,
    pub dofs: usize,
    pub rel_l2: f64,
    pub rel_h1: f64,
    pub cond: f64,
}

/// Least-squares line through (x, log err).
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub correlation: f64,
    pub intercept: f64,
}

/// Abscissa used for rate fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XTransform {
    /// log err against log h: slope is the algebraic convergence order.
    LogH,
    /// log err against p: straight lines mean exponential decay in p.
    P,
    /// log err against sqrt(#dofs): straight lines mean hp-exponential decay.
    SqrtDofs,
}

/// Fits log(rel H1 error) against the transformed abscissa over the given
/// rows. Needs at least 3 rows with positive error.
pub fn fit_rate(rows: &[StudyRow], x: XTransform) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.rel_h1 > 0.0)
        .map(|r| {
            let xv = match x {
                XTransform::LogH => r.h.ln(),
                XTransform::P => r.p_max as f64,
                XTransform::SqrtDofs => (r.dofs as f64).sqrt(),
            };
            (xv, r.rel_h1.ln())
        })
        .collect();
    fit_line(&pts)
}

/// Same fit on the L2 column.
pub fn fit_rate_l2(rows: &[StudyRow], x: XTransform) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.rel_l2 > 0.0)
        .map(|r| {
            let xv = match x {
                XTransform::LogH => r.h.ln(),
                XTransform::P => r.p_max as f64,
                XTransform::SqrtDofs => (r.dofs as f64).sqrt(),
            };
            (xv, r.rel_l2.ln())
        })
        .collect();
    fit_line(&pts)
}

fn fit_line(pts: &[(f64, f64)]) -> Result<RateFit> {
    if pts.len() < 3 {
        return Err(Error::Parameter(format!(
            "rate fit needs at least 3 points, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("rate fit abscissa is constant".into()));
    }
    let slope = sxy / sxx;
    let correlation = if syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    };
    Ok(RateFit {
        slope,
        correlation,
        intercept: my - slope * mx,
    })
}

/// Mesh families available to the h-study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HFamily {
    Cartesian,
    Voronoi,
}

/// Study settings shared by the runners.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub dirichlet_mode: DirichletMode,
    /// Compute the condition column (dense up to this size, iterative
    /// beyond; 0 skips and records NaN).
    pub cond_dense_threshold: usize,
    /// Base seed for Voronoi mesh generation.
    pub rng_seed: u64,
    pub lloyd_iters: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            dirichlet_mode: DirichletMode::ExactMoments,
            cond_dense_threshold: 800,
            rng_seed: 42,
            lloyd_iters: 30,
        }
    }
}

/// Convergence study result: rows plus rate fits.
#[derive(Debug, Clone)]
pub struct StudyResult {
    pub kind: String,
    pub family: String,
    pub u_id: String,
    pub rows: Vec<StudyRow>,
    /// H1 fit over the asymptotic window (last 3 levels for h-studies, the
    /// upper half for p- and hp-studies).
    pub h1_fit: Option<RateFit>,
    pub l2_fit: Option<RateFit>,
}

impl StudyResult {
    /// CSV with the fixed column set
    /// `kind,family,u,level,h,p_max,dofs,relL2,relH1,cond`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,family,u,level,h,p_max,dofs,relL2,relH1,cond\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e}\n",
                self.kind,
                self.family,
                self.u_id,
                r.level,
                r.h,
                r.p_max,
                r.dofs,
                r.rel_l2,
                r.rel_h1,
                r.cond
            ));
        }
        out
    }
}

fn solve_and_measure(
    mesh: &Mesh,
    degrees: &DegreeVector,
    reference: &ReferenceSolution,
    config: &StudyConfig,
) -> Result<(ErrorMeasures, usize, f64)> {
    let g = {
        let r = reference.clone();
        move |x: Point| r.value(x)
    };
    let bc = impose_dirichlet(
        mesh,
        degrees,
        &g,
        config.dirichlet_mode,
        reference.singular_corner,
    );
    let system = assemble(mesh, degrees, &bc)?;
    let sol = solve(&system)?;
    let errors = compute_errors(mesh, &sol, reference);
    let cond = if config.cond_dense_threshold == 0 {
        f64::NAN
    } else {
        condition_estimate_with_threshold(&system, config.cond_dense_threshold)?.full
    };
    Ok((errors, system.n_dofs, cond))
}

/// h-refinement study: Cartesian meshes with n = 4, 8, 16, ... cells per
/// side, or Voronoi meshes with quadrupling seed counts.
pub fn run_h_study(
    u_id: &str,
    family: HFamily,
    p: usize,
    levels: usize,
    config: &StudyConfig,
) -> Result<StudyResult> {
    let reference = reference(u_id)?;
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let mesh = match family {
            HFamily::Cartesian => {
                let n = 4usize << level;
                generate_cartesian(n, Point::new(0.0, 0.0), Point::new(1.0, 1.0))?
            }
            HFamily::Voronoi => {
                let seeds = 16usize * 4usize.pow(level as u32);
                generate_voronoi_lloyd(
                    seeds,
                    &unit_square_polygon(),
                    config.lloyd_iters,
                    config.rng_seed + level as u64,
                )?
            }
        };
        let degrees = DegreeVector::uniform(&mesh, p)?;
        let (errors, dofs, cond) = solve_and_measure(&mesh, &degrees, &reference, config)?;
        rows.push(StudyRow {
            level,
            h: mesh.max_diameter(),
            p_max: p,
            dofs,
            rel_l2: errors.rel_l2,
            rel_h1: errors.rel_h1,
            cond,
        });
    }
    // fit over the finest 3 levels to avoid preasymptotic pollution
    let window = &rows[rows.len().saturating_sub(3)..];
    let h1_fit = fit_rate(window, XTransform::LogH).ok();
    let l2_fit = fit_rate_l2(window, XTransform::LogH).ok();
    Ok(StudyResult {
        kind: "h".into(),
        family: match family {
            HFamily::Cartesian => "cartesian".into(),
            HFamily::Voronoi => "voronoi".into(),
        },
        u_id: u_id.into(),
        rows,
        h1_fit,
        l2_fit,
    })
}

/// p-elevation study on a fixed mesh, p = 1..=p_max.
pub fn run_p_study(
    u_id: &str,
    mesh: &Mesh,
    family_label: &str,
    p_max: usize,
    config: &StudyConfig,
) -> Result<StudyResult> {
    let reference = reference(u_id)?;
    let mut rows = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let degrees = DegreeVector::uniform(mesh, p)?;
        let (errors, dofs, cond) = solve_and_measure(mesh, &degrees, &reference, config)?;
        rows.push(StudyRow {
            level: p - 1,
            h: mesh.max_diameter(),
            p_max: p,
            dofs,
            rel_l2: errors.rel_l2,
            rel_h1: errors.rel_h1,
            cond,
        });
    }
    let window = &rows[rows.len() / 2..];
    let h1_fit = fit_rate(window, XTransform::P).ok();
    let l2_fit = fit_rate_l2(window, XTransform::P).ok();
    Ok(StudyResult {
        kind: "p".into(),
        family: family_label.into(),
        u_id: u_id.into(),
        rows,
        h1_fit,
        l2_fit,
    })
}

/// hp study on geometrically graded L-shaped meshes: for each n the mesh
/// has n+1 layers and layer-linked degrees (mu-graded), solved for u3.
pub fn run_hp_study(
    u_id: &str,
    family: GradedFamily,
    sigma: f64,
    mu: f64,
    n_max: usize,
    config: &StudyConfig,
) -> Result<StudyResult> {
    let reference = reference(u_id)?;
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let (mesh, layers) = generate_graded_lshape(n, sigma, family)?;
        let degrees = DegreeVector::graded(&mesh, &layers, mu)?;
        let (errors, dofs, cond) = solve_and_measure(&mesh, &degrees, &reference, config)?;
        rows.push(StudyRow {
            level: n,
            h: mesh.max_diameter(),
            p_max: degrees.max_degree(),
            dofs,
            rel_l2: errors.rel_l2,
            rel_h1: errors.rel_h1,
            cond,
        });
    }
    let window = &rows[rows.len() / 2..];
    let h1_fit = fit_rate(window, XTransform::SqrtDofs).ok();
    let l2_fit = fit_rate_l2(window, XTransform::SqrtDofs).ok();
    Ok(StudyResult {
        kind: "hp".into(),
        family: match family {
            GradedFamily::A => "graded-a".into(),
            GradedFamily::B => "graded-b".into(),
            GradedFamily::C => "graded-c".into(),
        },
        u_id: u_id.into(),
        rows,
        h1_fit,
        l2_fit,
    })
}
