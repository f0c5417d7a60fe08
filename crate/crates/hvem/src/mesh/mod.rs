//! Polygonal meshes: construction, validation, derived edge topology,
//! layer decompositions and the mesh generators used by the studies.
//!
//! A mesh stores vertices and counter-clockwise element loops; edges and
//! boundary flags are always derived. Hanging nodes are represented as
//! genuine polygon vertices of the coarser neighbour, so every internal edge
//! is shared by exactly two elements.

mod generate;

pub use generate::{
    generate_cartesian, generate_graded_lshape, generate_nonconvex_demo, generate_voronoi_lloyd,
    lshape_polygon, GradedFamily,
};

use crate::error::{Error, Result};
use crate::geometry::{
    self, diameter, interior_angles, inradius_convex, is_simple, signed_area, Point, Triangle,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// An undirected mesh edge with canonical vertex order (`v[0] < v[1]`).
#[derive(Debug, Clone)]
pub struct Edge {
    pub v: [usize; 2],
    /// Adjacent element indices; boundary edges have exactly one.
    pub elements: Vec<usize>,
    pub boundary: bool,
}

impl Edge {
    pub fn length(&self, vertices: &[Point]) -> f64 {
        vertices[self.v[0]].dist(vertices[self.v[1]])
    }
}

/// A conforming polygonal decomposition of a 2D domain.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// CCW vertex-index loops, one per element.
    pub elements: Vec<Vec<usize>>,
    /// Derived unique edges.
    pub edges: Vec<Edge>,
    /// Per element, edge ids in traversal order (parallel to the loop).
    pub element_edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    elements: Vec<Vec<usize>>,
}

impl Mesh {
    /// Builds a mesh from vertices and CCW element loops, validating
    /// structure and deriving the edge topology.
    pub fn new(vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Mesh> {
        if elements.is_empty() {
            return Err(Error::Mesh("mesh has no elements".into()));
        }
        for (k, loop_) in elements.iter().enumerate() {
            if loop_.len() < 3 {
                return Err(Error::Mesh(format!("element {k} has fewer than 3 vertices")));
            }
            for &vi in loop_ {
                if vi >= vertices.len() {
                    return Err(Error::Mesh(format!(
                        "element {k} references vertex {vi} out of range"
                    )));
                }
            }
            let poly: Vec<Point> = loop_.iter().map(|&i| vertices[i]).collect();
            let area = signed_area(&poly);
            if area <= 0.0 {
                return Err(Error::Mesh(format!(
                    "element {k} is not counter-clockwise (signed area {area})"
                )));
            }
            if !is_simple(&poly) {
                return Err(Error::Mesh(format!("element {k} is not a simple polygon")));
            }
        }
        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut element_edges = Vec::with_capacity(elements.len());
        for (k, loop_) in elements.iter().enumerate() {
            let mut ids = Vec::with_capacity(loop_.len());
            for i in 0..loop_.len() {
                let a = loop_[i];
                let b = loop_[(i + 1) % loop_.len()];
                if a == b {
                    return Err(Error::Mesh(format!("element {k} repeats vertex {a}")));
                }
                let key = (a.min(b), a.max(b));
                let id = *edge_map.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        v: [key.0, key.1],
                        elements: Vec::new(),
                        boundary: false,
                    });
                    edges.len() - 1
                });
                edges[id].elements.push(k);
                if edges[id].elements.len() > 2 {
                    return Err(Error::Mesh(format!(
                        "edge ({}, {}) adjacent to more than two elements",
                        key.0, key.1
                    )));
                }
                ids.push(id);
            }
            element_edges.push(ids);
        }
        for e in &mut edges {
            e.boundary = e.elements.len() == 1;
        }
        Ok(Mesh {
            vertices,
            elements,
            edges,
            element_edges,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.boundary).count()
    }

    /// Vertex coordinates of one element, in CCW order.
    pub fn element_polygon(&self, k: usize) -> Vec<Point> {
        self.elements[k].iter().map(|&i| self.vertices[i]).collect()
    }

    /// Geometric quantities of one element.
    pub fn element_geometry(&self, k: usize) -> ElementGeometry {
        let poly = self.element_polygon(k);
        let h_k = diameter(&poly);
        let x_k = geometry::centroid(&poly);
        let n = poly.len();
        let edge_lengths: Vec<f64> = (0..n).map(|i| poly[i].dist(poly[(i + 1) % n])).collect();
        let angles = interior_angles(&poly);
        let omega = angles.iter().cloned().fold(0.0f64, f64::max);
        let lambda = angles
            .iter()
            .map(|&a| 2.0 * std::f64::consts::PI - a)
            .fold(f64::INFINITY, f64::min);
        let kernel = geometry::polygon_kernel(&poly);
        let star_radius_lb = if kernel.is_empty() {
            0.0
        } else {
            inradius_convex(&kernel)
        };
        ElementGeometry {
            h_k,
            x_k,
            edge_lengths,
            lambda_k: lambda / std::f64::consts::PI,
            omega_k: omega / std::f64::consts::PI,
            star_radius_lb,
            area: signed_area(&poly),
        }
    }

    /// Quadrature triangulation of one element (centroid fan when the
    /// element is star-shaped with respect to its centroid, ear clipping
    /// otherwise).
    pub fn sub_triangulate(&self, k: usize) -> Vec<Triangle> {
        geometry::triangulate(&self.element_polygon(k))
    }

    /// Sum of element areas.
    pub fn total_area(&self) -> f64 {
        (0..self.n_elements())
            .map(|k| signed_area(&self.element_polygon(k)))
            .sum()
    }

    /// Largest element diameter.
    pub fn max_diameter(&self) -> f64 {
        (0..self.n_elements())
            .map(|k| diameter(&self.element_polygon(k)))
            .fold(0.0, f64::max)
    }

    pub fn to_json_string(&self) -> String {
        let file = MeshFile {
            vertices: self.vertices.iter().map(|p| [p.x, p.y]).collect(),
            elements: self.elements.clone(),
        };
        serde_json::to_string_pretty(&file).expect("mesh serialization cannot fail")
    }

    /// Parses the `{"vertices": [[x,y],...], "elements": [[i,...],...]}`
    /// format; edges and boundary flags are re-derived.
    pub fn from_json_str(s: &str) -> Result<Mesh> {
        let file: MeshFile = serde_json::from_str(s)?;
        Mesh::new(
            file.vertices
                .into_iter()
                .map(|[x, y]| Point::new(x, y))
                .collect(),
            file.elements,
        )
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_file(path: &std::path::Path) -> Result<Mesh> {
        let s = std::fs::read_to_string(path)?;
        Mesh::from_json_str(&s)
    }
}

/// Per-element geometric data used by validators and local spaces.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    /// Diameter.
    pub h_k: f64,
    /// Area centroid.
    pub x_k: Point,
    pub edge_lengths: Vec<f64>,
    /// Smallest exterior angle divided by pi, in (0,2).
    pub lambda_k: f64,
    /// Largest interior angle divided by pi, in (0,2).
    pub omega_k: f64,
    /// Radius of the largest ball the element is star-shaped with respect
    /// to (inradius of the polygon kernel; 0 when not star-shaped).
    pub star_radius_lb: f64,
    pub area: f64,
}

/// Assignment of every element to a layer counted from a corner.
#[derive(Debug, Clone)]
pub struct LayerDecomposition {
    pub layer_of_element: Vec<usize>,
    /// Highest layer number.
    pub n_layers: usize,
}

impl LayerDecomposition {
    /// Recovers layers by breadth-first search over vertex-sharing
    /// adjacency: layer 0 holds the elements touching `corner`, layer l the
    /// elements touching layer l-1 that belong to no earlier layer.
    pub fn from_corner(mesh: &Mesh, corner: Point) -> Result<LayerDecomposition> {
        let tol = 1e-9 * mesh.max_diameter().max(1e-300);
        let nv = mesh.vertices.len();
        // vertex -> elements
        let mut star: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (k, loop_) in mesh.elements.iter().enumerate() {
            for &v in loop_ {
                star[v].push(k);
            }
        }
        let mut layer = vec![usize::MAX; mesh.n_elements()];
        let mut frontier: Vec<usize> = Vec::new();
        for (k, loop_) in mesh.elements.iter().enumerate() {
            if loop_.iter().any(|&v| mesh.vertices[v].dist(corner) < tol) {
                layer[k] = 0;
                frontier.push(k);
            }
        }
        if frontier.is_empty() {
            return Err(Error::Mesh(format!(
                "no element touches the corner ({}, {})",
                corner.x, corner.y
            )));
        }
        let mut current = 0usize;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &k in &frontier {
                for &v in &mesh.elements[k] {
                    for &nb in &star[v] {
                        if layer[nb] == usize::MAX {
                            layer[nb] = current + 1;
                            next.push(nb);
                        }
                    }
                }
            }
            if !next.is_empty() {
                current += 1;
            }
            frontier = next;
        }
        if layer.contains(&usize::MAX) {
            return Err(Error::Mesh("mesh is not vertex-connected".into()));
        }
        Ok(LayerDecomposition {
            layer_of_element: layer,
            n_layers: current,
        })
    }
}

/// Thresholds for the mesh-regularity validators.
#[derive(Debug, Clone)]
pub struct RegularityParams {
    /// Edge-to-diameter lower bound: h_e >= rho1 * h_K.
    pub rho1: f64,
    /// Star-shapedness ball radius lower bound: r >= rho2 * h_K.
    pub rho2: f64,
    /// Maximum number of edges per element.
    pub lambda_max: usize,
    pub check_quasi_uniform: bool,
    /// Quasi-uniformity bound: max h_K / min h_K <= rho3.
    pub rho3: f64,
}

impl Default for RegularityParams {
    fn default() -> Self {
        RegularityParams {
            rho1: 0.05,
            rho2: 0.05,
            lambda_max: 16,
            check_quasi_uniform: false,
            rho3: 4.0,
        }
    }
}

/// Outcome of one regularity assumption.
#[derive(Debug, Clone)]
pub struct AssumptionResult {
    pub pass: bool,
    /// Worst offending element.
    pub worst_element: usize,
    /// The measured extreme value the threshold was compared against.
    pub worst_value: f64,
}

/// Report of the shape-regularity checks D1-D4.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    /// Minimum over elements of (shortest edge)/(diameter) vs rho1.
    pub d1: AssumptionResult,
    /// Minimum over elements of (kernel inradius)/(diameter) vs rho2.
    pub d2: AssumptionResult,
    /// Maximum edge count vs Lambda.
    pub d3: AssumptionResult,
    /// Diameter ratio vs rho3, when requested.
    pub d4: Option<AssumptionResult>,
}

impl RegularityReport {
    pub fn all_pass(&self) -> bool {
        self.d1.pass && self.d2.pass && self.d3.pass && self.d4.as_ref().is_none_or(|r| r.pass)
    }
}

/// Checks the regularity assumptions and reports per-assumption outcomes
/// with the worst offending element. Never fails: this is a report.
pub fn validate_regularity(mesh: &Mesh, params: &RegularityParams) -> RegularityReport {
    let mut d1 = AssumptionResult {
        pass: true,
        worst_element: 0,
        worst_value: f64::INFINITY,
    };
    let mut d2 = AssumptionResult {
        pass: true,
        worst_element: 0,
        worst_value: f64::INFINITY,
    };
    let mut d3 = AssumptionResult {
        pass: true,
        worst_element: 0,
        worst_value: 0.0,
    };
    let mut hmin = f64::INFINITY;
    let mut hmax: f64 = 0.0;
    let mut kmin = 0usize;
    let mut kmax = 0usize;
    for k in 0..mesh.n_elements() {
        let geo = mesh.element_geometry(k);
        let edge_ratio = geo
            .edge_lengths
            .iter()
            .fold(f64::INFINITY, |m, &l| m.min(l / geo.h_k));
        if edge_ratio < d1.worst_value {
            d1.worst_value = edge_ratio;
            d1.worst_element = k;
        }
        let star_ratio = geo.star_radius_lb / geo.h_k;
        if star_ratio < d2.worst_value {
            d2.worst_value = star_ratio;
            d2.worst_element = k;
        }
        let n_edges = mesh.elements[k].len() as f64;
        if n_edges > d3.worst_value {
            d3.worst_value = n_edges;
            d3.worst_element = k;
        }
        if geo.h_k < hmin {
            hmin = geo.h_k;
            kmin = k;
        }
        if geo.h_k > hmax {
            hmax = geo.h_k;
            kmax = k;
        }
    }
    d1.pass = d1.worst_value >= params.rho1;
    d2.pass = d2.worst_value >= params.rho2;
    d3.pass = d3.worst_value <= params.lambda_max as f64;
    let d4 = params.check_quasi_uniform.then(|| {
        let ratio = hmax / hmin;
        AssumptionResult {
            pass: ratio <= params.rho3,
            worst_element: if ratio > params.rho3 { kmax } else { kmin },
            worst_value: ratio,
        }
    });
    RegularityReport { d1, d2, d3, d4 }
}
