//! Mesh generators: Cartesian grids, Lloyd-relaxed Voronoi partitions of a
//! convex polygon, geometrically graded L-shaped meshes and a small
//! non-convex demo mesh.

use super::{LayerDecomposition, Mesh};
use crate::error::{Error, Result};
use crate::geometry::{
    centroid, clip_halfplane, diameter, point_in_polygon, signed_area, Point,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Assembles a mesh from independently produced polygons, snapping nearly
/// coincident vertices to a shared representative and absorbing T-junctions
/// as extra polygon vertices so the result is conforming.
struct MeshBuilder {
    tol: f64,
    grid: HashMap<(i64, i64), Vec<usize>>,
    vertices: Vec<Point>,
    loops: Vec<Vec<usize>>,
    layers: Vec<usize>,
}

impl MeshBuilder {
    fn new(tol: f64) -> Self {
        MeshBuilder {
            tol,
            grid: HashMap::new(),
            vertices: Vec::new(),
            loops: Vec::new(),
            layers: Vec::new(),
        }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.tol).round() as i64, (p.y / self.tol).round() as i64)
    }

    fn vertex_id(&mut self, p: Point) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        if self.vertices[id].dist(p) <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.grid.entry((kx, ky)).or_default().push(id);
        id
    }

    fn add_polygon(&mut self, poly: &[Point], layer: usize) -> Result<()> {
        let mut ids: Vec<usize> = poly.iter().map(|&p| self.vertex_id(p)).collect();
        ids.dedup();
        while ids.len() > 1 && ids[0] == *ids.last().unwrap() {
            ids.pop();
        }
        if ids.len() < 3 {
            return Err(Error::Mesh("degenerate cell collapsed under welding".into()));
        }
        self.loops.push(ids);
        self.layers.push(layer);
        Ok(())
    }

    /// Inserts vertices lying strictly inside another polygon's edge, so
    /// hanging nodes become genuine vertices of the coarse neighbour.
    fn repair_t_junctions(&mut self) {
        let verts = self.vertices.clone();
        for loop_ in &mut self.loops {
            let mut out: Vec<usize> = Vec::with_capacity(loop_.len());
            let n = loop_.len();
            for i in 0..n {
                let a = verts[loop_[i]];
                let b = verts[loop_[(i + 1) % n]];
                out.push(loop_[i]);
                let ab = b.sub(a);
                let len2 = ab.dot(ab);
                let mut on_edge: Vec<(f64, usize)> = Vec::new();
                for (vid, &v) in verts.iter().enumerate() {
                    if vid == loop_[i] || vid == loop_[(i + 1) % n] {
                        continue;
                    }
                    let t = v.sub(a).dot(ab) / len2;
                    if t <= 1e-9 || t >= 1.0 - 1e-9 {
                        continue;
                    }
                    let foot = a.add(ab.scale(t));
                    if v.dist(foot) <= self.tol {
                        on_edge.push((t, vid));
                    }
                }
                on_edge.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                out.extend(on_edge.into_iter().map(|(_, vid)| vid));
            }
            *loop_ = out;
        }
    }

    fn build(mut self) -> Result<(Mesh, Vec<usize>)> {
        self.repair_t_junctions();
        let mesh = Mesh::new(self.vertices, self.loops)?;
        Ok((mesh, self.layers))
    }
}

/// Cartesian mesh of `n x n` squares on an axis-aligned rectangle.
pub fn generate_cartesian(n: usize, lo: Point, hi: Point) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Parameter("cartesian mesh needs n >= 1".into()));
    }
    if hi.x <= lo.x || hi.y <= lo.y {
        return Err(Error::Parameter("rectangle is empty".into()));
    }
    let nv = n + 1;
    let mut vertices = Vec::with_capacity(nv * nv);
    for j in 0..nv {
        for i in 0..nv {
            vertices.push(Point::new(
                lo.x + (hi.x - lo.x) * i as f64 / n as f64,
                lo.y + (hi.y - lo.y) * j as f64 / n as f64,
            ));
        }
    }
    let mut elements = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let v = |ii: usize, jj: usize| jj * nv + ii;
            elements.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    Mesh::new(vertices, elements)
}

/// One Lloyd pass: Voronoi cells of `seeds` clipped to the convex domain.
fn voronoi_cells(seeds: &[Point], domain: &[Point], tol: f64) -> Result<Vec<Vec<Point>>> {
    let mut cells = Vec::with_capacity(seeds.len());
    for (i, &si) in seeds.iter().enumerate() {
        let mut cell = domain.to_vec();
        for (j, &sj) in seeds.iter().enumerate() {
            if i == j {
                continue;
            }
            let normal = si.sub(sj);
            cell = clip_halfplane(&cell, si.mid(sj), normal, tol);
            if cell.is_empty() {
                return Err(Error::Mesh(format!("seed {i} produced an empty cell")));
            }
        }
        cells.push(cell);
    }
    Ok(cells)
}

/// Runs the Lloyd iteration and reports the mean centroid-seed drift after
/// each pass (used by tests to check monotone convergence).
pub(crate) fn lloyd_run(
    seeds: &mut Vec<Point>,
    domain: &[Point],
    iters: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut drift = Vec::with_capacity(iters);
    for _ in 0..iters {
        let cells = voronoi_cells(seeds, domain, tol)?;
        let mut moved = 0.0;
        let mut next = Vec::with_capacity(seeds.len());
        for (s, cell) in seeds.iter().zip(&cells) {
            let c = centroid(cell);
            moved += c.dist(*s);
            next.push(c);
        }
        drift.push(moved / seeds.len() as f64);
        *seeds = next;
    }
    Ok(drift)
}

/// Voronoi mesh of a convex CCW polygon with `lloyd_iters` relaxation
/// passes. Deterministic for a fixed `rng_seed`; coincident seeds are
/// perturbed and reported on stderr.
pub fn generate_voronoi_lloyd(
    n_seeds: usize,
    domain: &[Point],
    lloyd_iters: usize,
    rng_seed: u64,
) -> Result<Mesh> {
    if n_seeds == 0 {
        return Err(Error::Parameter("voronoi mesh needs n_seeds >= 1".into()));
    }
    let area = signed_area(domain);
    if area <= 0.0 {
        return Err(Error::Parameter("domain polygon must be CCW".into()));
    }
    let nd = domain.len();
    for i in 0..nd {
        let a = domain[i];
        let b = domain[(i + 1) % nd];
        let c = domain[(i + 2) % nd];
        if b.sub(a).cross(c.sub(b)) < -1e-12 * area {
            return Err(Error::Parameter("domain polygon must be convex".into()));
        }
    }
    if n_seeds == 1 {
        return Mesh::new(domain.to_vec(), vec![(0..nd).collect()]);
    }
    let scale = diameter(domain);
    let tol = 1e-13 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (lo, hi) = crate::geometry::bounding_box(domain);
    let mut seeds = Vec::with_capacity(n_seeds);
    while seeds.len() < n_seeds {
        let p = Point::new(
            rng.random_range(lo.x..hi.x),
            rng.random_range(lo.y..hi.y),
        );
        if point_in_polygon(p, domain, -1e-9 * scale) {
            seeds.push(p);
        }
    }
    // coincident seeds make bisectors degenerate: perturb and report
    let mut perturbations = 0usize;
    loop {
        let mut degenerate = None;
        'outer: for i in 0..n_seeds {
            for j in (i + 1)..n_seeds {
                if seeds[i].dist(seeds[j]) < 1e-8 * scale {
                    degenerate = Some(j);
                    break 'outer;
                }
            }
        }
        match degenerate {
            Some(j) => {
                seeds[j] = Point::new(
                    seeds[j].x + rng.random_range(-1e-4..1e-4) * scale,
                    seeds[j].y + rng.random_range(-1e-4..1e-4) * scale,
                );
                perturbations += 1;
                if perturbations > 100 {
                    return Err(Error::Mesh(
                        "could not resolve degenerate seed configuration".into(),
                    ));
                }
            }
            None => break,
        }
    }
    if perturbations > 0 {
        eprintln!("voronoi: perturbed {perturbations} degenerate seed(s)");
    }
    lloyd_run(&mut seeds, domain, lloyd_iters, tol)?;
    let cells = voronoi_cells(&seeds, domain, tol)?;
    let mut builder = MeshBuilder::new(1e-9 * scale);
    for cell in &cells {
        builder.add_polygon(cell, 0)?;
    }
    let (mesh, _) = builder.build()?;
    Ok(mesh)
}

/// Graded mesh family on the L-shaped domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradedFamily {
    /// Tensor squares, hanging nodes absorbed as polygon vertices.
    A,
    /// Nested L-shaped rings split along the diagonal.
    B,
    /// Nested L-shaped rings without the split (non-convex ring elements).
    C,
}

/// The L-shaped domain (-1,1)^2 minus the third-quadrant square, as a CCW
/// polygon with the reentrant corner at the origin.
pub fn lshape_polygon() -> Vec<Point> {
    vec![
        Point::new(0.0, -1.0),
        Point::new(1.0, -1.0),
        Point::new(1.0, 1.0),
        Point::new(-1.0, 1.0),
        Point::new(-1.0, 0.0),
        Point::new(0.0, 0.0),
    ]
}

fn mirror_x(poly: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = poly.iter().map(|p| Point::new(-p.x, p.y)).collect();
    out.reverse();
    out
}

fn mirror_y(poly: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = poly.iter().map(|p| Point::new(p.x, -p.y)).collect();
    out.reverse();
    out
}

/// Geometrically graded mesh of the L-shape, graded toward the origin with
/// ratio `sigma`, together with its layer decomposition (layer 0 at the
/// corner). `n_layers = 0` yields the coarse mesh.
pub fn generate_graded_lshape(
    n_layers: usize,
    sigma: f64,
    family: GradedFamily,
) -> Result<(Mesh, LayerDecomposition)> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Parameter(format!(
            "grading parameter sigma must lie in (0,1), got {sigma}"
        )));
    }
    let n = n_layers;
    let scale_of = |j: usize| sigma.powi(j as i32);
    let mut builder = MeshBuilder::new(1e-12);
    match family {
        GradedFamily::A => {
            for j in 0..n {
                let s = scale_of(j);
                let s1 = scale_of(j + 1);
                let hang = (j + 2 <= n).then(|| scale_of(j + 2));
                let layer = n - j;
                // corner square of the ring
                let a = vec![
                    Point::new(s1, s1),
                    Point::new(s, s1),
                    Point::new(s, s),
                    Point::new(s1, s),
                ];
                // top-left piece; its bottom edge is split by the next ring
                let mut b = vec![Point::new(0.0, s1)];
                if let Some(s2) = hang {
                    b.push(Point::new(s2, s1));
                }
                b.extend([Point::new(s1, s1), Point::new(s1, s), Point::new(0.0, s)]);
                // bottom-right piece; its left edge is split by the next ring
                let mut c = vec![
                    Point::new(s1, 0.0),
                    Point::new(s, 0.0),
                    Point::new(s, s1),
                    Point::new(s1, s1),
                ];
                if let Some(s2) = hang {
                    c.push(Point::new(s1, s2));
                }
                for piece in [&a, &b, &c] {
                    builder.add_polygon(piece, layer)?;
                    builder.add_polygon(&mirror_x(piece), layer)?;
                    builder.add_polygon(&mirror_y(piece), layer)?;
                }
            }
            let sn = scale_of(n);
            let sq = vec![
                Point::new(0.0, 0.0),
                Point::new(sn, 0.0),
                Point::new(sn, sn),
                Point::new(0.0, sn),
            ];
            builder.add_polygon(&sq, 0)?;
            builder.add_polygon(&mirror_x(&sq), 0)?;
            builder.add_polygon(&mirror_y(&sq), 0)?;
        }
        GradedFamily::B | GradedFamily::C => {
            let split = family == GradedFamily::B;
            for j in 0..n {
                let s = scale_of(j);
                let s1 = scale_of(j + 1);
                let layer = n - j;
                if split {
                    let upper = vec![
                        Point::new(s, s),
                        Point::new(-s, s),
                        Point::new(-s, 0.0),
                        Point::new(-s1, 0.0),
                        Point::new(-s1, s1),
                        Point::new(s1, s1),
                    ];
                    let lower = vec![
                        Point::new(s, s),
                        Point::new(s1, s1),
                        Point::new(s1, -s1),
                        Point::new(0.0, -s1),
                        Point::new(0.0, -s),
                        Point::new(s, -s),
                    ];
                    builder.add_polygon(&upper, layer)?;
                    builder.add_polygon(&lower, layer)?;
                } else {
                    let ring = vec![
                        Point::new(0.0, -s),
                        Point::new(s, -s),
                        Point::new(s, s),
                        Point::new(-s, s),
                        Point::new(-s, 0.0),
                        Point::new(-s1, 0.0),
                        Point::new(-s1, s1),
                        Point::new(s1, s1),
                        Point::new(s1, -s1),
                        Point::new(0.0, -s1),
                    ];
                    builder.add_polygon(&ring, layer)?;
                }
            }
            let sn = scale_of(n);
            if split {
                let upper = vec![
                    Point::new(sn, sn),
                    Point::new(-sn, sn),
                    Point::new(-sn, 0.0),
                    Point::new(0.0, 0.0),
                ];
                let lower = vec![
                    Point::new(sn, sn),
                    Point::new(0.0, 0.0),
                    Point::new(0.0, -sn),
                    Point::new(sn, -sn),
                ];
                builder.add_polygon(&upper, 0)?;
                builder.add_polygon(&lower, 0)?;
            } else {
                let inner = vec![
                    Point::new(0.0, -sn),
                    Point::new(sn, -sn),
                    Point::new(sn, sn),
                    Point::new(-sn, sn),
                    Point::new(-sn, 0.0),
                    Point::new(0.0, 0.0),
                ];
                builder.add_polygon(&inner, 0)?;
            }
        }
    }
    let (mesh, layers) = builder.build()?;
    let n_max = layers.iter().copied().max().unwrap_or(0);
    Ok((
        mesh,
        LayerDecomposition {
            layer_of_element: layers,
            n_layers: n_max,
        },
    ))
}

/// A small conforming mesh of the unit square made of four congruent
/// non-convex L-shaped pieces arranged as a pinwheel around a central
/// square. Substitute for genuinely non-convex element shapes in tests and
/// demos.
pub fn generate_nonconvex_demo() -> Mesh {
    let q = 0.25;
    let pt = |x: f64, y: f64| Point::new(x * q, y * q);
    let polys = vec![
        vec![pt(0.0, 0.0), pt(2.0, 0.0), pt(2.0, 1.0), pt(1.0, 1.0), pt(1.0, 2.0), pt(0.0, 2.0)],
        vec![pt(4.0, 0.0), pt(4.0, 2.0), pt(3.0, 2.0), pt(3.0, 1.0), pt(2.0, 1.0), pt(2.0, 0.0)],
        vec![pt(4.0, 4.0), pt(2.0, 4.0), pt(2.0, 3.0), pt(3.0, 3.0), pt(3.0, 2.0), pt(4.0, 2.0)],
        vec![pt(0.0, 4.0), pt(0.0, 2.0), pt(1.0, 2.0), pt(1.0, 3.0), pt(2.0, 3.0), pt(2.0, 4.0)],
        vec![
            pt(1.0, 1.0),
            pt(2.0, 1.0),
            pt(3.0, 1.0),
            pt(3.0, 2.0),
            pt(3.0, 3.0),
            pt(2.0, 3.0),
            pt(1.0, 3.0),
            pt(1.0, 2.0),
        ],
    ];
    let mut builder = MeshBuilder::new(1e-12);
    for p in &polys {
        builder.add_polygon(p, 0).expect("demo polygons are valid");
    }
    builder.build().expect("demo mesh is conforming").0
}
