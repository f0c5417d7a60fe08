//! Planar geometry primitives: points, polygon measures, kernels of
//! star-shaped polygons, triangulation and convex clipping.

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[allow(clippy::should_implement_trait)]
impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product `self x o`.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }

    /// Midpoint of the segment to `o`.
    pub fn mid(self, o: Point) -> Point {
        Point::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

/// Signed area of a polygon loop (positive for counter-clockwise).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a.cross(b);
    }
    0.5 * acc
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut area = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let w = a.cross(b);
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
        area += w;
    }
    let area = 0.5 * area;
    Point::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Diameter: largest pairwise vertex distance.
pub fn diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..poly.len() {
        for j in (i + 1)..poly.len() {
            d = d.max(poly[i].dist(poly[j]));
        }
    }
    d
}

/// Interior angle at each vertex, in radians, in (0, 2pi).
///
/// The polygon must be counter-clockwise; reflex vertices yield angles above pi.
pub fn interior_angles(poly: &[Point]) -> Vec<f64> {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let prev = poly[(i + n - 1) % n];
            let v = poly[i];
            let next = poly[(i + 1) % n];
            let din = v.sub(prev);
            let dout = next.sub(v);
            let turn = din.cross(dout).atan2(din.dot(dout));
            std::f64::consts::PI - turn
        })
        .collect()
}

/// Proper intersection test for two closed segments, excluding the case of a
/// shared endpoint.
fn segments_cross(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    // shared endpoints do not count
    if a.dist(c) < tol || a.dist(d) < tol || b.dist(c) < tol || b.dist(d) < tol {
        return false;
    }
    let d1 = b.sub(a).cross(c.sub(a));
    let d2 = b.sub(a).cross(d.sub(a));
    let d3 = d.sub(c).cross(a.sub(c));
    let d4 = d.sub(c).cross(b.sub(c));
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    // collinear overlap counts as a crossing
    let on = |p: Point, q: Point, r: Point| -> bool {
        q.sub(p).cross(r.sub(p)).abs() < tol
            && r.x >= p.x.min(q.x) - tol
            && r.x <= p.x.max(q.x) + tol
            && r.y >= p.y.min(q.y) - tol
            && r.y <= p.y.max(q.y) + tol
    };
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

/// Whether the polygon is simple (no two non-adjacent edges intersect).
pub fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let tol = 1e-12 * diameter(poly).max(1e-300);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a.dist(b) < tol {
            return false;
        }
        for j in (i + 1)..n {
            // skip adjacent edges
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_cross(a, b, c, d, tol) {
                return false;
            }
        }
    }
    true
}

/// Clips a convex polygon against the half-plane `{x : n . (x - p0) >= 0}`.
///
/// Sutherland-Hodgman step; returns an empty vector when nothing is left.
pub fn clip_halfplane(poly: &[Point], p0: Point, normal: Point, tol: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    let side = |p: Point| normal.dot(p.sub(p0));
    for i in 0..n {
        let cur = poly[i];
        let next = poly[(i + 1) % n];
        let sc = side(cur);
        let sn = side(next);
        if sc >= -tol {
            out.push(cur);
        }
        if (sc > tol && sn < -tol) || (sc < -tol && sn > tol) {
            let t = sc / (sc - sn);
            out.push(cur.add(next.sub(cur).scale(t)));
        }
    }
    dedup_loop(&mut out, tol);
    if out.len() < 3 {
        out.clear();
    }
    out
}

/// Removes consecutive (and wrap-around) duplicates from a polygon loop.
pub fn dedup_loop(poly: &mut Vec<Point>, tol: f64) {
    let mut i = 0;
    while i < poly.len() && poly.len() > 1 {
        let j = (i + 1) % poly.len();
        if poly[i].dist(poly[j]) < tol {
            poly.remove(j);
        } else {
            i += 1;
        }
    }
}

/// Kernel of a simple polygon: the set of points that see every other point.
///
/// Computed as the intersection of the interior half-planes of all edges,
/// seeded with the bounding box. Empty result means the polygon is not
/// star-shaped.
pub fn polygon_kernel(poly: &[Point]) -> Vec<Point> {
    let (lo, hi) = bounding_box(poly);
    let pad = 0.1 * (hi.sub(lo).norm().max(1e-300));
    let mut region = vec![
        Point::new(lo.x - pad, lo.y - pad),
        Point::new(hi.x + pad, lo.y - pad),
        Point::new(hi.x + pad, hi.y + pad),
        Point::new(lo.x - pad, hi.y + pad),
    ];
    let tol = 1e-13 * diameter(poly).max(1e-300);
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let dir = b.sub(a);
        // interior of a CCW polygon lies to the left of each edge
        let inward = Point::new(-dir.y, dir.x);
        region = clip_halfplane(&region, a, inward, tol);
        if region.is_empty() {
            return region;
        }
    }
    region
}

pub fn bounding_box(poly: &[Point]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// Largest radius of a ball inscribed in a convex polygon (Chebyshev radius),
/// found by bisection on the inward offset of all edge half-planes.
pub fn inradius_convex(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let d = diameter(poly);
    let tol = 1e-13 * d;
    let feasible = |r: f64| -> bool {
        let (lo, hi) = bounding_box(poly);
        let pad = 0.1 * d;
        let mut region = vec![
            Point::new(lo.x - pad, lo.y - pad),
            Point::new(hi.x + pad, lo.y - pad),
            Point::new(hi.x + pad, hi.y + pad),
            Point::new(lo.x - pad, hi.y + pad),
        ];
        let n = poly.len();
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let dir = b.sub(a);
            let len = dir.norm();
            if len < tol {
                continue;
            }
            let inward = Point::new(-dir.y / len, dir.x / len);
            region = clip_halfplane(&region, a.add(inward.scale(r)), inward, tol);
            if region.is_empty() {
                return false;
            }
        }
        true
    };
    let mut lo = 0.0;
    let mut hi = 0.5 * d;
    if !feasible(0.0) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Point-in-polygon test by crossing number; points on the boundary count as
/// inside up to `tol`.
pub fn point_in_polygon(p: Point, poly: &[Point], tol: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let ab = b.sub(a);
        let t = ((p.sub(a)).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
        if p.dist(a.add(ab.scale(t))) < tol {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let xint = pi.x + (p.y - pi.y) / (pj.y - pi.y) * (pj.x - pi.x);
            if p.x < xint {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// A triangle used for quadrature over polygon pieces.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub a: Point,
    pub b: Point,
    pub c: Point,
}

impl Triangle {
    pub fn area(&self) -> f64 {
        0.5 * (self.b.sub(self.a)).cross(self.c.sub(self.a))
    }
}

/// Partitions a simple CCW polygon into triangles.
///
/// Uses a fan from the centroid when the polygon is star-shaped with respect
/// to it (kernel membership with a small safety margin), ear clipping
/// otherwise. Degenerate (zero-area) pieces are dropped.
pub fn triangulate(poly: &[Point]) -> Vec<Triangle> {
    let n = poly.len();
    assert!(n >= 3, "polygon needs at least 3 vertices");
    let scale = diameter(poly);
    let c = centroid(poly);
    let kernel = polygon_kernel(poly);
    let fan_ok = !kernel.is_empty() && point_in_polygon(c, &kernel, -1e-9 * scale);
    let mut tris = Vec::new();
    if fan_ok {
        for i in 0..n {
            let t = Triangle {
                a: c,
                b: poly[i],
                c: poly[(i + 1) % n],
            };
            if t.area() > 1e-14 * scale * scale {
                tris.push(t);
            }
        }
    } else {
        for [i, j, k] in ear_clip(poly) {
            let t = Triangle {
                a: poly[i],
                b: poly[j],
                c: poly[k],
            };
            if t.area() > 1e-14 * scale * scale {
                tris.push(t);
            }
        }
    }
    tris
}

/// Ear clipping of a simple CCW polygon; returns triangles as vertex indices.
///
/// Collinear vertices (for example resolved hanging nodes) are clipped as
/// flat ears without emitting a triangle.
pub fn ear_clip(poly: &[Point]) -> Vec<[usize; 3]> {
    let n = poly.len();
    let scale2 = {
        let d = diameter(poly);
        d * d
    };
    let eps = 1e-13 * scale2;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n.saturating_sub(2));
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for pos in 0..m {
            let ip = idx[(pos + m - 1) % m];
            let iv = idx[pos];
            let inx = idx[(pos + 1) % m];
            let (a, v, b) = (poly[ip], poly[iv], poly[inx]);
            let cr = v.sub(a).cross(b.sub(a));
            if cr.abs() <= eps {
                // flat vertex lying between its neighbours: drop silently
                if v.sub(a).dot(b.sub(v)) > 0.0 {
                    idx.remove(pos);
                    clipped = true;
                    break;
                }
                continue;
            }
            if cr < 0.0 {
                continue; // reflex tip
            }
            // no other remaining vertex strictly inside the candidate ear
            let mut blocked = false;
            for &other in &idx {
                if other == ip || other == iv || other == inx {
                    continue;
                }
                let p = poly[other];
                let s1 = v.sub(a).cross(p.sub(a));
                let s2 = b.sub(v).cross(p.sub(v));
                let s3 = a.sub(b).cross(p.sub(b));
                if s1 > -eps && s2 > -eps && s3 > -eps {
                    blocked = true;
                    break;
                }
            }
            if blocked {
                continue;
            }
            tris.push([ip, iv, inx]);
            idx.remove(pos);
            clipped = true;
            break;
        }
        if !clipped {
            guard += 1;
            if guard > 2 {
                // degenerate input; bail out with a fan to stay total
                break;
            }
        }
    }
    if idx.len() == 3 {
        tris.push([idx[0], idx[1], idx[2]]);
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    fn lshape() -> Vec<Point> {
        // 6-vertex L, reflex corner at (0,0)
        vec![
            Point::new(0.0, -1.0),
            Point::new(1.0, -1.0),
            Point::new(1.0, 1.0),
            Point::new(-1.0, 1.0),
            Point::new(-1.0, 0.0),
            Point::new(0.0, 0.0),
        ]
    }

    #[test]
    fn area_and_centroid() {
        let sq = unit_square();
        assert!((signed_area(&sq) - 1.0).abs() < 1e-15);
        let c = centroid(&sq);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        assert!((signed_area(&lshape()) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn diameter_of_square_is_diagonal() {
        assert!((diameter(&unit_square()) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn interior_angles_square_and_lshape() {
        let ang = interior_angles(&unit_square());
        for a in ang {
            assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        }
        let ang = interior_angles(&lshape());
        // one reflex vertex of 3*pi/2 at the end
        assert!((ang[5] - 1.5 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn simplicity() {
        assert!(is_simple(&unit_square()));
        assert!(is_simple(&lshape()));
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(!is_simple(&bowtie));
    }

    #[test]
    fn kernel_of_convex_polygon_is_itself() {
        let k = polygon_kernel(&unit_square());
        assert!((signed_area(&k) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kernel_of_lshape_is_quadrant_part() {
        // points seeing everything must lie in the lower-right unit square
        let k = polygon_kernel(&lshape());
        assert!(!k.is_empty());
        let a = signed_area(&k);
        assert!((a - 1.0).abs() < 1e-9, "kernel area {a}");
    }

    #[test]
    fn inradius_of_unit_square() {
        assert!((inradius_convex(&unit_square()) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn fan_triangulation_of_square() {
        let tris = triangulate(&unit_square());
        assert_eq!(tris.len(), 4);
        let total: f64 = tris.iter().map(|t| t.area()).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ear_clip_lshape_gives_four_triangles() {
        let tris = ear_clip(&lshape());
        assert_eq!(tris.len(), 4);
        let total: f64 = tris
            .iter()
            .map(|&[i, j, k]| {
                Triangle {
                    a: lshape()[i],
                    b: lshape()[j],
                    c: lshape()[k],
                }
                .area()
            })
            .sum();
        assert!((total - 3.0).abs() < 1e-13);
    }

    #[test]
    fn triangulate_handles_collinear_hanging_node() {
        // rectangle with a collinear vertex mid-bottom
        let poly = vec![
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let tris = triangulate(&poly);
        let total: f64 = tris.iter().map(|t| t.area()).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn point_in_polygon_basics() {
        let sq = unit_square();
        assert!(point_in_polygon(Point::new(0.5, 0.5), &sq, 1e-12));
        assert!(!point_in_polygon(Point::new(1.5, 0.5), &sq, 1e-12));
        assert!(point_in_polygon(Point::new(1.0, 0.5), &sq, 1e-9));
    }
}
