//! Delaunay triangulation, Euclidean Voronoi cell geometry, and the exact
//! hyperbolic empty-disk adjacency test.
//!
//! The key fact used throughout: a hyperbolic disk in the Poincaré model is
//! exactly a Euclidean disk contained in the unit disk. Adjacency of two
//! sites in the hyperbolic Voronoi diagram is therefore decided by searching
//! Euclidean disks through both sites, with centers on the Euclidean
//! bisector, subject to the disk staying inside the unit disk.

use crate::error::{Error, Result};
use crate::pointprocess::Metric;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

const EMPTY: usize = usize::MAX;

/// Delaunay triangulation of a site set together with the dual Voronoi
/// geometry. Immutable after construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VoronoiComplex {
    pub sites: Vec<[f64; 2]>,
    pub metric: Metric,
    /// Site indices, three per face, counterclockwise.
    pub triangles: Vec<usize>,
    /// Halfedge twins; `usize::MAX` on the hull.
    pub halfedges: Vec<usize>,
    /// Hull site indices, counterclockwise.
    pub hull: Vec<usize>,
    /// Circumcenter of each face (Voronoi vertex).
    pub circumcenters: Vec<[f64; 2]>,
    /// Unique Delaunay edges, `i < j`.
    pub edges: Vec<(usize, usize)>,
    /// A representative halfedge per entry in `edges`.
    pub edge_halfedge: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

/// A Voronoi diagram edge dual to a Delaunay edge.
#[derive(Copy, Clone, Debug)]
pub enum DualEdge {
    /// Interior edge: segment between two circumcenters.
    Segment([f64; 2], [f64; 2]),
    /// Hull edge: ray from a circumcenter, outward unit direction.
    Ray { origin: [f64; 2], dir: [f64; 2] },
}

fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    let (na, nb, nc) = (
        a[0] * a[0] + a[1] * a[1],
        b[0] * b[0] + b[1] * b[1],
        c[0] * c[0] + c[1] * c[1],
    );
    [
        (na * (b[1] - c[1]) + nb * (c[1] - a[1]) + nc * (a[1] - b[1])) / d,
        (na * (c[0] - b[0]) + nb * (a[0] - c[0]) + nc * (b[0] - a[0])) / d,
    ]
}

/// Builds the Delaunay triangulation and dual data.
///
/// Cocircular site quadruples are resolved by the deterministic choice of
/// the seeded incremental construction; the unit-square regression test
/// freezes it.
pub fn delaunay(sites: Vec<[f64; 2]>, metric: Metric) -> Result<VoronoiComplex> {
    if sites.len() < 3 {
        return Err(Error::degenerate(format!(
            "need at least 3 sites, got {}",
            sites.len()
        )));
    }
    let mut seen = HashSet::with_capacity(sites.len());
    for p in &sites {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(Error::domain("non-finite site coordinates"));
        }
        if !seen.insert((p[0].to_bits(), p[1].to_bits())) {
            return Err(Error::degenerate("duplicate sites"));
        }
    }
    let pts: Vec<delaunator::Point> = sites
        .iter()
        .map(|p| delaunator::Point { x: p[0], y: p[1] })
        .collect();
    let tri = delaunator::triangulate(&pts);
    if tri.triangles.is_empty() {
        return Err(Error::degenerate("all sites collinear"));
    }

    let nfaces = tri.triangles.len() / 3;
    let mut circumcenters = Vec::with_capacity(nfaces);
    for f in 0..nfaces {
        let (a, b, c) = (
            sites[tri.triangles[3 * f]],
            sites[tri.triangles[3 * f + 1]],
            sites[tri.triangles[3 * f + 2]],
        );
        circumcenters.push(circumcenter(a, b, c));
    }

    let mut edges = Vec::new();
    let mut edge_halfedge = Vec::new();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); sites.len()];
    for e in 0..tri.triangles.len() {
        let i = tri.triangles[e];
        let j = tri.triangles[next_halfedge(e)];
        // emit each undirected edge once
        if tri.halfedges[e] == EMPTY || e < tri.halfedges[e] {
            edges.push((i.min(j), i.max(j)));
            edge_halfedge.push(e);
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
    }
    for n in &mut neighbors {
        n.sort_unstable();
    }

    Ok(VoronoiComplex {
        sites,
        metric,
        triangles: tri.triangles,
        halfedges: tri.halfedges,
        hull: tri.hull,
        circumcenters,
        edges,
        edge_halfedge,
        neighbors,
    })
}

fn next_halfedge(e: usize) -> usize {
    if e % 3 == 2 {
        e - 2
    } else {
        e + 1
    }
}

impl VoronoiComplex {
    pub fn face_count(&self) -> usize {
        self.triangles.len() / 3
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.neighbors[site]
    }

    /// The two endpoints (site indices) of a halfedge.
    pub fn halfedge_sites(&self, e: usize) -> (usize, usize) {
        (self.triangles[e], self.triangles[next_halfedge(e)])
    }

    /// The Voronoi edge dual to the Delaunay edge carried by halfedge `e`.
    pub fn dual_edge(&self, e: usize) -> DualEdge {
        let twin = self.halfedges[e];
        if twin != EMPTY {
            return DualEdge::Segment(self.circumcenters[e / 3], self.circumcenters[twin / 3]);
        }
        // Hull edge: ray perpendicular to the edge, pointing away from the
        // face's third vertex.
        let (i, j) = self.halfedge_sites(e);
        let (zi, zj) = (self.sites[i], self.sites[j]);
        let mid = [(zi[0] + zj[0]) / 2.0, (zi[1] + zj[1]) / 2.0];
        let mut dir = [zj[1] - zi[1], zi[0] - zj[0]];
        let n = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        dir = [dir[0] / n, dir[1] / n];
        let face = e / 3;
        let k = (0..3)
            .map(|t| self.triangles[3 * face + t])
            .find(|s| *s != i && *s != j)
            .expect("face has a third vertex");
        let zk = self.sites[k];
        if dir[0] * (zk[0] - mid[0]) + dir[1] * (zk[1] - mid[1]) > 0.0 {
            dir = [-dir[0], -dir[1]];
        }
        DualEdge::Ray {
            origin: self.circumcenters[face],
            dir,
        }
    }
}

/// True iff `(i, j)` is a Delaunay edge of the complex.
pub fn euclid_adjacent(i: usize, j: usize, complex: &VoronoiComplex) -> Result<bool> {
    if i == j || i >= complex.sites.len() || j >= complex.sites.len() {
        return Err(Error::domain("adjacency query with invalid site indices"));
    }
    Ok(complex.neighbors[i].binary_search(&j).is_ok())
}

/// Exact Euclidean empty-disk test, independent of any triangulation:
/// true iff some disk has `sites[i]`, `sites[j]` on its boundary and no
/// other site in its open interior. Candidate centers sweep the bisector
/// line; each other site excludes an open half-line of the parameter.
pub fn euclid_empty_disk(i: usize, j: usize, sites: &[[f64; 2]]) -> Result<bool> {
    let (lo, hi) = bisector_allowed_interval(i, j, sites)?;
    Ok(lo <= hi)
}

/// Allowed parameter interval `[lo, hi]` on the bisector of sites i, j
/// (centers `c(s) = m + s t`); empty iff `lo > hi`. Infinite bounds are
/// `f64::INFINITY`.
fn bisector_allowed_interval(i: usize, j: usize, sites: &[[f64; 2]]) -> Result<(f64, f64)> {
    let (z1, z2) = (sites[i], sites[j]);
    if i == j || (z1[0] == z2[0] && z1[1] == z2[1]) {
        return Err(Error::domain("empty-disk query needs distinct sites"));
    }
    let m = [(z1[0] + z2[0]) / 2.0, (z1[1] + z2[1]) / 2.0];
    let d = [z2[0] - z1[0], z2[1] - z1[1]];
    let dn = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let t = [-d[1] / dn, d[0] / dn];
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (k, z3) in sites.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        // z3 strictly inside the disk centered c(s) through z1 iff
        // 2 c(s).(z1 - z3) < |z1|^2 - |z3|^2; the allowed (closed)
        // complement is alpha s + beta >= 0.
        let w = [z1[0] - z3[0], z1[1] - z3[1]];
        let alpha = 2.0 * (t[0] * w[0] + t[1] * w[1]);
        let beta = 2.0 * (m[0] * w[0] + m[1] * w[1])
            - (z1[0] * z1[0] + z1[1] * z1[1] - (z3[0] * z3[0] + z3[1] * z3[1]));
        if alpha > 0.0 {
            lo = lo.max(-beta / alpha);
        } else if alpha < 0.0 {
            hi = hi.min(-beta / alpha);
        } else if beta < 0.0 {
            return Ok((1.0, 0.0)); // z3 inside every candidate disk
        }
    }
    Ok((lo, hi))
}

/// Outcome of the hyperbolic adjacency decision.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    pub adjacent: bool,
    /// Adjacency holds, but every witness disk exits the sampling window;
    /// on a finite sample the answer may differ from the infinite process.
    pub boundary_uncertain: bool,
}

/// Exact hyperbolic empty-disk adjacency: true iff some hyperbolic disk has
/// both sites on its boundary and no other site in its interior.
///
/// Hyperbolic disks are Euclidean disks inside the unit disk, so this is the
/// Euclidean bisector sweep with the extra convex constraint
/// `|c(s)| + |c(s) - z1| < 1`. `window_euclid_radius`, when given, is the
/// Euclidean radius of the sampling window used for the boundary-uncertain
/// flag.
pub fn hyp_adjacent(
    i: usize,
    j: usize,
    sites: &[[f64; 2]],
    window_euclid_radius: Option<f64>,
) -> Result<Adjacency> {
    for z in sites {
        if z[0] * z[0] + z[1] * z[1] >= 1.0 {
            return Err(Error::domain("site outside the unit disk"));
        }
    }
    let (mut lo, mut hi) = bisector_allowed_interval(i, j, sites)?;
    if lo > hi {
        return Ok(Adjacency {
            adjacent: false,
            boundary_uncertain: false,
        });
    }
    let (z1, z2) = (sites[i], sites[j]);
    let m = [(z1[0] + z2[0]) / 2.0, (z1[1] + z2[1]) / 2.0];
    let d = [z2[0] - z1[0], z2[1] - z1[1]];
    let dn = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let t = [-d[1] / dn, d[0] / dn];
    // psi(s) = |c(s)| + radius(s) is convex and >= |s| - |m|, so the
    // disk-in-unit-disk region lies within |s| <= |m| + 1.
    let psi = |s: f64| {
        let c = [m[0] + s * t[0], m[1] + s * t[1]];
        let cn = (c[0] * c[0] + c[1] * c[1]).sqrt();
        let r = ((c[0] - z1[0]).powi(2) + (c[1] - z1[1]).powi(2)).sqrt();
        cn + r
    };
    let bound = m[0].hypot(m[1]) + 1.0;
    lo = lo.max(-bound);
    hi = hi.min(bound);
    if lo > hi {
        // witnesses exist but all are too large to fit in the unit disk,
        // let alone the window
        return Ok(Adjacency {
            adjacent: false,
            boundary_uncertain: window_euclid_radius.is_some(),
        });
    }
    // ternary search for the minimum of the convex psi on [lo, hi]
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if psi(m1) <= psi(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let psi_min = psi((a + b) / 2.0).min(psi(lo)).min(psi(hi));
    let adjacent = psi_min < 1.0;
    // Every Euclidean witness disk exits the window (this includes the case
    // where the only witnesses exit the unit disk itself): the finite-sample
    // answer may differ from the infinite process, in either direction.
    let boundary_uncertain = match window_euclid_radius {
        Some(r) => psi_min > r,
        None => false,
    };
    Ok(Adjacency {
        adjacent,
        boundary_uncertain,
    })
}

/// Clips the (Euclidean) Voronoi cell of a site to a convex polygon, by
/// half-plane intersection against the site's Delaunay-neighbor bisectors.
/// Vertices introduced on the polygon boundary keep exact boundary
/// coordinates (intersections interpolate along polygon edges).
pub fn cell_clip_poly(
    site: usize,
    poly: &[[f64; 2]],
    complex: &VoronoiComplex,
) -> Vec<[f64; 2]> {
    let z = complex.sites[site];
    let mut cur: Vec<[f64; 2]> = poly.to_vec();
    for &nb in complex.neighbors(site).iter() {
        if cur.is_empty() {
            break;
        }
        let w = complex.sites[nb];
        // keep points x with 2 x.(w - z) <= |w|^2 - |z|^2
        let a = [2.0 * (w[0] - z[0]), 2.0 * (w[1] - z[1])];
        let b = w[0] * w[0] + w[1] * w[1] - (z[0] * z[0] + z[1] * z[1]);
        cur = clip_halfplane(&cur, a, b);
    }
    cur
}

/// Clips the Voronoi cell of a site to an axis-parallel rectangle.
pub fn cell_clip(
    site: usize,
    rect: [f64; 4],
    complex: &VoronoiComplex,
) -> Vec<[f64; 2]> {
    let [x0, y0, x1, y1] = rect;
    cell_clip_poly(
        site,
        &[[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        complex,
    )
}

/// Sutherland-Hodgman step: keep `a.x <= b`.
fn clip_halfplane(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let fp = a[0] * p[0] + a[1] * p[1] - b;
        let fq = a[0] * q[0] + a[1] * q[1] - b;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Signed polygon area (shoelace).
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    s / 2.0
}

fn metric_distance(u: [f64; 2], v: [f64; 2], metric: Metric) -> f64 {
    let dx = u[0] - v[0];
    let dy = u[1] - v[1];
    let de = (dx * dx + dy * dy).sqrt();
    match metric {
        Metric::Euclidean => de,
        Metric::Hyperbolic => {
            let den = (1.0 - u[0] * u[0] - u[1] * u[1]) * (1.0 - v[0] * v[0] - v[1] * v[1]);
            2.0 * (de / den.sqrt()).asinh()
        }
    }
}

/// Linear-scan nearest site under the requested metric; ties go to the
/// lowest index.
pub fn nearest_site(u: [f64; 2], sites: &[[f64; 2]], metric: Metric) -> Result<usize> {
    if sites.is_empty() {
        return Err(Error::domain("nearest-site query on empty site set"));
    }
    let mut best = 0;
    let mut bd = metric_distance(u, sites[0], metric);
    for (k, z) in sites.iter().enumerate().skip(1) {
        let d = metric_distance(u, *z, metric);
        if d < bd {
            bd = d;
            best = k;
        }
    }
    Ok(best)
}

/// Uniform-grid nearest-site index; answers match [`nearest_site`] exactly.
pub struct NearestIndex<'a> {
    sites: &'a [[f64; 2]],
    metric: Metric,
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> NearestIndex<'a> {
    pub fn new(sites: &'a [[f64; 2]], metric: Metric) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::domain("nearest-site index on empty site set"));
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in sites {
            x0 = x0.min(p[0]);
            y0 = y0.min(p[1]);
            x1 = x1.max(p[0]);
            y1 = y1.max(p[1]);
        }
        let extent = (x1 - x0).max(y1 - y0).max(1e-12);
        let n = (sites.len() as f64).sqrt().ceil() as usize;
        let cell = extent / n as f64;
        let nx = ((x1 - x0) / cell).floor() as usize + 1;
        let ny = ((y1 - y0) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (k, p) in sites.iter().enumerate() {
            let ix = (((p[0] - x0) / cell) as usize).min(nx - 1);
            let iy = (((p[1] - y0) / cell) as usize).min(ny - 1);
            buckets[iy * nx + ix].push(k as u32);
        }
        Ok(NearestIndex {
            sites,
            metric,
            x0,
            y0,
            cell,
            nx,
            ny,
            buckets,
        })
    }

    pub fn query(&self, u: [f64; 2]) -> usize {
        // clamp the start cell into the grid: queries outside the site
        // bounding box otherwise ring-search empty space and miss every
        // bucket; the ring lower bound below stays valid because the true
        // distance from u only exceeds the inter-cell distance
        let cx = (((u[0] - self.x0) / self.cell).floor() as i64).clamp(0, self.nx as i64 - 1);
        let cy = (((u[1] - self.y0) / self.cell).floor() as i64).clamp(0, self.ny as i64 - 1);
        let mut best = usize::MAX;
        let mut bd = f64::INFINITY;
        let max_ring = self.nx.max(self.ny) as i64 + 1;
        for ring in 0..=max_ring {
            // once the ring's closest possible point is provably farther
            // than the incumbent, stop; the hyperbolic metric dominates the
            // Euclidean one pointwise (2 asinh(d) with denominators <= 1)
            if best != usize::MAX && ring > 0 {
                let de_min = (ring - 1).max(0) as f64 * self.cell;
                let lower = match self.metric {
                    Metric::Euclidean => de_min,
                    Metric::Hyperbolic => 2.0 * de_min.asinh(),
                };
                if lower > bd {
                    break;
                }
            }
            for (ix, iy) in ring_cells(cx, cy, ring) {
                if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
                    continue;
                }
                for &k in &self.buckets[iy as usize * self.nx + ix as usize] {
                    let k = k as usize;
                    let d = metric_distance(u, self.sites[k], self.metric);
                    if d < bd || (d == bd && k < best) {
                        bd = d;
                        best = k;
                    }
                }
            }
        }
        best
    }
}

fn ring_cells(cx: i64, cy: i64, ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![(cx, cy)];
    }
    let mut out = Vec::with_capacity((8 * ring) as usize);
    for dx in -ring..=ring {
        out.push((cx + dx, cy - ring));
        out.push((cx + dx, cy + ring));
    }
    for dy in (1 - ring)..ring {
        out.push((cx - ring, cy + dy));
        out.push((cx + ring, cy + dy));
    }
    out
}
