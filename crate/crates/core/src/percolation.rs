//! Plane coloring induced by a marked configuration: rectangle crossings,
//! the grid local event, cluster extraction, and a rasterization oracle.
//!
//! Crossing detection is a union-find over same-color sites. Two sites merge
//! when their shared Voronoi edge meets the closed rectangle; a site attaches
//! to a rectangle side when its cell clipped to the rectangle touches that
//! side. All side tests happen in the rectangle's local frame, where the
//! clipper keeps boundary coordinates exact.

use crate::error::{Error, Result};
use crate::pointprocess::{Color, MarkedConfiguration};
use crate::voronoi::{DualEdge, NearestIndex, VoronoiComplex};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};

/// Crossing direction inside a rectangle's local frame.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Connect the two sides perpendicular to the width (left to right).
    AlongWidth,
    /// Connect the two sides perpendicular to the height (bottom to top).
    AlongHeight,
}

/// An oriented rectangle with a designated crossing axis.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct Rect {
    pub corner: [f64; 2],
    pub width: f64,
    pub height: f64,
    pub angle: f64,
    pub axis: Axis,
}

impl Rect {
    /// Non-square rectangle with the long-crossing default (short side to
    /// short side). Squares must use [`Rect::with_axis`].
    pub fn new(corner: [f64; 2], width: f64, height: f64, angle: f64) -> Result<Self> {
        if width == height {
            return Err(Error::domain(
                "square rectangle needs an explicit crossing axis",
            ));
        }
        let axis = if width > height {
            Axis::AlongWidth
        } else {
            Axis::AlongHeight
        };
        Rect::with_axis(corner, width, height, angle, axis)
    }

    pub fn with_axis(
        corner: [f64; 2],
        width: f64,
        height: f64,
        angle: f64,
        axis: Axis,
    ) -> Result<Self> {
        if !(width > 0.0) || !(height > 0.0) {
            return Err(Error::domain("rectangle sides must be positive"));
        }
        Ok(Rect {
            corner,
            width,
            height,
            angle,
            axis,
        })
    }

    /// World coordinates of the four corners, counterclockwise from
    /// `corner`.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (c, s) = (self.angle.cos(), self.angle.sin());
        let f = |x: f64, y: f64| {
            [
                self.corner[0] + x * c - y * s,
                self.corner[1] + x * s + y * c,
            ]
        };
        [
            f(0.0, 0.0),
            f(self.width, 0.0),
            f(self.width, self.height),
            f(0.0, self.height),
        ]
    }

    /// World point to local frame (corner at the origin, width along +x).
    pub fn to_local(&self, p: [f64; 2]) -> [f64; 2] {
        let (c, s) = (self.angle.cos(), self.angle.sin());
        let dx = p[0] - self.corner[0];
        let dy = p[1] - self.corner[1];
        [dx * c + dy * s, -dx * s + dy * c]
    }

    /// Local frame to world point.
    pub fn to_world(&self, p: [f64; 2]) -> [f64; 2] {
        let (c, s) = (self.angle.cos(), self.angle.sin());
        [
            self.corner[0] + p[0] * c - p[1] * s,
            self.corner[1] + p[0] * s + p[1] * c,
        ]
    }

    /// Euclidean distance from a world point to the (solid) rectangle.
    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        let q = self.to_local(p);
        let dx = (0.0 - q[0]).max(q[0] - self.width).max(0.0);
        let dy = (0.0 - q[1]).max(q[1] - self.height).max(0.0);
        dx.hypot(dy)
    }
}

/// Path of same-color sites realizing a crossing; consecutive sites share a
/// Voronoi edge meeting the closed rectangle, the ends touch the designated
/// sides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossingWitness {
    pub sites: Vec<usize>,
}

/// Exportable crossing decision.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub rect: Rect,
    pub color: Color,
    pub crossed: bool,
    pub witness: Option<CrossingWitness>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Closed intersection test of the segment `a + t (b - a)`, `t` in `[0, 1]`,
/// with `[0, w] x [0, h]` (slab clipping).
fn seg_hits_rect(a: [f64; 2], b: [f64; 2], w: f64, h: f64) -> bool {
    param_hits_rect(a, [b[0] - a[0], b[1] - a[1]], 1.0, w, h)
}

fn ray_hits_rect(o: [f64; 2], d: [f64; 2], w: f64, h: f64) -> bool {
    param_hits_rect(o, d, f64::INFINITY, w, h)
}

fn param_hits_rect(a: [f64; 2], d: [f64; 2], tmax: f64, w: f64, h: f64) -> bool {
    let mut t0 = 0.0f64;
    let mut t1 = tmax;
    for (p, q, hi) in [(a[0], d[0], w), (a[1], d[1], h)] {
        if q == 0.0 {
            if p < 0.0 || p > hi {
                return false;
            }
            continue;
        }
        let (mut ta, mut tb) = (-p / q, (hi - p) / q);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

/// Decides `cross(R)` for the given color, with an optional witness path.
///
/// The complex must be the Euclidean-metric Delaunay complex of the
/// configuration's points; the rectangle must lie inside the sampling
/// window (margin certification is the caller's job, via [`local_event`]).
pub fn cross(
    rect: &Rect,
    config: &MarkedConfiguration,
    color: Color,
    complex: &VoronoiComplex,
) -> Result<CrossingRecord> {
    if config.is_empty() {
        return Err(Error::domain(
            "crossing undefined for an empty configuration",
        ));
    }
    if complex.sites.len() != config.points.len() {
        return Err(Error::domain("complex does not match the configuration"));
    }
    for c in rect.corners() {
        if !config.window.contains(c) {
            return Err(Error::margin(
                "rectangle not contained in the sampling window",
            ));
        }
    }
    let n = config.points.len();
    let (w, h) = (rect.width, rect.height);
    let sites_local: Vec<[f64; 2]> = config.points.iter().map(|p| rect.to_local(*p)).collect();

    // clip each same-color cell to the local rectangle; record side touches
    let local_rect = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
    let mut touch_a: Vec<usize> = Vec::new(); // left or bottom
    let mut touch_b: Vec<usize> = Vec::new();
    let mut present = vec![false; n];
    for i in 0..n {
        if config.marks[i] != color {
            continue;
        }
        let mut cell: Vec<[f64; 2]> = local_rect.to_vec();
        let z = sites_local[i];
        for &nb in complex.neighbors(i) {
            if cell.is_empty() {
                break;
            }
            let q = sites_local[nb];
            let a = [2.0 * (q[0] - z[0]), 2.0 * (q[1] - z[1])];
            let b = q[0] * q[0] + q[1] * q[1] - (z[0] * z[0] + z[1] * z[1]);
            cell = clip_halfplane_local(&cell, a, b);
        }
        if cell.is_empty() {
            continue;
        }
        present[i] = true;
        let (ta, tb) = match rect.axis {
            Axis::AlongWidth => (
                cell.iter().any(|v| v[0] == 0.0),
                cell.iter().any(|v| v[0] == w),
            ),
            Axis::AlongHeight => (
                cell.iter().any(|v| v[1] == 0.0),
                cell.iter().any(|v| v[1] == h),
            ),
        };
        if ta {
            touch_a.push(i);
        }
        if tb {
            touch_b.push(i);
        }
    }

    // merge same-color pairs whose shared Voronoi edge meets the closed
    // rectangle
    let mut uf = UnionFind::new(n + 2);
    let (node_a, node_b) = (n, n + 1);
    let mut merges: Vec<(usize, usize)> = Vec::new();
    for (k, &(i, j)) in complex.edges.iter().enumerate() {
        if config.marks[i] != color || config.marks[j] != color {
            continue;
        }
        let hit = match complex.dual_edge(complex.edge_halfedge[k]) {
            DualEdge::Segment(p, q) => {
                seg_hits_rect(rect.to_local(p), rect.to_local(q), w, h)
            }
            DualEdge::Ray { origin, dir } => {
                let o = rect.to_local(origin);
                let e = rect.to_local([origin[0] + dir[0], origin[1] + dir[1]]);
                ray_hits_rect(o, [e[0] - o[0], e[1] - o[1]], w, h)
            }
        };
        if hit {
            uf.union(i, j);
            merges.push((i, j));
        }
    }
    for &i in &touch_a {
        uf.union(i, node_a);
    }
    for &i in &touch_b {
        uf.union(i, node_b);
    }
    let crossed = uf.find(node_a) == uf.find(node_b);

    let witness = if crossed {
        Some(CrossingWitness {
            sites: witness_path(n, &merges, &touch_a, &touch_b),
        })
    } else {
        None
    };
    Ok(CrossingRecord {
        rect: *rect,
        color,
        crossed,
        witness,
    })
}

/// BFS over the recorded merges from a side-A cell to a side-B cell.
fn witness_path(
    n: usize,
    merges: &[(usize, usize)],
    touch_a: &[usize],
    touch_b: &[usize],
) -> Vec<usize> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(i, j) in merges {
        adj.entry(i).or_default().push(j);
        adj.entry(j).or_default().push(i);
    }
    let b_set: HashSet<usize> = touch_b.iter().copied().collect();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in touch_a {
        seen[s] = true;
        queue.push_back(s);
        if b_set.contains(&s) {
            return vec![s];
        }
    }
    while let Some(u) = queue.pop_front() {
        if let Some(nbs) = adj.get(&u) {
            for &v in nbs {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                prev[v] = u;
                if b_set.contains(&v) {
                    let mut path = vec![v];
                    let mut cur = v;
                    while prev[cur] != usize::MAX {
                        cur = prev[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return path;
                }
                queue.push_back(v);
            }
        }
    }
    Vec::new() // crossing by a single cell spanning both sides is covered above
}

/// Sutherland-Hodgman step in the local frame: keep `a.x <= b`. Vertices
/// created on an axis-parallel polygon edge inherit that edge's exact
/// coordinate.
fn clip_halfplane_local(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
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
            let x = if p[0] == q[0] {
                p[0]
            } else {
                p[0] + t * (q[0] - p[0])
            };
            let y = if p[1] == q[1] {
                p[1]
            } else {
                p[1] + t * (q[1] - p[1])
            };
            out.push([x, y]);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// local event
// ---------------------------------------------------------------------------

/// Base region of the local event; the event looks at its delta-dilation.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalRegion {
    Disk { center: [f64; 2], radius: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl LocalRegion {
    fn dilated_bbox(&self, delta: f64) -> (f64, f64, f64, f64) {
        match *self {
            LocalRegion::Disk { center, radius } => (
                center[0] - radius - delta,
                center[1] - radius - delta,
                center[0] + radius + delta,
                center[1] + radius + delta,
            ),
            LocalRegion::Rect { x0, y0, x1, y1 } => {
                (x0 - delta, y0 - delta, x1 + delta, y1 + delta)
            }
        }
    }

    /// Membership in the delta-dilation (convex for both shapes).
    pub fn dilation_contains(&self, delta: f64, p: [f64; 2]) -> bool {
        match *self {
            LocalRegion::Disk { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) <= radius + delta
            }
            LocalRegion::Rect { x0, y0, x1, y1 } => {
                let dx = (x0 - p[0]).max(p[0] - x1).max(0.0);
                let dy = (y0 - p[1]).max(p[1] - y1).max(0.0);
                dx.hypot(dy) <= delta
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.dilation_contains(0.0, p)
    }
}

/// The paper-faithful grid subdivision: pitch `delta / 1000`.
pub const LOCAL_EVENT_SUBDIV: u32 = 1000;

/// `local(A, delta)` with the default grid pitch `delta / 1000`.
pub fn local_event(a: &LocalRegion, delta: f64, points: &[[f64; 2]]) -> Result<bool> {
    local_event_with_subdiv(a, delta, points, LOCAL_EVENT_SUBDIV)
}

/// `local(A, delta)` with pitch `delta / subdiv`: every grid square (grid
/// anchored at the origin) fully contained in the delta-dilation of `A`
/// must hold a point. Errors when no grid square fits.
pub fn local_event_with_subdiv(
    a: &LocalRegion,
    delta: f64,
    points: &[[f64; 2]],
    subdiv: u32,
) -> Result<bool> {
    let (pitch, squares) = local_event_squares(a, delta, subdiv)?;
    let mut occupied: HashSet<(i64, i64)> = HashSet::with_capacity(points.len());
    for p in points {
        occupied.insert(((p[0] / pitch).floor() as i64, (p[1] / pitch).floor() as i64));
    }
    Ok(squares.iter().all(|&(ix, iy)| occupied.contains(&(ix, iy))))
}

/// Enumerates the grid squares the local event requires to be occupied:
/// pitch `delta / subdiv`, grid anchored at the origin, squares fully
/// contained in the delta-dilation of `A`. Returns (pitch, square indices);
/// square `(ix, iy)` covers `[ix, ix+1] x [iy, iy+1]` times the pitch.
/// Errors when no square fits.
pub fn local_event_squares(
    a: &LocalRegion,
    delta: f64,
    subdiv: u32,
) -> Result<(f64, Vec<(i64, i64)>)> {
    if !(delta > 0.0) || subdiv == 0 {
        return Err(Error::domain("local event needs delta > 0 and subdiv > 0"));
    }
    let pitch = delta / subdiv as f64;
    let (bx0, by0, bx1, by1) = a.dilated_bbox(delta);
    let ix0 = (bx0 / pitch).floor() as i64;
    let iy0 = (by0 / pitch).floor() as i64;
    let ix1 = (bx1 / pitch).ceil() as i64;
    let iy1 = (by1 / pitch).ceil() as i64;

    let mut squares = Vec::new();
    for ix in ix0..ix1 {
        for iy in iy0..iy1 {
            let (x0, y0) = (ix as f64 * pitch, iy as f64 * pitch);
            let corners = [
                [x0, y0],
                [x0 + pitch, y0],
                [x0 + pitch, y0 + pitch],
                [x0, y0 + pitch],
            ];
            if corners.iter().all(|c| a.dilation_contains(delta, *c)) {
                squares.push((ix, iy));
            }
        }
    }
    if squares.is_empty() {
        return Err(Error::degenerate(
            "no grid square fits inside the dilated region; enlarge A or delta",
        ));
    }
    Ok((pitch, squares))
}

/// Post-conditions of the local event, verified on a probe grid over `A`:
/// every probe has a point within Euclidean distance `delta`, and its
/// hyperbolic-nearest site is one of those nearby points. Returns false
/// only on a counterexample.
pub fn locality_radius_check(
    a: &LocalRegion,
    delta: f64,
    points: &[[f64; 2]],
    probe_pitch: f64,
) -> Result<bool> {
    if points.is_empty() {
        return Err(Error::domain("locality check needs points"));
    }
    let idx_h = NearestIndex::new(points, crate::pointprocess::Metric::Hyperbolic)?;
    let idx_e = NearestIndex::new(points, crate::pointprocess::Metric::Euclidean)?;
    let (bx0, by0, bx1, by1) = a.dilated_bbox(0.0);
    let nx = ((bx1 - bx0) / probe_pitch).ceil() as i64 + 1;
    let ny = ((by1 - by0) / probe_pitch).ceil() as i64 + 1;
    for ix in 0..nx {
        for iy in 0..ny {
            let u = [bx0 + ix as f64 * probe_pitch, by0 + iy as f64 * probe_pitch];
            if !a.contains(u) {
                continue;
            }
            let ze = points[idx_e.query(u)];
            if (u[0] - ze[0]).hypot(u[1] - ze[1]) >= delta {
                return Ok(false);
            }
            let zh = points[idx_h.query(u)];
            if (u[0] - zh[0]).hypot(u[1] - zh[1]) >= delta {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// clusters
// ---------------------------------------------------------------------------

/// Connected component of same-color sites under cell adjacency.
pub fn cluster(
    config: &MarkedConfiguration,
    complex: &VoronoiComplex,
    color: Color,
    start: usize,
) -> Result<Vec<usize>> {
    if start >= config.points.len() {
        return Err(Error::domain("cluster start out of range"));
    }
    if config.marks[start] != color {
        return Err(Error::domain("cluster start has the wrong color"));
    }
    let mut seen = vec![false; config.points.len()];
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    seen[start] = true;
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        out.push(u);
        for &v in complex.neighbors(u) {
            if !seen[v] && config.marks[v] == color {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

// ---------------------------------------------------------------------------
// rasterization oracle
// ---------------------------------------------------------------------------

/// Pixel-BFS crossing decision: rasterize the coloring on a grid over the
/// rectangle (nearest Euclidean site per pixel center) and search an
/// 8-connected monochromatic pixel path between the designated sides.
/// Finite resolution is this oracle's documented error source.
pub fn raster_crossing(
    rect: &Rect,
    points: &[[f64; 2]],
    marks: &[Color],
    color: Color,
    resolution: usize,
) -> Result<bool> {
    if points.is_empty() {
        return Err(Error::domain("rasterization needs points"));
    }
    let idx = NearestIndex::new(points, crate::pointprocess::Metric::Euclidean)?;
    let (nx, ny) = match rect.axis {
        Axis::AlongWidth | Axis::AlongHeight => {
            let aspect = rect.height / rect.width;
            let nx = resolution.max(2);
            let ny = ((resolution as f64 * aspect).round() as usize).max(2);
            (nx, ny)
        }
    };
    let mut grid = vec![false; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let u = rect.to_world([
                (ix as f64 + 0.5) / nx as f64 * rect.width,
                (iy as f64 + 0.5) / ny as f64 * rect.height,
            ]);
            grid[iy * nx + ix] = marks[idx.query(u)] == color;
        }
    }
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    let horizontal = rect.axis == Axis::AlongWidth;
    for k in 0..(if horizontal { ny } else { nx }) {
        let id = if horizontal { k * nx } else { k };
        if grid[id] {
            seen[id] = true;
            queue.push_back(id);
        }
    }
    while let Some(id) = queue.pop_front() {
        let (ix, iy) = (id % nx, id / nx);
        if (horizontal && ix == nx - 1) || (!horizontal && iy == ny - 1) {
            return Ok(true);
        }
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                    continue;
                }
                let jd = jy as usize * nx + jx as usize;
                if grid[jd] && !seen[jd] {
                    seen[jd] = true;
                    queue.push_back(jd);
                }
            }
        }
    }
    Ok(false)
}
