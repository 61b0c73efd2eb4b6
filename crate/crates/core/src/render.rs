//! Deterministic SVG rendering: Voronoi colorings in the disk, the
//! triangle tessellation, rectangle overlays. Pure functions of their
//! inputs; identical inputs give byte-identical documents.

use crate::error::{Error, Result};
use crate::geometry::{euclid_circle_to_hyp, Carrier, Geodesic, PoincarePoint};
use crate::percolation::Rect;
use crate::pointprocess::{Color, MarkedConfiguration};
use crate::tiling::{ClosedEventGeometry, Tiling};
use crate::voronoi::{cell_clip_poly, VoronoiComplex};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Canvas edge in pixels (square canvas, at least 64).
    pub size_px: u32,
    /// Fill for black cells; light blue by default so the black stroke work
    /// stays readable.
    pub black_fill: String,
    pub white_fill: String,
    pub stroke: String,
    pub stroke_width: f64,
    /// Draw cell boundaries as hyperbolic geodesic arcs instead of straight
    /// segments.
    pub hyperbolic_edges: bool,
    /// Clip all cell geometry to the unit disk.
    pub clip_to_disk: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            size_px: 800,
            black_fill: "#9ecfff".into(),
            white_fill: "#ffffff".into(),
            stroke: "#333333".into(),
            stroke_width: 1.0,
            hyperbolic_edges: false,
            clip_to_disk: true,
        }
    }
}

fn validate_color(c: &str) -> bool {
    c.len() == 7
        && c.starts_with('#')
        && c[1..].bytes().all(|b| b.is_ascii_hexdigit())
}

fn validate_options(o: &RenderOptions) -> Result<()> {
    if o.size_px < 64 {
        return Err(Error::domain("canvas must be at least 64 px"));
    }
    for c in [&o.black_fill, &o.white_fill, &o.stroke] {
        if !validate_color(c) {
            return Err(Error::domain(format!("invalid color {c:?}")));
        }
    }
    Ok(())
}

/// Disk-to-canvas map: `[-extent, extent]^2` onto the canvas, y up.
struct Canvas {
    size: f64,
    extent: f64,
}

impl Canvas {
    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        (
            (p[0] / self.extent + 1.0) / 2.0 * self.size,
            (1.0 - p[1] / self.extent) / 2.0 * self.size,
        )
    }
}

fn fmt_px(v: f64) -> String {
    // fixed precision keeps documents byte-stable across platforms
    format!("{v:.3}")
}

fn svg_open(buf: &mut String, size: u32) {
    let _ = write!(
        buf,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">\n"
    );
}

fn unit_circle(buf: &mut String, canvas: &Canvas, opts: &RenderOptions) {
    let (cx, cy) = canvas.px([0.0, 0.0]);
    let r = canvas.size / (2.0 * canvas.extent);
    let _ = write!(
        buf,
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
        fmt_px(cx),
        fmt_px(cy),
        fmt_px(r),
        opts.stroke,
        opts.stroke_width
    );
}

fn polygon_path(canvas: &Canvas, poly: &[[f64; 2]]) -> String {
    let mut d = String::new();
    for (k, p) in poly.iter().enumerate() {
        let (x, y) = canvas.px(*p);
        let _ = write!(d, "{}{} {}", if k == 0 { "M" } else { "L" }, fmt_px(x), fmt_px(y));
        if k + 1 < poly.len() {
            d.push(' ');
        }
    }
    d.push('Z');
    d
}

/// Clips a polygon to the convex region `x . n <= off` for each constraint.
fn clip_convex(mut poly: Vec<[f64; 2]>, constraints: &[([f64; 2], f64)]) -> Vec<[f64; 2]> {
    for &(n, off) in constraints {
        if poly.is_empty() {
            break;
        }
        let m = poly.len();
        let mut out = Vec::with_capacity(m + 1);
        for k in 0..m {
            let p = poly[k];
            let q = poly[(k + 1) % m];
            let fp = off - (n[0] * p[0] + n[1] * p[1]);
            let fq = off - (n[0] * q[0] + n[1] * q[1]);
            if fp >= 0.0 {
                out.push(p);
            }
            if (fp < 0.0) != (fq < 0.0) {
                let t = fp / (fp - fq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        poly = out;
    }
    poly
}

/// Half-plane constraints of a regular `n`-gon inscribed in the unit circle
/// (conservative disk clip: everything kept is inside the disk).
fn disk_constraints(n: usize) -> Vec<([f64; 2], f64)> {
    let apothem = (std::f64::consts::PI / n as f64).cos();
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
            ([a.cos(), a.sin()], apothem)
        })
        .collect()
}

/// Voronoi cells clipped to the viewport (and optionally the disk), with
/// their colors. Shared by the renderer and its tests.
pub(crate) fn cell_polygons(
    config: &MarkedConfiguration,
    complex: &VoronoiComplex,
    extent: f64,
    clip_to_disk: bool,
) -> Vec<(Color, Vec<[f64; 2]>)> {
    let frame = vec![
        [-extent, -extent],
        [extent, -extent],
        [extent, extent],
        [-extent, extent],
    ];
    let disk = disk_constraints(128);
    let mut out = Vec::with_capacity(config.points.len());
    for i in 0..config.points.len() {
        let mut poly = cell_clip_poly(i, &frame, complex);
        if clip_to_disk {
            poly = clip_convex(poly, &disk);
        }
        if poly.len() >= 3 {
            out.push((config.marks[i], poly));
        }
    }
    out
}

/// The hyperbolic Voronoi edges as geodesic arcs: for each Delaunay edge
/// whose two incident faces both have their circumdisk inside the unit
/// disk, the bisector geodesic between the faces' hyperbolic circumcenters.
/// Returns (carrier, endpoint, endpoint); hull-adjacent and
/// boundary-truncated edges are omitted.
pub(crate) fn hyperbolic_edge_arcs(
    complex: &VoronoiComplex,
) -> Vec<(Carrier, [f64; 2], [f64; 2])> {
    let hyp_center = |face: usize| -> Option<PoincarePoint> {
        let c = complex.circumcenters[face];
        let a = complex.sites[complex.triangles[3 * face]];
        let r = (c[0] - a[0]).hypot(c[1] - a[1]);
        euclid_circle_to_hyp(c, r)
            .ok()
            .and_then(|circ| circ.hyperbolic.map(|(h, _)| h))
    };
    let mut arcs = Vec::new();
    for &he in &complex.edge_halfedge {
        let twin = complex.halfedges[he];
        if twin == usize::MAX {
            continue;
        }
        let (fa, fb) = (he / 3, twin / 3);
        let (Some(ca), Some(cb)) = (hyp_center(fa), hyp_center(fb)) else {
            continue;
        };
        if (ca.x() - cb.x()).hypot(ca.y() - cb.y()) < 1e-12 {
            continue;
        }
        let Ok(geo) = Geodesic::through(&ca, &cb) else {
            continue;
        };
        arcs.push((geo.carrier, ca.xy(), cb.xy()));
    }
    arcs
}

fn arc_path(canvas: &Canvas, carrier: &Carrier, a: [f64; 2], b: [f64; 2]) -> String {
    let (ax, ay) = canvas.px(a);
    let (bx, by) = canvas.px(b);
    match *carrier {
        Carrier::Diameter { .. } => format!(
            "M{} {} L{} {}",
            fmt_px(ax),
            fmt_px(ay),
            fmt_px(bx),
            fmt_px(by)
        ),
        Carrier::Arc { center, radius } => {
            // geodesic chords are always the minor arc of the carrier
            let cross = (a[0] - center[0]) * (b[1] - center[1])
                - (a[1] - center[1]) * (b[0] - center[0]);
            // canvas y is flipped, so counterclockwise in disk coordinates
            // is sweep flag 0
            let sweep = if cross > 0.0 { 0 } else { 1 };
            let r = radius * canvas.size / (2.0 * canvas.extent);
            format!(
                "M{} {} A{} {} 0 0 {} {} {}",
                fmt_px(ax),
                fmt_px(ay),
                fmt_px(r),
                fmt_px(r),
                sweep,
                fmt_px(bx),
                fmt_px(by)
            )
        }
    }
}

/// Renders a marked configuration and its Voronoi complex. With no points
/// (pass `None` for the complex) only the unit-circle outline is emitted.
/// In hyperbolic-edge mode, cell fills use the Euclidean cells (clipped to
/// the disk) while the stroked boundaries are the geodesic bisector arcs.
pub fn render_voronoi(
    config: &MarkedConfiguration,
    complex: Option<&VoronoiComplex>,
    opts: &RenderOptions,
) -> Result<String> {
    validate_options(opts)?;
    let extent = if opts.clip_to_disk {
        1.0
    } else {
        config
            .points
            .iter()
            .flat_map(|p| [p[0].abs(), p[1].abs()])
            .fold(1.0f64, f64::max)
            * 1.05
    };
    let canvas = Canvas {
        size: opts.size_px as f64,
        extent,
    };
    let mut buf = String::new();
    svg_open(&mut buf, opts.size_px);

    if config.points.is_empty() {
        unit_circle(&mut buf, &canvas, opts);
        buf.push_str("</svg>\n");
        return Ok(buf);
    }
    let complex = complex.ok_or_else(|| {
        Error::domain("non-empty configuration needs its Voronoi complex")
    })?;
    if complex.sites.len() != config.points.len() || config.marks.len() != config.points.len()
    {
        return Err(Error::domain("configuration and complex do not match"));
    }

    for (color, poly) in cell_polygons(config, complex, extent, opts.clip_to_disk) {
        let fill = match color {
            Color::Black => &opts.black_fill,
            Color::White => &opts.white_fill,
        };
        let stroke = if opts.hyperbolic_edges {
            "none".to_string()
        } else {
            opts.stroke.clone()
        };
        let _ = write!(
            buf,
            "<path d=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
            polygon_path(&canvas, &poly),
            fill,
            stroke,
            opts.stroke_width
        );
    }
    if opts.hyperbolic_edges {
        for (carrier, a, b) in hyperbolic_edge_arcs(complex) {
            let _ = write!(
                buf,
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
                arc_path(&canvas, &carrier, a, b),
                opts.stroke,
                opts.stroke_width
            );
        }
    }
    unit_circle(&mut buf, &canvas, opts);
    buf.push_str("</svg>\n");
    Ok(buf)
}

fn triangle_path(canvas: &Canvas, vertices: &[PoincarePoint; 3]) -> Result<String> {
    let mut d = String::new();
    for k in 0..3 {
        let (a, b) = (&vertices[k], &vertices[(k + 1) % 3]);
        let geo = Geodesic::through(a, b)?;
        let piece = arc_path(canvas, &geo.carrier, a.xy(), b.xy());
        if k == 0 {
            d.push_str(&piece);
        } else {
            // continue from the current point: strip the moveto
            let trimmed = piece
                .split_once(' ')
                .and_then(|(_, rest)| rest.split_once(' '))
                .map(|(_, rest)| rest)
                .unwrap_or("");
            d.push(' ');
            d.push_str(trimmed);
        }
    }
    d.push('Z');
    Ok(d)
}

/// Renders a tessellation patch: geodesic triangle sides as arcs, optional
/// highlighted tiles, optional six-rectangle overlay.
pub fn render_tiling(
    tiling: &Tiling,
    highlighted: &[usize],
    overlay: Option<&ClosedEventGeometry>,
    opts: &RenderOptions,
) -> Result<String> {
    validate_options(opts)?;
    let canvas = Canvas {
        size: opts.size_px as f64,
        extent: 1.0,
    };
    let mut buf = String::new();
    svg_open(&mut buf, opts.size_px);

    for tile in &tiling.tiles {
        let fill = if highlighted.contains(&tile.id) {
            &opts.black_fill
        } else {
            &opts.white_fill
        };
        let _ = write!(
            buf,
            "<path d=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
            triangle_path(&canvas, &tile.vertices)?,
            fill,
            opts.stroke,
            opts.stroke_width
        );
    }
    if let Some(geom) = overlay {
        for rect in &geom.rects {
            let poly: Vec<[f64; 2]> = rect.corners().to_vec();
            let _ = write!(
                buf,
                "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
                polygon_path(&canvas, &poly),
                opts.stroke,
                opts.stroke_width * 1.5
            );
        }
    }
    unit_circle(&mut buf, &canvas, opts);
    buf.push_str("</svg>\n");
    Ok(buf)
}

/// Renders a crossing instance: cells, the rectangle outline, and the
/// witness path sites (drawn as dots) if provided.
pub fn render_crossing(
    config: &MarkedConfiguration,
    complex: &VoronoiComplex,
    rect: &Rect,
    witness: &[usize],
    opts: &RenderOptions,
) -> Result<String> {
    let base = render_voronoi(config, Some(complex), opts)?;
    let canvas = Canvas {
        size: opts.size_px as f64,
        extent: 1.0,
    };
    let mut buf = base
        .strip_suffix("</svg>\n")
        .unwrap_or(&base)
        .to_string();
    let poly: Vec<[f64; 2]> = rect.corners().to_vec();
    let _ = write!(
        buf,
        "<path d=\"{}\" fill=\"none\" stroke=\"#cc0000\" stroke-width=\"{}\"/>\n",
        polygon_path(&canvas, &poly),
        opts.stroke_width * 2.0
    );
    for &s in witness {
        let (x, y) = canvas.px(config.points[s]);
        let _ = write!(
            buf,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#cc0000\"/>\n",
            fmt_px(x),
            fmt_px(y)
        );
    }
    buf.push_str("</svg>\n");
    Ok(buf)
}
