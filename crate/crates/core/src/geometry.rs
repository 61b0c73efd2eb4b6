//! Primitives of the Poincaré disk model: distances, areas, circles,
//! geodesics, disk isometries and the (7,7,7) base triangle.
//!
//! All hyperbolic quantities are derived from Euclidean coordinates in the
//! open unit disk. The metric is
//! `dist(u,v) = 2 asinh(|u-v| / sqrt((1-|u|^2)(1-|v|^2)))`
//! and the area density is `4/(1-x^2-y^2)^2`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Points with Euclidean norm at least `1 - BOUNDARY_GUARD` are rejected:
/// `1 - |u|^2` underflows catastrophically beyond that, and every
/// construction in this crate lives in a compact subset of the disk.
pub const BOUNDARY_GUARD: f64 = 1e-12;

// ---------------------------------------------------------------------------
// complex helpers (internal)
// ---------------------------------------------------------------------------

/// Minimal complex arithmetic; enough for Möbius transforms.
#[derive(Copy, Clone, Debug, PartialEq)]
pub(crate) struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
    pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }
    pub fn from_polar(r: f64, theta: f64) -> Self {
        C64::new(r * theta.cos(), r * theta.sin())
    }
    pub fn conj(self) -> Self {
        C64::new(self.re, -self.im)
    }
    pub fn norm_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }
    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }
    pub fn add(self, o: C64) -> Self {
        C64::new(self.re + o.re, self.im + o.im)
    }
    pub fn mul(self, o: C64) -> Self {
        C64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
    pub fn div(self, o: C64) -> Self {
        let d = o.norm_sq();
        C64::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
    pub fn neg(self) -> Self {
        C64::new(-self.re, -self.im)
    }
}

// ---------------------------------------------------------------------------
// points
// ---------------------------------------------------------------------------

/// A point of the open unit disk; the carrier of all hyperbolic data.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincarePoint {
    x: f64,
    y: f64,
}

impl PoincarePoint {
    /// Rejects points with `|u| >= 1 - BOUNDARY_GUARD` or non-finite
    /// coordinates.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::domain("non-finite coordinates"));
        }
        let n2 = x * x + y * y;
        let lim = 1.0 - BOUNDARY_GUARD;
        if n2 >= lim * lim {
            return Err(Error::domain(format!(
                "point ({x}, {y}) too close to the disk boundary (|u| = {})",
                n2.sqrt()
            )));
        }
        Ok(PoincarePoint { x, y })
    }

    pub fn origin() -> Self {
        PoincarePoint { x: 0.0, y: 0.0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }
    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
    pub(crate) fn to_c(self) -> C64 {
        C64::new(self.x, self.y)
    }
    pub(crate) fn from_c(z: C64) -> Result<Self> {
        PoincarePoint::new(z.re, z.im)
    }
}

/// Hyperbolic distance between two disk points.
pub fn hyp_distance(u: &PoincarePoint, v: &PoincarePoint) -> f64 {
    let dx = u.x - v.x;
    let dy = u.y - v.y;
    let d2 = dx * dx + dy * dy;
    let den = (1.0 - u.norm_sq()) * (1.0 - v.norm_sq());
    2.0 * (d2.sqrt() / den.sqrt()).asinh()
}

/// Area density of the Poincaré disk model at Euclidean position (x, y).
#[inline]
pub fn density(x: f64, y: f64) -> f64 {
    let t = 1.0 - x * x - y * y;
    4.0 / (t * t)
}

/// Hyperbolic distance from the origin to Euclidean radius `e` (0 <= e < 1).
#[inline]
pub fn radial_hyp_distance(e: f64) -> f64 {
    2.0 * e.atanh()
}

/// Euclidean radius of the point at hyperbolic distance `d` from the origin.
#[inline]
pub fn radial_euclid_distance(d: f64) -> f64 {
    (d / 2.0).tanh()
}

// ---------------------------------------------------------------------------
// circles
// ---------------------------------------------------------------------------

/// A Euclidean circle, optionally carrying its hyperbolic descriptor when it
/// lies strictly inside the unit disk (conformal correspondence: every
/// hyperbolic circle is a Euclidean circle and vice versa).
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
    /// `(hyperbolic center, hyperbolic radius)`, present iff the circle is
    /// contained in the disk.
    pub hyperbolic: Option<(PoincarePoint, f64)>,
}

/// Converts a hyperbolic circle (center, hyperbolic radius) to Euclidean
/// center/radius. The circle endpoints on the radial line through the
/// center sit at hyperbolic distances `D ± rho` from the origin, and the
/// Euclidean circle is the one with those diameter endpoints.
pub fn hyp_circle_to_euclid(center: &PoincarePoint, rho: f64) -> Circle {
    let e = center.norm();
    let (dx, dy) = if e < 1e-300 {
        (1.0, 0.0)
    } else {
        (center.x() / e, center.y() / e)
    };
    let big_d = radial_hyp_distance(e);
    let near = radial_euclid_distance(big_d - rho); // signed
    let far = radial_euclid_distance(big_d + rho);
    let c = (near + far) / 2.0;
    let r = (far - near) / 2.0;
    Circle {
        center: [c * dx, c * dy],
        radius: r,
        hyperbolic: Some((*center, rho)),
    }
}

/// Inverse of [`hyp_circle_to_euclid`]: defined for circles strictly inside
/// the unit disk.
pub fn euclid_circle_to_hyp(center: [f64; 2], radius: f64) -> Result<Circle> {
    let e = (center[0] * center[0] + center[1] * center[1]).sqrt();
    if !(radius > 0.0) && radius != 0.0 {
        return Err(Error::domain("circle radius must be nonnegative"));
    }
    if e + radius >= 1.0 - BOUNDARY_GUARD {
        return Err(Error::domain(
            "circle not strictly inside the unit disk; no hyperbolic descriptor",
        ));
    }
    let (dx, dy) = if e < 1e-300 {
        (1.0, 0.0)
    } else {
        (center[0] / e, center[1] / e)
    };
    let a = 2.0 * (e - radius).atanh(); // signed hyperbolic coordinate
    let b = 2.0 * (e + radius).atanh();
    let hc = radial_euclid_distance((a + b) / 2.0);
    let hrho = (b - a) / 2.0;
    let hcenter = PoincarePoint::new(hc * dx, hc * dy)?;
    Ok(Circle {
        center,
        radius,
        hyperbolic: Some((hcenter, hrho)),
    })
}

// ---------------------------------------------------------------------------
// isometries
// ---------------------------------------------------------------------------

/// An isometry of the hyperbolic plane in the disk model, stored as
/// `(anchor, rotation, orientation)`: the anchor is the point mapped to the
/// origin and the rotation acts afterwards. Direct maps are
/// `z -> e^{i theta} (z - a)/(1 - conj(a) z)`; reflective maps conjugate the
/// argument first.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct DiskIsometry {
    anchor: [f64; 2],
    rotation: f64,
    reflect: bool,
}

/// Möbius matrix `z -> (A z + B)/(C z + D)`, with optional pre-conjugation.
#[derive(Copy, Clone, Debug)]
struct Mobius {
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    conj_first: bool,
}

impl Mobius {
    fn apply(&self, z: C64) -> C64 {
        let w = if self.conj_first { z.conj() } else { z };
        self.a.mul(w).add(self.b).div(self.c.mul(w).add(self.d))
    }

    /// Matrix product respecting conjugation flags; `self` applied last.
    fn compose(&self, first: &Mobius) -> Mobius {
        // If self conjugates, it acts on conj(first(z)) = conj(M1)(conj z).
        let m1 = if self.conj_first {
            (first.a.conj(), first.b.conj(), first.c.conj(), first.d.conj())
        } else {
            (first.a, first.b, first.c, first.d)
        };
        Mobius {
            a: self.a.mul(m1.0).add(self.b.mul(m1.2)),
            b: self.a.mul(m1.1).add(self.b.mul(m1.3)),
            c: self.c.mul(m1.0).add(self.d.mul(m1.2)),
            d: self.c.mul(m1.1).add(self.d.mul(m1.3)),
            conj_first: self.conj_first ^ first.conj_first,
        }
    }

    fn inverse(&self) -> Mobius {
        if self.conj_first {
            // (z -> M(conj z))^{-1} = z -> conj(M^{-1})(conj z)
            Mobius {
                a: self.d.conj(),
                b: self.b.neg().conj(),
                c: self.c.neg().conj(),
                d: self.a.conj(),
                conj_first: true,
            }
        } else {
            Mobius {
                a: self.d,
                b: self.b.neg(),
                c: self.c.neg(),
                d: self.a,
                conj_first: false,
            }
        }
    }
}

impl DiskIsometry {
    pub fn identity() -> Self {
        DiskIsometry {
            anchor: [0.0, 0.0],
            rotation: 0.0,
            reflect: false,
        }
    }

    /// Rotation by `theta` about the origin.
    pub fn rotation(theta: f64) -> Self {
        DiskIsometry {
            anchor: [0.0, 0.0],
            rotation: theta,
            reflect: false,
        }
    }

    /// The direct isometry mapping `a` to the origin with no extra rotation.
    pub fn point_to_origin(a: &PoincarePoint) -> Self {
        DiskIsometry {
            anchor: a.xy(),
            rotation: 0.0,
            reflect: false,
        }
    }

    pub fn new(anchor: &PoincarePoint, rotation: f64, reflect: bool) -> Self {
        DiskIsometry {
            anchor: anchor.xy(),
            rotation,
            reflect,
        }
    }

    /// Hyperbolic reflection across a geodesic (inversion in its carrier
    /// circle, or a Euclidean reflection for diameters).
    pub fn reflection(geodesic: &Geodesic) -> Self {
        let m = match geodesic.carrier {
            Carrier::Diameter { angle } => Mobius {
                a: C64::from_polar(1.0, 2.0 * angle),
                b: C64::ZERO,
                c: C64::ZERO,
                d: C64::ONE,
                conj_first: true,
            },
            Carrier::Arc { center, radius } => {
                let c = C64::new(center[0], center[1]);
                Mobius {
                    a: c,
                    b: C64::new(radius * radius - c.norm_sq(), 0.0),
                    c: C64::ONE,
                    d: c.conj().neg(),
                    conj_first: true,
                }
            }
        };
        Self::from_mobius(&m)
    }

    pub fn anchor(&self) -> [f64; 2] {
        self.anchor
    }
    pub fn rotation_angle(&self) -> f64 {
        self.rotation
    }
    pub fn is_reflective(&self) -> bool {
        self.reflect
    }

    fn to_mobius(&self) -> Mobius {
        let eit = C64::from_polar(1.0, self.rotation);
        // direct: e^{it} (z - a)/(1 - conj(a) z)
        // reflective: same with z replaced by conj(z); the anchor is still
        // the point mapped to the origin, so the inner Möbius uses conj(a).
        let a = C64::new(self.anchor[0], self.anchor[1]);
        let m = if self.reflect { a.conj() } else { a };
        Mobius {
            a: eit,
            b: eit.mul(m).neg(),
            c: m.conj().neg(),
            d: C64::ONE,
            conj_first: self.reflect,
        }
    }

    fn from_mobius(m: &Mobius) -> Self {
        // Normalized disk automorphism: A/D = e^{i theta}, -B/A = inner
        // anchor; for reflective maps the point sent to the origin is the
        // conjugate of the inner anchor.
        let inner = m.b.div(m.a).neg();
        let anchor = if m.conj_first { inner.conj() } else { inner };
        let rotation = m.a.div(m.d).arg();
        DiskIsometry {
            anchor: [anchor.re, anchor.im],
            rotation,
            reflect: m.conj_first,
        }
    }

    /// Applies the isometry; the image is again a disk point.
    pub fn apply(&self, u: &PoincarePoint) -> PoincarePoint {
        let w = self.to_mobius().apply(u.to_c());
        // Automorphisms map the open disk onto itself; clamp defensively
        // against rounding at the guard band.
        PoincarePoint::from_c(w).unwrap_or_else(|_| {
            let n = w.norm();
            let s = (1.0 - 2.0 * BOUNDARY_GUARD) / n;
            PoincarePoint {
                x: w.re * s,
                y: w.im * s,
            }
        })
    }

    /// `self` after `other`: `(self.compose(other)).apply(u) ==
    /// self.apply(other.apply(u))`.
    pub fn compose(&self, other: &DiskIsometry) -> DiskIsometry {
        Self::from_mobius(&self.to_mobius().compose(&other.to_mobius()))
    }

    pub fn inverse(&self) -> DiskIsometry {
        Self::from_mobius(&self.to_mobius().inverse())
    }
}

// ---------------------------------------------------------------------------
// geodesics
// ---------------------------------------------------------------------------

/// The carrier of a geodesic: a circular arc orthogonal to the unit circle,
/// or a diameter.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub enum Carrier {
    Arc { center: [f64; 2], radius: f64 },
    Diameter { angle: f64 },
}

/// A complete geodesic, determined by its two ideal endpoints.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct Geodesic {
    pub endpoints: [[f64; 2]; 2],
    pub carrier: Carrier,
}

const COLLINEAR_EPS: f64 = 1e-14;

impl Geodesic {
    /// The geodesic through two distinct disk points.
    pub fn through(u: &PoincarePoint, v: &PoincarePoint) -> Result<Geodesic> {
        let cross = u.x() * v.y() - u.y() * v.x();
        let dx = v.x() - u.x();
        let dy = v.y() - u.y();
        let len = (dx * dx + dy * dy).sqrt();
        if len == 0.0 {
            return Err(Error::degenerate("geodesic through coincident points"));
        }
        if cross.abs() < COLLINEAR_EPS * len.max(1e-300) {
            // diameter through the origin
            let angle = dy.atan2(dx);
            return Ok(Geodesic {
                endpoints: [
                    [angle.cos(), angle.sin()],
                    [-angle.cos(), -angle.sin()],
                ],
                carrier: Carrier::Diameter { angle },
            });
        }
        // Carrier circle orthogonal to the unit circle: 2 m.u = |u|^2 + 1.
        let (a1, b1, c1) = (2.0 * u.x(), 2.0 * u.y(), u.norm_sq() + 1.0);
        let (a2, b2, c2) = (2.0 * v.x(), 2.0 * v.y(), v.norm_sq() + 1.0);
        let det = a1 * b2 - a2 * b1;
        let mx = (c1 * b2 - c2 * b1) / det;
        let my = (a1 * c2 - a2 * c1) / det;
        let r = (mx * mx + my * my - 1.0).sqrt();
        // Ideal endpoints: intersection of the carrier with the unit circle
        // lies on the line p.m = 1.
        let m2 = mx * mx + my * my;
        let t = (1.0 - 1.0 / m2).sqrt();
        let (px, py) = (mx / m2, my / m2);
        let (qx, qy) = (-my / m2.sqrt(), mx / m2.sqrt());
        Ok(Geodesic {
            endpoints: [
                [px + t * qx, py + t * qy],
                [px - t * qx, py - t * qy],
            ],
            carrier: Carrier::Arc {
                center: [mx, my],
                radius: r,
            },
        })
    }

    /// Unit tangent direction of the geodesic at a point on it, oriented
    /// arbitrarily; used for angle measurements.
    pub fn tangent_at(&self, p: [f64; 2]) -> [f64; 2] {
        match self.carrier {
            Carrier::Diameter { angle } => [angle.cos(), angle.sin()],
            Carrier::Arc { center, .. } => {
                let rx = p[0] - center[0];
                let ry = p[1] - center[1];
                let n = (rx * rx + ry * ry).sqrt();
                [-ry / n, rx / n]
            }
        }
    }
}

// ---------------------------------------------------------------------------
// areas
// ---------------------------------------------------------------------------

/// A measurable region for [`hyp_area`].
#[derive(Clone, Debug)]
pub enum Region {
    /// Hyperbolic disk of hyperbolic radius `rho` (closed form).
    HypDisk { center: PoincarePoint, rho: f64 },
    /// Axis-parallel Euclidean rectangle `[x0, x1] x [y0, y1]`.
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    /// Convex polygon given by its vertices.
    Polygon(Vec<[f64; 2]>),
    Empty,
}

/// Hyperbolic area with the default quadrature tolerance of 1e-10.
pub fn hyp_area(region: &Region) -> Result<f64> {
    hyp_area_with_tol(region, 1e-10)
}

/// Hyperbolic area of a region contained in the unit disk. Hyperbolic disks
/// use the closed form `4 pi sinh^2(rho/2)`; rectangles and polygons use
/// adaptive quadrature of the density to the given absolute tolerance.
pub fn hyp_area_with_tol(region: &Region, tol: f64) -> Result<f64> {
    match region {
        Region::Empty => Ok(0.0),
        Region::HypDisk { rho, .. } => {
            if *rho < 0.0 {
                return Err(Error::domain("negative hyperbolic radius"));
            }
            let s = (rho / 2.0).sinh();
            Ok(4.0 * std::f64::consts::PI * s * s)
        }
        Region::Rect { x0, y0, x1, y1 } => {
            if x1 < x0 || y1 < y0 {
                return Err(Error::domain("rectangle with negative extent"));
            }
            check_inside_disk(&[[*x0, *y0], [*x1, *y0], [*x1, *y1], [*x0, *y1]])?;
            Ok(adaptive_rect(*x0, *y0, *x1, *y1, tol, 0))
        }
        Region::Polygon(vs) => {
            if vs.len() < 3 {
                return Ok(0.0);
            }
            check_inside_disk(vs)?;
            let mut total = 0.0;
            for i in 1..vs.len() - 1 {
                total += adaptive_triangle(vs[0], vs[i], vs[i + 1], tol / (vs.len() - 2) as f64, 0);
            }
            Ok(total.abs())
        }
    }
}

fn check_inside_disk(vs: &[[f64; 2]]) -> Result<()> {
    for v in vs {
        let n2 = v[0] * v[0] + v[1] * v[1];
        let lim = 1.0 - BOUNDARY_GUARD;
        if n2 >= lim * lim {
            return Err(Error::domain("region not contained in the unit disk"));
        }
    }
    Ok(())
}

/// 3x3 Gauss-Legendre product rule on a rectangle.
pub(crate) fn gl3_rect(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    const N: [f64; 3] = [-0.7745966692414834, 0.0, 0.7745966692414834];
    const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let (hx, hy) = ((x1 - x0) / 2.0, (y1 - y0) / 2.0);
    let (cx, cy) = ((x1 + x0) / 2.0, (y1 + y0) / 2.0);
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += W[i] * W[j] * density(cx + hx * N[i], cy + hy * N[j]);
        }
    }
    s * hx * hy
}

fn adaptive_rect(x0: f64, y0: f64, x1: f64, y1: f64, tol: f64, depth: u32) -> f64 {
    let coarse = gl3_rect(x0, y0, x1, y1);
    let (mx, my) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let fine = gl3_rect(x0, y0, mx, my)
        + gl3_rect(mx, y0, x1, my)
        + gl3_rect(x0, my, mx, y1)
        + gl3_rect(mx, my, x1, y1);
    if (fine - coarse).abs() < tol || depth >= 40 {
        return fine;
    }
    let t = tol / 4.0;
    adaptive_rect(x0, y0, mx, my, t, depth + 1)
        + adaptive_rect(mx, y0, x1, my, t, depth + 1)
        + adaptive_rect(x0, my, mx, y1, t, depth + 1)
        + adaptive_rect(mx, my, x1, y1, t, depth + 1)
}

/// Midpoint (edge-midpoint, degree-2) rule on a triangle.
fn mid_triangle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
    let m1 = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let m2 = [(b[0] + c[0]) / 2.0, (b[1] + c[1]) / 2.0];
    let m3 = [(c[0] + a[0]) / 2.0, (c[1] + a[1]) / 2.0];
    area * (density(m1[0], m1[1]) + density(m2[0], m2[1]) + density(m3[0], m3[1])) / 3.0
}

fn adaptive_triangle(a: [f64; 2], b: [f64; 2], c: [f64; 2], tol: f64, depth: u32) -> f64 {
    let coarse = mid_triangle(a, b, c);
    let m1 = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let m2 = [(b[0] + c[0]) / 2.0, (b[1] + c[1]) / 2.0];
    let m3 = [(c[0] + a[0]) / 2.0, (c[1] + a[1]) / 2.0];
    let fine = mid_triangle(a, m1, m3)
        + mid_triangle(m1, b, m2)
        + mid_triangle(m3, m2, c)
        + mid_triangle(m1, m2, m3);
    if (fine - coarse).abs() < tol || depth >= 40 {
        return fine;
    }
    let t = tol / 4.0;
    adaptive_triangle(a, m1, m3, t, depth + 1)
        + adaptive_triangle(m1, b, m2, t, depth + 1)
        + adaptive_triangle(m3, m2, c, t, depth + 1)
        + adaptive_triangle(m1, m2, m3, t, depth + 1)
}

// ---------------------------------------------------------------------------
// the (7,7,7) base triangle
// ---------------------------------------------------------------------------

/// Interior angle of the (7,7,7) tiling triangle.
pub const ANGLE_777: f64 = 2.0 * std::f64::consts::PI / 7.0;

/// The equilateral hyperbolic triangle with all interior angles `2 pi / 7`,
/// centered at the origin, one vertex on the positive x-axis.
///
/// The circumradius follows from the angle law of cosines applied to the
/// center-vertex-vertex triangle: `cosh R = cot(pi/7) / sqrt(3)`.
pub fn triangle_777() -> [PoincarePoint; 3] {
    let half = ANGLE_777 / 2.0;
    let cosh_r = 1.0 / (half.tan() * 3.0f64.sqrt());
    let r_hyp = cosh_r.acosh();
    let r_euc = radial_euclid_distance(r_hyp);
    let mut vs = [PoincarePoint::origin(); 3];
    for (k, v) in vs.iter_mut().enumerate() {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
        *v = PoincarePoint::new(r_euc * ang.cos(), r_euc * ang.sin())
            .expect("circumradius inside disk");
    }
    vs
}

/// Side length of the equilateral triangle with vertex angle `alpha`
/// (law of cosines for equilateral hyperbolic triangles).
pub fn equilateral_side_for_angle(alpha: f64) -> f64 {
    (alpha.cos() / (1.0 - alpha.cos())).acosh()
}
