//! Coupling of the hyperbolic marked process (lambda, p) with a homogeneous
//! Euclidean marked process (mu, p_new) on a small region A.
//!
//! Three independent inhomogeneous processes are superposed so that the
//! assembled black processes satisfy `Zt_b ∩ A ⊆ Z_b ∩ A` and the white
//! ones `Z_w ∩ A ⊆ Zt_w ∩ A`, deterministically (not just in
//! distribution). The construction needs `f := 4/(1-|u|^2)^2` to vary by at
//! most an absolute tolerance over A, which bounds A's diameter through
//! f's Lipschitz constant on `B(o, r)`.

use crate::error::{Error, Result};
use crate::geometry::density;
use crate::percolation::LocalRegion;
use crate::pointprocess::Window;
use rand::RngExt;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{BufRead, Write};

/// Absolute tolerance and diameter scale of the coupling.
///
/// `delta_abs = 2 (p - p_new)/(1 - p)` is half the largest tolerance for
/// which the white-side inequality `(1 + delta/4)(1 - p) <= 1 - p_new`
/// still holds (using `f >= 4` on the disk); `t = delta_abs / L` with
/// `L = 16 r / (1 - r^2)^3` the exact Lipschitz bound of f on `B(o, r)`.
pub fn continuity_scale(r: f64, p: f64, p_new: f64) -> Result<(f64, f64)> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::domain("radius must satisfy 0 < r < 1"));
    }
    if !(0.0 < p_new && p_new < p && p < 1.0) {
        return Err(Error::domain("need 0 < p_new < p < 1"));
    }
    let delta_abs = 2.0 * (p - p_new) / (1.0 - p);
    let l = 16.0 * r / (1.0 - r * r).powi(3);
    Ok((delta_abs / l, delta_abs))
}

fn region_min_norm(a: &LocalRegion) -> f64 {
    match *a {
        LocalRegion::Disk { center, radius } => {
            (center[0].hypot(center[1]) - radius).max(0.0)
        }
        LocalRegion::Rect { x0, y0, x1, y1 } => {
            let cx = 0.0f64.clamp(x0, x1);
            let cy = 0.0f64.clamp(y0, y1);
            cx.hypot(cy)
        }
    }
}

fn region_max_norm(a: &LocalRegion) -> f64 {
    match *a {
        LocalRegion::Disk { center, radius } => center[0].hypot(center[1]) + radius,
        LocalRegion::Rect { x0, y0, x1, y1 } => {
            let mx = x0.abs().max(x1.abs());
            let my = y0.abs().max(y1.abs());
            mx.hypot(my)
        }
    }
}

fn region_diameter(a: &LocalRegion) -> f64 {
    match *a {
        LocalRegion::Disk { radius, .. } => 2.0 * radius,
        LocalRegion::Rect { x0, y0, x1, y1 } => (x1 - x0).hypot(y1 - y0),
    }
}

/// `mu = lambda * inf_A f`, with the infimum realized at the closure point
/// of A nearest the origin (f is radially increasing).
pub fn coupling_mu(a: &LocalRegion, lambda: f64) -> f64 {
    let s = region_min_norm(a);
    lambda * 4.0 / (1.0 - s * s).powi(2)
}

/// Validated parameters of one coupling instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub r: f64,
    pub p: f64,
    pub p_new: f64,
    pub t: f64,
    pub delta_abs: f64,
    pub a: LocalRegion,
    pub lambda: f64,
    pub mu: f64,
}

impl CouplingSpec {
    pub fn new(r: f64, p: f64, p_new: f64, a: LocalRegion, lambda: f64) -> Result<Self> {
        let (t, delta_abs) = continuity_scale(r, p, p_new)?;
        if !(lambda > 0.0) {
            return Err(Error::domain("intensity must be positive"));
        }
        if region_max_norm(&a) > r {
            return Err(Error::domain("region A must lie inside B(o, r)"));
        }
        if region_diameter(&a) > t {
            return Err(Error::domain(format!(
                "diam(A) = {} exceeds the continuity scale t = {t}",
                region_diameter(&a)
            )));
        }
        let mu = coupling_mu(&a, lambda);
        Ok(CouplingSpec {
            r,
            p,
            p_new,
            t,
            delta_abs,
            a,
            lambda,
            mu,
        })
    }

    /// Black-side base intensity `phi0(u) = min(p_new mu, p lambda f(u))`;
    /// equals the constant `p_new mu` everywhere on A.
    pub fn phi0(&self, u: [f64; 2]) -> f64 {
        (self.p_new * self.mu).min(self.p * self.lambda * density(u[0], u[1]))
    }
    /// `phi1 = p_new mu - phi0`, identically zero on A.
    pub fn phi1(&self, u: [f64; 2]) -> f64 {
        self.p_new * self.mu - self.phi0(u)
    }
    /// `phi2 = p lambda f - phi0`.
    pub fn phi2(&self, u: [f64; 2]) -> f64 {
        self.p * self.lambda * density(u[0], u[1]) - self.phi0(u)
    }
    /// White-side base `psi0(u) = min((1-p) lambda f(u), (1-p_new) mu)`;
    /// equals `(1-p) lambda f` on A.
    pub fn psi0(&self, u: [f64; 2]) -> f64 {
        ((1.0 - self.p) * self.lambda * density(u[0], u[1])).min((1.0 - self.p_new) * self.mu)
    }
    /// `psi1 = (1-p) lambda f - psi0`, identically zero on A.
    pub fn psi1(&self, u: [f64; 2]) -> f64 {
        (1.0 - self.p) * self.lambda * density(u[0], u[1]) - self.psi0(u)
    }
    /// `psi2 = (1-p_new) mu - psi0`.
    pub fn psi2(&self, u: [f64; 2]) -> f64 {
        (1.0 - self.p_new) * self.mu - self.psi0(u)
    }
}

/// The six independent point processes of one coupled sample.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CoupledSample {
    pub p0: Vec<[f64; 2]>,
    pub p1: Vec<[f64; 2]>,
    pub p2: Vec<[f64; 2]>,
    pub p0w: Vec<[f64; 2]>,
    pub p1w: Vec<[f64; 2]>,
    pub p2w: Vec<[f64; 2]>,
}

impl CoupledSample {
    /// Hyperbolic black points, intensity `p lambda f`.
    pub fn z_b(&self) -> Vec<[f64; 2]> {
        concat(&self.p0, &self.p2)
    }
    /// Euclidean black points, intensity `p_new mu`.
    pub fn zt_b(&self) -> Vec<[f64; 2]> {
        concat(&self.p0, &self.p1)
    }
    /// Hyperbolic white points, intensity `(1-p) lambda f`.
    pub fn z_w(&self) -> Vec<[f64; 2]> {
        concat(&self.p0w, &self.p1w)
    }
    /// Euclidean white points, intensity `(1-p_new) mu`.
    pub fn zt_w(&self) -> Vec<[f64; 2]> {
        concat(&self.p0w, &self.p2w)
    }
}

fn concat(a: &[[f64; 2]], b: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

/// Samples an inhomogeneous PPP on a rectangle window by thinning from a
/// constant dominating intensity.
fn sample_inhom(
    intensity: &dyn Fn([f64; 2]) -> f64,
    bound: f64,
    window: &Window,
    seed: u64,
) -> Result<Vec<[f64; 2]>> {
    let (x0, y0, x1, y1) = match *window {
        Window::Rect { x0, y0, x1, y1 } => (x0, y0, x1, y1),
        Window::HypDisk { .. } => {
            return Err(Error::domain("coupling windows must be rectangles"))
        }
    };
    let mut rng = crate::rng::chacha(seed);
    let mean = bound * (x1 - x0) * (y1 - y0);
    let n = if mean == 0.0 {
        0
    } else {
        Poisson::new(mean)
            .map_err(|e| Error::domain(format!("bad Poisson mean: {e}")))?
            .sample(&mut rng) as u64
    };
    let mut out = Vec::new();
    for _ in 0..n {
        let u = [rng.random_range(x0..x1), rng.random_range(y0..y1)];
        let f = intensity(u);
        debug_assert!(f <= bound * (1.0 + 1e-12));
        if rng.random_range(0.0..1.0) * bound <= f {
            out.push(u);
        }
    }
    Ok(out)
}

/// Builds one coupled sample on a rectangle window containing A.
pub fn build_coupling(spec: &CouplingSpec, window: &Window, seed: u64) -> Result<CoupledSample> {
    let (x0, y0, x1, y1) = match *window {
        Window::Rect { x0, y0, x1, y1 } => (x0, y0, x1, y1),
        Window::HypDisk { .. } => {
            return Err(Error::domain("coupling windows must be rectangles"))
        }
    };
    let corner_norm2 = (x0.abs().max(x1.abs())).powi(2) + (y0.abs().max(y1.abs())).powi(2);
    if corner_norm2 >= 1.0 {
        return Err(Error::domain("window must stay inside the unit disk"));
    }
    match spec.a {
        LocalRegion::Disk { center, radius } => {
            if center[0] - radius < x0
                || center[0] + radius > x1
                || center[1] - radius < y0
                || center[1] + radius > y1
            {
                return Err(Error::domain("window must contain A"));
            }
        }
        LocalRegion::Rect {
            x0: ax0,
            y0: ay0,
            x1: ax1,
            y1: ay1,
        } => {
            if ax0 < x0 || ax1 > x1 || ay0 < y0 || ay1 > y1 {
                return Err(Error::domain("window must contain A"));
            }
        }
    }
    // dominating constants on the window; f's max sits at the corner of
    // largest norm
    let fmax = 4.0 / (1.0 - corner_norm2).powi(2);
    let b_phi0 = spec.p_new * spec.mu;
    let b_phi1 = spec.p_new * spec.mu;
    let b_phi2 = spec.p * spec.lambda * fmax;
    let b_psi0 = (1.0 - spec.p_new) * spec.mu;
    let b_psi1 = (1.0 - spec.p) * spec.lambda * fmax;
    let b_psi2 = (1.0 - spec.p_new) * spec.mu;
    Ok(CoupledSample {
        p0: sample_inhom(&|u| spec.phi0(u), b_phi0, window, crate::rng::derive(seed, &[0]))?,
        p1: sample_inhom(&|u| spec.phi1(u), b_phi1, window, crate::rng::derive(seed, &[1]))?,
        p2: sample_inhom(&|u| spec.phi2(u), b_phi2, window, crate::rng::derive(seed, &[2]))?,
        p0w: sample_inhom(&|u| spec.psi0(u), b_psi0, window, crate::rng::derive(seed, &[3]))?,
        p1w: sample_inhom(&|u| spec.psi1(u), b_psi1, window, crate::rng::derive(seed, &[4]))?,
        p2w: sample_inhom(&|u| spec.psi2(u), b_psi2, window, crate::rng::derive(seed, &[5]))?,
    })
}

fn restrict(points: &[[f64; 2]], a: &LocalRegion) -> HashSet<(u64, u64)> {
    points
        .iter()
        .filter(|p| a.contains(**p))
        .map(|p| (p[0].to_bits(), p[1].to_bits()))
        .collect()
}

/// Exact subset checks of the two domination inclusions on A.
pub fn verify_domination(sample: &CoupledSample, a: &LocalRegion) -> bool {
    let zb = restrict(&sample.z_b(), a);
    let ztb = restrict(&sample.zt_b(), a);
    let zw = restrict(&sample.z_w(), a);
    let ztw = restrict(&sample.zt_w(), a);
    ztb.is_subset(&zb) && zw.is_subset(&ztw)
}

// ---------------------------------------------------------------------------
// CSV interchange
// ---------------------------------------------------------------------------

const PROCESS_TAGS: [&str; 6] = ["P0", "P1", "P2", "P0w", "P1w", "P2w"];

/// Writes `x,y,process` CSV with process tags P0, P1, P2, P0w, P1w, P2w.
pub fn write_coupling_csv<W: Write>(w: &mut W, sample: &CoupledSample) -> Result<()> {
    writeln!(w, "x,y,process")?;
    let groups = [
        &sample.p0, &sample.p1, &sample.p2, &sample.p0w, &sample.p1w, &sample.p2w,
    ];
    for (tag, pts) in PROCESS_TAGS.iter().zip(groups) {
        for p in pts.iter() {
            writeln!(w, "{},{},{tag}", p[0], p[1])?;
        }
    }
    Ok(())
}

/// Reads the coupling CSV format back into a sample.
pub fn read_coupling_csv<R: BufRead>(r: R) -> Result<CoupledSample> {
    let mut sample = CoupledSample::default();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("x,y,process")) {
            continue;
        }
        let mut it = line.split(',');
        let x: f64 = it
            .next()
            .ok_or_else(|| Error::domain("missing x"))?
            .trim()
            .parse()
            .map_err(|e| Error::domain(format!("bad x at line {}: {e}", i + 1)))?;
        let y: f64 = it
            .next()
            .ok_or_else(|| Error::domain("missing y"))?
            .trim()
            .parse()
            .map_err(|e| Error::domain(format!("bad y at line {}: {e}", i + 1)))?;
        let tag = it
            .next()
            .ok_or_else(|| Error::domain("missing process"))?
            .trim();
        let group = match tag {
            "P0" => &mut sample.p0,
            "P1" => &mut sample.p1,
            "P2" => &mut sample.p2,
            "P0w" => &mut sample.p0w,
            "P1w" => &mut sample.p1w,
            "P2w" => &mut sample.p2w,
            other => return Err(Error::domain(format!("unknown process tag {other:?}"))),
        };
        group.push([x, y]);
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuity_scale_example() {
        let (t, delta_abs) = continuity_scale(0.5, 0.6, 0.55).unwrap();
        assert!((delta_abs - 0.25).abs() < 1e-15);
        let l = 16.0 * 0.5 / (0.75f64).powi(3);
        assert!((l - 18.962_962_962_962_962).abs() < 1e-12);
        assert!((t - 0.25 / l).abs() < 1e-15);
        assert!((t - 0.013_183_593_75).abs() < 1e-10, "{t}");

        // numeric maximization of |f'| on [0, 0.5] as an independent check
        let fp = |s: f64| 16.0 * s / (1.0 - s * s).powi(3);
        let mut max = 0.0f64;
        for k in 0..=100_000 {
            max = max.max(fp(0.5 * k as f64 / 100_000.0));
        }
        assert!((max - l).abs() < 1e-6);

        assert!(continuity_scale(0.5, 0.55, 0.6).is_err());
        assert!(continuity_scale(1.5, 0.6, 0.55).is_err());
    }

    #[test]
    fn tolerance_vanishes_as_p_new_approaches_p() {
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001, 0.0001] {
            let (t, _) = continuity_scale(0.5, 0.6, 0.6 - eps).unwrap();
            assert!(t < prev);
            prev = t;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn lipschitz_stress_million_pairs() {
        let (t, delta_abs) = continuity_scale(0.5, 0.6, 0.55).unwrap();
        let mut rng = crate::rng::chacha(1001);
        let mut tested = 0u32;
        while tested < 1_000_000 {
            let u: [f64; 2] = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            if u[0].hypot(u[1]) > 0.5 {
                continue;
            }
            let ang = rng.random_range(0.0..std::f64::consts::TAU);
            let d = rng.random_range(0.0..t);
            let v = [u[0] + d * ang.cos(), u[1] + d * ang.sin()];
            if v[0].hypot(v[1]) > 0.5 {
                continue;
            }
            let df = (density(u[0], u[1]) - density(v[0], v[1])).abs();
            assert!(df < delta_abs, "|f(u)-f(v)| = {df} at distance {d}");
            tested += 1;
        }
    }

    #[test]
    fn coupling_mu_examples() {
        let origin_region = LocalRegion::Disk {
            center: [0.0, 0.0],
            radius: 0.001,
        };
        assert!((coupling_mu(&origin_region, 3.0) - 12.0).abs() < 1e-12);

        // min-norm point at distance 0.3
        let a = LocalRegion::Disk {
            center: [0.301, 0.0],
            radius: 0.001,
        };
        let mu = coupling_mu(&a, 1.0);
        assert!((mu - 4.0 / (0.91f64 * 0.91)).abs() < 1e-12, "{mu}");
        // dense-sampling cross-check of the infimum
        let mut inf = f64::INFINITY;
        for k in 0..=1000 {
            for l in 0..=1000 {
                let x = 0.300 + 0.002 * k as f64 / 1000.0;
                let y = -0.001 + 0.002 * l as f64 / 1000.0;
                if (x - 0.301f64).hypot(y) <= 0.001 {
                    inf = inf.min(density(x, y));
                }
            }
        }
        assert!(mu <= inf + 1e-9);
        assert!((mu - inf).abs() < 1e-4);

        // linearity in lambda
        assert!((coupling_mu(&a, 2.0) - 2.0 * coupling_mu(&a, 1.0)).abs() < 1e-12);
    }

    fn default_spec() -> CouplingSpec {
        let (t, _) = continuity_scale(0.5, 0.6, 0.55).unwrap();
        let a = LocalRegion::Disk {
            center: [0.3, 0.0],
            radius: t / 2.0 * 0.99,
        };
        CouplingSpec::new(0.5, 0.6, 0.55, a, 50_000.0).unwrap()
    }

    fn default_window() -> Window {
        Window::Rect {
            x0: 0.27,
            y0: -0.03,
            x1: 0.33,
            y1: 0.03,
        }
    }

    #[test]
    fn spec_validation() {
        let (t, _) = continuity_scale(0.5, 0.6, 0.55).unwrap();
        // A too large
        assert!(CouplingSpec::new(
            0.5,
            0.6,
            0.55,
            LocalRegion::Disk {
                center: [0.3, 0.0],
                radius: t
            },
            1.0
        )
        .is_err());
        // A outside B(o, r)
        assert!(CouplingSpec::new(
            0.5,
            0.6,
            0.55,
            LocalRegion::Disk {
                center: [0.6, 0.0],
                radius: t / 4.0
            },
            1.0
        )
        .is_err());
        // intensity ordering invariant: p lambda f >= mu p_new on A
        let spec = default_spec();
        for k in 0..100 {
            let ang = std::f64::consts::TAU * k as f64 / 100.0;
            let u = [
                0.3 + 0.99 * spec.t / 2.0 * ang.cos(),
                0.99 * spec.t / 2.0 * ang.sin(),
            ];
            assert!(spec.p * spec.lambda * density(u[0], u[1]) >= spec.mu * spec.p_new);
        }
    }

    #[test]
    fn phi1_vanishes_on_a_and_counts_match() {
        let spec = default_spec();
        // phi1 and psi1 vanish identically on A (probe grid)
        for k in 0..50 {
            for l in 0..50 {
                let u = [
                    0.3 - spec.t / 2.0 + spec.t * k as f64 / 49.0,
                    -spec.t / 2.0 + spec.t * l as f64 / 49.0,
                ];
                if !spec.a.contains(u) {
                    continue;
                }
                assert_eq!(spec.phi1(u), 0.0);
                assert_eq!(spec.psi1(u), 0.0);
            }
        }

        // empirical mean of |Zt_b ∩ A| = p_new * mu * area(A) over samples
        let radius = match spec.a {
            LocalRegion::Disk { radius, .. } => radius,
            _ => unreachable!(),
        };
        let area = std::f64::consts::PI * radius * radius;
        let expect = spec.p_new * spec.mu * area;
        let reps = 10_000;
        let mut total = 0usize;
        let win = default_window();
        for i in 0..reps {
            let s = build_coupling(&spec, &win, crate::rng::derive(42, &[i])).unwrap();
            total += s.zt_b().iter().filter(|p| spec.a.contains(**p)).count();
        }
        let mean = total as f64 / reps as f64;
        let se = (expect / reps as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "mean {mean}, expect {expect}, se {se}"
        );
    }

    #[test]
    fn marginal_intensities() {
        // counts of Z_b on the window match p lambda integral of f
        let spec = default_spec();
        let win = default_window();
        let (x0, y0, x1, y1) = (0.27, -0.03, 0.33, 0.03);
        // fine Riemann integral of f over the window
        let n = 500;
        let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        let mut integral = 0.0;
        for i in 0..n {
            for j in 0..n {
                integral += density(
                    x0 + (i as f64 + 0.5) * hx,
                    y0 + (j as f64 + 0.5) * hy,
                ) * hx
                    * hy;
            }
        }
        let reps = 3000;
        let (mut black_h, mut white_h, mut black_e, mut white_e) = (0usize, 0usize, 0usize, 0usize);
        for i in 0..reps {
            let s = build_coupling(&spec, &win, crate::rng::derive(7000, &[i])).unwrap();
            black_h += s.z_b().len();
            white_h += s.z_w().len();
            black_e += s.zt_b().len();
            white_e += s.zt_w().len();
        }
        let area = (x1 - x0) * (y1 - y0);
        let checks = [
            (black_h as f64, spec.p * spec.lambda * integral),
            (white_h as f64, (1.0 - spec.p) * spec.lambda * integral),
            (black_e as f64, spec.p_new * spec.mu * area),
            (white_e as f64, (1.0 - spec.p_new) * spec.mu * area),
        ];
        for (total, expect_one) in checks {
            let mean = total / reps as f64;
            let se = (expect_one / reps as f64).sqrt();
            assert!(
                (mean - expect_one).abs() < 3.5 * se,
                "mean {mean}, expect {expect_one}"
            );
        }
    }

    #[test]
    fn domination_randomized_sweep() {
        let mut rng = crate::rng::chacha(31337);
        for rep in 0..1000u64 {
            let r = rng.random_range(0.2..0.8);
            let p = rng.random_range(0.3..0.9);
            let p_new: f64 = rng.random_range(0.1..1.0) * p * 0.9;
            let p_new = p_new.max(0.01);
            let (t, _) = match continuity_scale(r, p, p_new) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let ra = (t / 2.0 * rng.random_range(0.3..0.99)).min(0.4 * r);
            let cn = rng.random_range(0.0..(r - ra));
            let ang = rng.random_range(0.0..std::f64::consts::TAU);
            let a = LocalRegion::Disk {
                center: [cn * ang.cos(), cn * ang.sin()],
                radius: ra,
            };
            let spec = match CouplingSpec::new(r, p, p_new, a, rng.random_range(10.0..1e4)) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let (cx, cy) = match a {
                LocalRegion::Disk { center, .. } => (center[0], center[1]),
                _ => unreachable!(),
            };
            let win = Window::Rect {
                x0: cx - 2.0 * ra,
                y0: cy - 2.0 * ra,
                x1: cx + 2.0 * ra,
                y1: cy + 2.0 * ra,
            };
            let s = build_coupling(&spec, &win, crate::rng::derive(99, &[rep])).unwrap();
            assert!(verify_domination(&s, &spec.a), "rep {rep}");
        }
    }

    #[test]
    fn corrupted_sample_fails_domination() {
        let spec = default_spec();
        let win = default_window();
        let mut s = build_coupling(&spec, &win, 5).unwrap();
        assert!(verify_domination(&s, &spec.a));
        // an extra Euclidean black point inside A with no hyperbolic twin
        s.p1.push([0.3, 0.0]);
        assert!(!verify_domination(&s, &spec.a));
    }

    #[test]
    fn mu_diverges_with_lambda() {
        let a = LocalRegion::Disk {
            center: [0.3, 0.0],
            radius: 1e-4,
        };
        let mut prev = 0.0;
        for lambda in [1.0, 10.0, 1e3, 1e6, 1e9] {
            let mu = coupling_mu(&a, lambda);
            assert!(mu > prev);
            prev = mu;
        }
        assert!(prev > 1e9);
    }

    #[test]
    fn csv_roundtrip() {
        let spec = default_spec();
        let s = build_coupling(&spec, &default_window(), 123).unwrap();
        let mut buf = Vec::new();
        write_coupling_csv(&mut buf, &s).unwrap();
        let back = read_coupling_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back.p0.len(), s.p0.len());
        assert_eq!(back.p2w.len(), s.p2w.len());
        for (a, b) in back.p2.iter().zip(&s.p2) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }
}
