//! Command-line surface. Configuration is manifest-first (a JSON file via
//! `--manifest`) with inline flags overriding manifest values; the
//! effective configuration is echoed as a provenance header before any
//! result. Machine output goes to stdout or files, progress to stderr.
//!
//! Exit codes: 0 success, 1 domain/configuration error, 2 internal
//! invariant violation.

use clap::{Args, Parser, Subcommand};
use hypervoronoi::error::Error;
use hypervoronoi::experiments::{estimate_pc, sweep, SweepManifest};
use hypervoronoi::percolation::{cross, LocalRegion, Rect};
use hypervoronoi::pointprocess::{
    sample_marked, write_points_csv, Color, Metric, SimulationParams, Window,
};
use hypervoronoi::render::{render_tiling, render_voronoi, RenderOptions};
use hypervoronoi::tiling::{
    closed_event_with_subdiv, dependency_radius, generate_tiling, sample_for_closed_event,
    six_rectangles, SixRectParams,
};
use hypervoronoi::voronoi::delaunay;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "hvp", about = "Voronoi percolation in the hyperbolic plane", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args, Debug, Clone)]
struct CommonFlags {
    /// JSON manifest with the run parameters; flags override its values.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (files) or stem (sweeps); defaults to the working
    /// directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replicate parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Intensity override.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Black-mark probability override.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Metric override: hyp or euc.
    #[arg(long, global = true, value_parser = parse_metric)]
    metric: Option<Metric>,
    /// Replicate count override.
    #[arg(long, global = true)]
    n: Option<u32>,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    match s {
        "hyp" | "hyperbolic" => Ok(Metric::Hyperbolic),
        "euc" | "euclidean" => Ok(Metric::Euclidean),
        other => Err(format!("unknown metric {other:?}; use hyp or euc")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a marked point configuration and emit it as CSV.
    Sample,
    /// Decide a single rectangle crossing; prints the decision as JSON.
    Cross,
    /// Build and verify one coupling sample; emits the processes as CSV.
    Couple,
    /// Generate a tessellation patch and export it as JSON.
    Tiling,
    /// Evaluate the closed event for the origin tile on a fresh sample.
    ClosedEvent,
    /// Estimate the critical probability by bisection.
    Pc,
    /// Run a (lambda, p) grid sweep from the manifest.
    Sweep,
    /// Render a figure (Voronoi coloring or tessellation) to SVG.
    Render,
    /// Run the cross-module invariant suites.
    Verify,
}

/// Manifest shape: any subset of these fields; unknown fields rejected.
#[derive(Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields, default)]
struct Manifest {
    lambda: Option<f64>,
    p: Option<f64>,
    metric: Option<Metric>,
    window: Option<Window>,
    seed: Option<u64>,
    n: Option<u32>,
    rect: Option<Rect>,
    margin: Option<f64>,
    /// Coupling: target probability after the perturbation.
    p_new: Option<f64>,
    /// Coupling: containment radius.
    r: Option<f64>,
    region: Option<LocalRegion>,
    /// Tessellation depth.
    depth: Option<usize>,
    six_rect: Option<SixRectParams>,
    /// Local-event grid subdivision.
    subdiv: Option<u32>,
    /// p_c bisection bracket tolerance.
    tolerance: Option<f64>,
    sweep: Option<SweepManifest>,
    render: Option<RenderOptions>,
    /// Render subject: "voronoi" or "tiling".
    figure: Option<String>,
}

/// Effective configuration after merging manifest and flags.
#[derive(Serialize, Debug, Clone)]
struct Effective {
    command: String,
    lambda: f64,
    p: f64,
    metric: Metric,
    window: Window,
    seed: u64,
    n: u32,
    version: String,
}

struct Ctx {
    manifest: Manifest,
    flags: CommonFlags,
    out_dir: PathBuf,
}

impl Ctx {
    fn lambda(&self) -> f64 {
        self.flags.lambda.or(self.manifest.lambda).unwrap_or(4.0)
    }
    fn p(&self) -> f64 {
        self.flags.p.or(self.manifest.p).unwrap_or(0.5)
    }
    fn metric(&self) -> Metric {
        self.flags
            .metric
            .or(self.manifest.metric)
            .unwrap_or(Metric::Hyperbolic)
    }
    fn window(&self) -> Window {
        self.manifest.window.unwrap_or(match self.metric() {
            Metric::Hyperbolic => Window::HypDisk { rho: 2.0 },
            Metric::Euclidean => Window::Rect {
                x0: -1.0,
                y0: -1.0,
                x1: 1.0,
                y1: 1.0,
            },
        })
    }
    fn seed(&self) -> u64 {
        self.flags.seed.or(self.manifest.seed).unwrap_or(0)
    }
    fn n(&self) -> u32 {
        self.flags.n.or(self.manifest.n).unwrap_or(100)
    }
    fn effective(&self, command: &str) -> Effective {
        Effective {
            command: command.to_string(),
            lambda: self.lambda(),
            p: self.p(),
            metric: self.metric(),
            window: self.window(),
            seed: self.seed(),
            n: self.n(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
    fn params(&self) -> SimulationParams {
        SimulationParams {
            lambda: self.lambda(),
            p: self.p(),
            metric: self.metric(),
            window: self.window(),
            seed: self.seed(),
        }
    }
}

fn provenance(eff: &Effective) -> String {
    format!("# {}", serde_json::to_string(eff).expect("serializable"))
}

/// Entry point used by `main` and by the tests. Never panics on bad input.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap already formats usage; --help/--version are successes
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(jobs) = cli.common.jobs {
        // effective only if set before the global pool spins up
        std::env::set_var("RAYON_NUM_THREADS", jobs.to_string());
    }
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(Error::Internal(msg)) => {
            eprintln!("internal invariant violation: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_manifest(flags: &CommonFlags) -> Result<Manifest, Error> {
    match &flags.manifest {
        None => Ok(Manifest::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    let manifest = load_manifest(&cli.common)?;
    let out_dir = cli
        .common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx {
        manifest,
        flags: cli.common.clone(),
        out_dir,
    };
    match cli.command {
        Command::Sample => cmd_sample(&ctx),
        Command::Cross => cmd_cross(&ctx),
        Command::Couple => cmd_couple(&ctx),
        Command::Tiling => cmd_tiling(&ctx),
        Command::ClosedEvent => cmd_closed_event(&ctx),
        Command::Pc => cmd_pc(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::Render => cmd_render(&ctx),
        Command::Verify => cmd_verify(&ctx),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_sample(ctx: &Ctx) -> Result<(), Error> {
    let eff = ctx.effective("sample");
    let conf = sample_marked(&ctx.params())?;
    ensure_dir(&ctx.out_dir)?;
    let path = ctx.out_dir.join("sample.csv");
    let mut buf = Vec::new();
    use std::io::Write;
    writeln!(buf, "{}", provenance(&eff))?;
    write_points_csv(&mut buf, &conf)?;
    std::fs::write(&path, buf)?;
    eprintln!("wrote {} points to {}", conf.points.len(), path.display());
    println!("{{\"points\": {}}}", conf.points.len());
    Ok(())
}

fn default_rect() -> Rect {
    Rect::new([-0.3, -0.15], 0.6, 0.3, 0.0).expect("valid default rectangle")
}

fn cmd_cross(ctx: &Ctx) -> Result<(), Error> {
    let eff = ctx.effective("cross");
    println!("{}", provenance(&eff));
    let rect = ctx.manifest.rect.unwrap_or_else(default_rect);
    let conf = sample_marked(&ctx.params())?;
    if conf.points.len() < 3 {
        return Err(Error::domain(
            "sampled fewer than 3 points; raise lambda or enlarge the window",
        ));
    }
    let complex = delaunay(conf.points.clone(), Metric::Euclidean)?;
    let record = cross(&rect, &conf, Color::Black, &complex)?;
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn cmd_couple(ctx: &Ctx) -> Result<(), Error> {
    use hypervoronoi::coupling::{build_coupling, verify_domination, CouplingSpec};
    let eff = ctx.effective("couple");
    let r = ctx.manifest.r.unwrap_or(0.4);
    let p = ctx.p();
    let p_new = ctx.manifest.p_new.unwrap_or(0.51_f64.min(p * 0.9));
    let a = ctx.manifest.region.unwrap_or(LocalRegion::Disk {
        center: [0.0, 0.0],
        radius: 1e-4,
    });
    let spec = CouplingSpec::new(r, p, p_new, a, ctx.lambda())?;
    let window = match ctx.window() {
        w @ Window::Rect { .. } => w,
        Window::HypDisk { .. } => Window::Rect {
            x0: -0.45,
            y0: -0.45,
            x1: 0.45,
            y1: 0.45,
        },
    };
    let sample = build_coupling(&spec, &window, ctx.seed())?;
    let dominated = verify_domination(&sample, &spec.a);
    if !dominated {
        return Err(Error::internal("coupling sample fails domination"));
    }
    ensure_dir(&ctx.out_dir)?;
    let path = ctx.out_dir.join("coupling.csv");
    let mut buf = Vec::new();
    use std::io::Write;
    writeln!(buf, "{}", provenance(&eff))?;
    hypervoronoi::coupling::write_coupling_csv(&mut buf, &sample)?;
    std::fs::write(&path, buf)?;
    println!(
        "{}",
        serde_json::to_string(&serde_json::json!({
            "dominated": dominated,
            "spec": spec,
            "written": path.display().to_string(),
        }))?
    );
    Ok(())
}

fn cmd_tiling(ctx: &Ctx) -> Result<(), Error> {
    let eff = ctx.effective("tiling");
    let depth = ctx.manifest.depth.unwrap_or(4);
    let tiling = generate_tiling(depth);
    ensure_dir(&ctx.out_dir)?;
    let path = ctx.out_dir.join(format!("tiling-depth{depth}.json"));
    let mut text = provenance(&eff);
    text.push('\n');
    text.push_str(&serde_json::to_string(&tiling)?);
    std::fs::write(&path, text)?;
    println!(
        "{{\"tiles\": {}, \"path\": {:?}}}",
        tiling.tiles.len(),
        path.display().to_string()
    );
    Ok(())
}

fn cmd_closed_event(ctx: &Ctx) -> Result<(), Error> {
    let eff = ctx.effective("closed-event");
    println!("{}", provenance(&eff));
    let geom = six_rectangles(&ctx.manifest.six_rect.unwrap_or_default())?;
    let subdiv = ctx.manifest.subdiv.unwrap_or(6);
    let conf = sample_for_closed_event(&geom, ctx.lambda(), ctx.p(), ctx.seed())?;
    let tiling = generate_tiling(0);
    let held = closed_event_with_subdiv(&tiling.tiles[0], &conf, &geom, subdiv)?;
    let deep = generate_tiling(9);
    let (rho, k) = dependency_radius(&geom, &deep)?;
    println!(
        "{}",
        serde_json::to_string(&serde_json::json!({
            "closed": held,
            "points": conf.points.len(),
            "rho": rho,
            "k": k,
        }))?
    );
    Ok(())
}

fn cmd_pc(ctx: &Ctx) -> Result<(), Error> {
    let eff = ctx.effective("pc");
    println!("{}", provenance(&eff));
    let rect = ctx.manifest.rect.unwrap_or_else(|| match ctx.metric() {
        Metric::Euclidean => {
            Rect::with_axis([0.0, 0.0], 1.0, 1.0, 0.0, hypervoronoi::percolation::Axis::AlongWidth)
                .expect("valid square")
        }
        Metric::Hyperbolic => {
            Rect::with_axis([-0.25, -0.25], 0.5, 0.5, 0.0, hypervoronoi::percolation::Axis::AlongWidth)
                .expect("valid square")
        }
    });
    let margin = ctx.manifest.margin.unwrap_or(0.2);
    let tolerance = ctx.manifest.tolerance.unwrap_or(0.02);
    let est = estimate_pc(
        ctx.lambda(),
        ctx.metric(),
        &rect,
        margin,
        tolerance,
        ctx.n(),
        ctx.seed(),
    )?;
    println!("{}", serde_json::to_string(&est)?);
    Ok(())
}

fn cmd_sweep(ctx: &Ctx) -> Result<(), Error> {
    let manifest = ctx
        .manifest
        .sweep
        .clone()
        .ok_or_else(|| Error::domain("sweep needs a manifest with a \"sweep\" section"))?;
    ensure_dir(&ctx.out_dir)?;
    let stem = ctx.out_dir.join(&manifest.label);
    let records = sweep(&manifest, &stem)?;
    eprintln!(
        "{} records at {}",
        records.len(),
        stem.with_extension("csv").display()
    );
    println!("{{\"records\": {}}}", records.len());
    Ok(())
}

fn cmd_render(ctx: &Ctx) -> Result<(), Error> {
    let eff = ctx.effective("render");
    let opts = ctx.manifest.render.clone().unwrap_or_default();
    let figure = ctx.manifest.figure.clone().unwrap_or_else(|| "voronoi".into());
    ensure_dir(&ctx.out_dir)?;
    let svg = match figure.as_str() {
        "voronoi" => {
            let conf = sample_marked(&ctx.params())?;
            let complex = if conf.points.len() >= 3 {
                Some(delaunay(conf.points.clone(), Metric::Euclidean)?)
            } else {
                None
            };
            render_voronoi(&conf, complex.as_ref(), &opts)?
        }
        "tiling" => {
            let depth = ctx.manifest.depth.unwrap_or(4);
            let tiling = generate_tiling(depth);
            let geom = six_rectangles(&ctx.manifest.six_rect.unwrap_or_default())?;
            render_tiling(&tiling, &[0], Some(&geom), &opts)?
        }
        other => {
            return Err(Error::domain(format!(
                "unknown figure {other:?}; use voronoi or tiling"
            )))
        }
    };
    let path = ctx.out_dir.join(format!("seed{}_{figure}.svg", eff.seed));
    std::fs::write(&path, svg)?;
    println!("{{\"path\": {:?}}}", path.display().to_string());
    Ok(())
}

fn cmd_verify(ctx: &Ctx) -> Result<(), Error> {
    use hypervoronoi::geometry::{hyp_distance, DiskIsometry, PoincarePoint};
    let seed = ctx.seed();
    let mut suites: Vec<(&str, usize)> = Vec::new();

    // isometries preserve the metric
    {
        use rand::RngExt;
        let mut rng = hypervoronoi::rng::chacha(seed ^ 0x15);
        let mut checks = 0;
        let mut pt = || {
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let r = rng.random_range(0.0..0.95f64);
            PoincarePoint::new(r * a.cos(), r * a.sin()).unwrap()
        };
        let mut rot = hypervoronoi::rng::chacha(seed ^ 0x16);
        for _ in 0..200 {
            let (u, v, anchor) = (pt(), pt(), pt());
            let iso = DiskIsometry::new(&anchor, rot.random_range(0.0..6.28), rot.random_bool(0.5));
            let d0 = hyp_distance(&u, &v);
            let d1 = hyp_distance(&iso.apply(&u), &iso.apply(&v));
            if (d0 - d1).abs() > 1e-9 {
                return Err(Error::internal(format!(
                    "isometry distorted a distance by {}",
                    (d0 - d1).abs()
                )));
            }
            checks += 1;
        }
        suites.push(("geometry-isometry", checks));
    }

    // crossing duality on squares
    {
        let square = Rect::with_axis(
            [0.0, 0.0],
            1.0,
            1.0,
            0.0,
            hypervoronoi::percolation::Axis::AlongWidth,
        )?;
        let mut checks = 0;
        for i in 0..40u64 {
            let params = SimulationParams {
                lambda: 30.0,
                p: 0.5,
                metric: Metric::Euclidean,
                window: Window::Rect {
                    x0: -0.5,
                    y0: -0.5,
                    x1: 1.5,
                    y1: 1.5,
                },
                seed: hypervoronoi::rng::derive(seed ^ 0x29, &[i]),
            };
            let conf = sample_marked(&params)?;
            if conf.points.len() < 3 {
                continue;
            }
            let complex = delaunay(conf.points.clone(), Metric::Euclidean)?;
            let black = cross(&square, &conf, Color::Black, &complex)?.crossed;
            let mut tb = square;
            tb.axis = hypervoronoi::percolation::Axis::AlongHeight;
            let white = cross(&tb, &conf, Color::White, &complex)?.crossed;
            if black == white {
                return Err(Error::internal(
                    "crossing duality violated on a square sample",
                ));
            }
            checks += 1;
        }
        suites.push(("crossing-duality", checks));
    }

    // coupling domination
    {
        use hypervoronoi::coupling::{build_coupling, verify_domination, CouplingSpec};
        let mut checks = 0;
        for i in 0..50u64 {
            let spec = CouplingSpec::new(
                0.4,
                0.7,
                0.55,
                LocalRegion::Disk {
                    center: [0.0, 0.0],
                    radius: 1e-4,
                },
                3.0,
            )?;
            let window = Window::Rect {
                x0: -0.45,
                y0: -0.45,
                x1: 0.45,
                y1: 0.45,
            };
            let sample = build_coupling(&spec, &window, hypervoronoi::rng::derive(seed ^ 0x37, &[i]))?;
            if !verify_domination(&sample, &spec.a) {
                return Err(Error::internal("coupling domination violated"));
            }
            checks += 1;
        }
        suites.push(("coupling-domination", checks));
    }

    // tessellation degrees
    {
        let tiling = generate_tiling(4);
        if tiling.adjacency[0].len() != 15 {
            return Err(Error::internal(format!(
                "origin tile degree {} (expected 15)",
                tiling.adjacency[0].len()
            )));
        }
        suites.push(("tiling-degree", 1));
    }

    for (name, checks) in &suites {
        println!("suite {name}: {checks} checks passed");
    }
    Ok(())
}
