//! `grht`: command-line front end for the grht-core toolkit.
//!
//! Every command reads a map selection and parameter block (preset, optional
//! flat config file, then repeated `--param key=value` overrides), writes CSV or
//! PGM artifacts under the `--out` prefix and prints a short summary. Exit code 1
//! marks numerical or domain failures, 2 marks configuration errors.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use grht_core::basins::{compute_basin, BasinOptions};
use grht_core::critical::{classify_regions, critical_set, cusp_locate, image_curve};
use grht_core::export::{
    fmt17, write_basin_csv, write_basin_pgm, write_curve_csv, write_events_csv, write_fit_csv, write_manifold_csv,
    write_sr_csv,
};
use grht_core::manifolds::{
    grow_stable, grow_unstable, henon_intersection_count, henon_saddle, intersection_count, saddle_frame,
    tangency_bisection, ManifoldBranch, ManifoldOptions, SaddleFrame, TangencySetup,
};
use grht_core::maps::QuadraticFold;
use grht_core::normal_form::{detect_resonances, eliminate_order_n, OrderNTermTable, RESONANCE_TOL};
use grht_core::params::{preset, ParamBlock, Preset};
use grht_core::periodic::{sr_family, SrSolution};
use grht_core::unfolding::{default_bracket, scan_ray, scaling_fit, BifurcationKind, RayLabel, UnfoldingRay};
use grht_core::{GrhtMap, GrhtMapParams, HenonMap, HenonMapParams, PlanarMap, Point2, Rect};

#[derive(Parser)]
#[command(name = "grht", version, about = "Planar map dynamics near globally resonant homoclinic tangencies")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Named starting parameters (param1..param4, toy-unfold, critical, ghm-tangle, ghm-neutral).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Parameter override `key=value`; repeatable, applied after the config file.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Flat `key = value` file; `map` and `preset` keys select the family.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Map family: grht, henon or fixture-quadratic (default from the preset).
    #[arg(long, global = true)]
    map: Option<String>,
    /// Output path prefix for CSV/PGM artifacts.
    #[arg(long, global = true, default_value = "grht")]
    out: String,
    /// Worker threads for grid computations (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the map and its Jacobian at a point.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// Stable and saddle single-round orbits for a range of k.
    Sr {
        #[arg(long, default_value = "1..15")]
        k: String,
    },
    /// Grow one branch of the stable or unstable manifold of a saddle.
    Manifold {
        #[arg(long, default_value = "unstable")]
        kind: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        side: i8,
        #[arg(long, default_value = "-1,3,-1,3", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 20)]
        generations: usize,
        #[arg(long, default_value_t = 1e-3)]
        offset: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Saddle fixed point `x,y` (default: the origin for grht, the unique saddle for henon).
        #[arg(long, allow_hyphen_values = true)]
        saddle: Option<String>,
    },
    /// Basins of attraction on a grid.
    Basin {
        #[arg(long, default_value = "200x200")]
        grid: String,
        #[arg(long, default_value = "-0.5,2,-0.5,2", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long, default_value_t = 64)]
        max_period: usize,
    },
    /// Critical set det Df = 0, its image curve, cusps and preimage counts.
    Critical {
        #[arg(long, default_value = "400x400")]
        grid: String,
        #[arg(long, default_value = "-1,3,-0.5,2", allow_hyphen_values = true)]
        window: String,
    },
    /// Saddle-node and period-doubling points of SR_k along an unfolding ray.
    BifScan {
        #[arg(long, default_value = "mu1")]
        ray: String,
        #[arg(long, default_value = "15..15")]
        k: String,
        /// `lo,hi` straddling 0 (default: scaled to the ray's conjectured law).
        #[arg(long, allow_hyphen_values = true)]
        bracket: Option<String>,
    },
    /// Ratios of bifurcation values to the conjectured scaling law.
    Scaling {
        #[arg(long, default_value = "mu1")]
        ray: String,
        #[arg(long, default_value = "10..20")]
        k: String,
        /// `sn` or `pd`.
        #[arg(long, default_value = "sn")]
        event: String,
    },
    /// Resonances of the saddle spectrum and the order-n elimination table.
    Normalform {
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Comma-separated first-component coefficients (default all 1).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        /// Comma-separated second-component coefficients (default all 1).
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
    },
    /// Bisection on a change of the homoclinic intersection count.
    Tangency {
        /// Parameter driven by the bisection (R/alpha/beta/S for henon, mu1 for grht).
        #[arg(long, default_value = "R")]
        parameter: String,
        #[arg(long, default_value = "0.06,0.0809", allow_hyphen_values = true)]
        bracket: String,
        #[arg(long, default_value_t = 1e-9)]
        width: f64,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Domain(grht_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<grht_core::Error> for CliError {
    fn from(e: grht_core::Error) -> Self {
        match e {
            grht_core::Error::Parse(m) => CliError::Config(m),
            other => CliError::Domain(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

/// Selected map family with validated parameters.
#[derive(Debug, Clone, Copy)]
enum Family {
    Grht(GrhtMapParams),
    Henon(HenonMapParams),
    Quadratic(QuadraticFold),
}

struct RunConfig {
    family: Family,
    out: String,
}

fn load_config(c: &Common) -> CliResult<RunConfig> {
    let mut map_name = None;
    let mut preset_name = None;
    let mut block = ParamBlock::new();
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut rest = String::new();
        for line in text.lines() {
            let body = line.split('#').next().unwrap_or("").trim();
            match body.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                Some(("map", v)) => map_name = Some(v.to_string()),
                Some(("preset", v)) => preset_name = Some(v.to_string()),
                _ => {
                    rest.push_str(body);
                    rest.push('\n');
                }
            }
        }
        block = ParamBlock::parse(&rest)?;
    }
    if c.preset.is_some() {
        preset_name = c.preset.clone();
    }
    if c.map.is_some() {
        map_name = c.map.clone();
    }
    for a in &c.params {
        block.set_assignment(a)?;
    }
    let base = match preset_name.as_deref() {
        Some(name) => Some(preset(name)?),
        None => None,
    };
    let map_name = map_name.unwrap_or_else(|| match base {
        Some(Preset::Henon(_)) => "henon".into(),
        _ if block.has_henon_keys() => "henon".into(),
        _ => "grht".into(),
    });
    let family = match map_name.as_str() {
        "grht" => {
            let b = match base {
                Some(Preset::Grht(p)) => p,
                Some(Preset::Henon(_)) => return config_err("preset is a henon preset but map = grht"),
                None => GrhtMapParams::param1(),
            };
            let p = block.apply_grht(b);
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
            Family::Grht(p)
        }
        "henon" => {
            let b = match base {
                Some(Preset::Henon(p)) => p,
                Some(Preset::Grht(_)) => return config_err("preset is a grht preset but map = henon"),
                None => HenonMapParams::new(-0.4, 0.8, 0.08, -0.125),
            };
            let p = block.apply_henon(b);
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
            Family::Henon(p)
        }
        "fixture-quadratic" => Family::Quadratic(QuadraticFold::default()),
        other => return config_err(format!("unknown map `{other}` (expected grht, henon or fixture-quadratic)")),
    };
    Ok(RunConfig { family, out: c.out.clone() })
}

fn parse_k_range(s: &str) -> CliResult<Vec<usize>> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| CliError::Config(format!("k range `{s}` must be lo..hi")))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|_| CliError::Config(format!("bad k bound `{v}`")));
    let (lo, hi) = (p(lo)?, p(hi)?);
    if lo > hi {
        return config_err(format!("empty k range {lo}..{hi}"));
    }
    Ok((lo..=hi).collect())
}

fn parse_floats(s: &str, n: usize, what: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Config(format!("{what}: bad number `{t}`"))))
        .collect::<CliResult<_>>()?;
    if n > 0 && v.len() != n {
        return config_err(format!("{what} needs {n} comma-separated numbers"));
    }
    Ok(v)
}

fn parse_window(s: &str) -> CliResult<Rect> {
    let v = parse_floats(s, 4, "window")?;
    if !(v[1] > v[0] && v[3] > v[2]) {
        return config_err("window must be xmin,xmax,ymin,ymax with positive extent");
    }
    Ok(Rect::new(v[0], v[1], v[2], v[3]))
}

fn parse_grid(s: &str) -> CliResult<(usize, usize)> {
    let (a, b) = s.split_once('x').ok_or_else(|| CliError::Config(format!("grid `{s}` must be NxM")))?;
    let p = |v: &str| v.trim().parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| CliError::Config(format!("bad grid size `{v}`")));
    Ok((p(a)?, p(b)?))
}

fn create(path: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::Domain(grht_core::Error::Io(format!("{path}: {e}"))))?))
}

fn pt(z: Point2) -> String {
    format!("{},{}", fmt17(z.x), fmt17(z.y))
}

fn require_grht(cfg: &RunConfig, cmd: &str) -> CliResult<GrhtMapParams> {
    match cfg.family {
        Family::Grht(p) => Ok(p),
        _ => config_err(format!("`{cmd}` needs the grht map")),
    }
}

fn with_map<R>(family: &Family, f: impl FnOnce(&dyn PlanarMap) -> CliResult<R>) -> CliResult<R> {
    match family {
        Family::Grht(p) => f(&GrhtMap::new(*p)?),
        Family::Henon(p) => f(&HenonMap::new(*p)?),
        Family::Quadratic(q) => f(q),
    }
}

fn cmd_eval(cfg: &RunConfig, x: f64, y: f64) -> CliResult<()> {
    let z = Point2::new(x, y);
    let (w, j) = match &cfg.family {
        Family::Grht(p) => {
            let m = GrhtMap::new(*p)?;
            (m.try_eval(z)?, m.jacobian(z))
        }
        other => with_map(other, |m| Ok((m.eval(z), m.jacobian(z))))?,
    };
    println!("x,y,fx,fy,j11,j12,j21,j22");
    println!("{},{},{},{},{},{}", pt(z), pt(w), fmt17(j.a11), fmt17(j.a12), fmt17(j.a21), fmt17(j.a22));
    Ok(())
}

fn cmd_sr(cfg: &RunConfig, k: &str) -> CliResult<()> {
    let p = require_grht(cfg, "sr")?;
    let ks = parse_k_range(k)?;
    let mut rows: Vec<SrSolution> = Vec::new();
    for &k in &ks {
        let fam = sr_family(&p, k)?;
        rows.extend(fam.rows().cloned());
    }
    let path = format!("{}_sr.csv", cfg.out);
    write_sr_csv(create(&path)?, &rows)?;
    let stable = rows.iter().filter(|r| r.stability.as_str() == "stable").count();
    println!("wrote {path}: {} rows ({stable} stable, {} saddle) for k = {}..{}", rows.len(), rows.len() - stable, ks[0], ks[ks.len() - 1]);
    Ok(())
}

fn default_saddle(family: &Family, saddle: Option<&str>) -> CliResult<SaddleFrame> {
    if let Some(s) = saddle {
        let v = parse_floats(s, 2, "saddle")?;
        return with_map(family, |m| Ok(saddle_frame(m, Point2::new(v[0], v[1]))?));
    }
    match family {
        Family::Grht(p) => Ok(saddle_frame(&GrhtMap::new(*p)?, Point2::ORIGIN)?),
        Family::Henon(p) => Ok(henon_saddle(&HenonMap::new(*p)?)?),
        Family::Quadratic(_) => config_err("give --saddle for the quadratic fixture"),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_manifold(
    cfg: &RunConfig,
    kind: &str,
    side: i8,
    window: &str,
    generations: usize,
    offset: f64,
    points: usize,
    saddle: Option<&str>,
) -> CliResult<()> {
    let w = parse_window(window)?;
    let opts = ManifoldOptions::for_window(w);
    let frame = default_saddle(&cfg.family, saddle)?;
    let branch = match (kind, &cfg.family) {
        ("unstable", f) => with_map(f, |m| Ok(grow_unstable(m, &frame, side, offset, points, generations, &opts)?))?,
        ("stable", Family::Grht(p)) => ManifoldBranch::merge(&grow_stable(&GrhtMap::new(*p)?, &frame, side, offset, points, generations, &opts)?),
        ("stable", Family::Henon(p)) => ManifoldBranch::merge(&grow_stable(&HenonMap::new(*p)?, &frame, side, offset, points, generations, &opts)?),
        ("stable", Family::Quadratic(q)) => ManifoldBranch::merge(&grow_stable(q, &frame, side, offset, points, generations, &opts)?),
        (other, _) => return config_err(format!("unknown manifold kind `{other}` (expected stable or unstable)")),
    };
    let path = format!("{}_manifold.csv", cfg.out);
    write_manifold_csv(create(&path)?, &branch)?;
    println!(
        "wrote {path}: {} points, {} pieces, saddle {}, lambda_s {}, lambda_u {}",
        branch.len(),
        branch.breaks.len() + usize::from(!branch.is_empty()),
        pt(frame.point),
        fmt17(frame.lambda_s),
        fmt17(frame.lambda_u)
    );
    Ok(())
}

fn cmd_basin(cfg: &RunConfig, grid: &str, window: &str, max_iter: usize, max_period: usize) -> CliResult<()> {
    let (nx, ny) = parse_grid(grid)?;
    let w = parse_window(window)?;
    let opts = BasinOptions { max_iter, max_period, ..BasinOptions::default() };
    opts.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let g = with_map(&cfg.family, |m| Ok(compute_basin(m, w, nx, ny, &opts)?))?;
    let csv_path = format!("{}_basin.csv", cfg.out);
    let pgm_path = format!("{}_basin.pgm", cfg.out);
    write_basin_csv(create(&csv_path)?, &g)?;
    write_basin_pgm(create(&pgm_path)?, &g)?;
    let periods: Vec<String> = g.periods().iter().map(u32::to_string).collect();
    println!("wrote {csv_path} and {pgm_path}; periods present: {}", periods.join(" "));
    Ok(())
}

fn cmd_critical(cfg: &RunConfig, grid: &str, window: &str) -> CliResult<()> {
    let (nx, ny) = parse_grid(grid)?;
    let w = parse_window(window)?;
    let (lc0, lc) = with_map(&cfg.family, |m| {
        let c = critical_set(m, w, nx, ny)?;
        let img = image_curve(m, &c);
        Ok((c, img))
    })?;
    let p0 = format!("{}_critical_set.csv", cfg.out);
    let p1 = format!("{}_critical_curve.csv", cfg.out);
    write_curve_csv(create(&p0)?, &lc0)?;
    write_curve_csv(create(&p1)?, &lc)?;
    println!("wrote {p0} and {p1}");
    for c in cusp_locate(&lc) {
        println!("cusp,{}", pt(c));
    }
    // Preimage counts on both sides of the longest curve piece, near its middle.
    if let Some(poly) = lc.polylines.iter().max_by_key(|p| p.len()).filter(|p| p.len() >= 3) {
        let i = poly.len() / 3;
        let t = (poly[i + 1] - poly[i - 1]).normalized();
        let n = Point2::new(-t.y, t.x) * 0.02;
        let search = Rect::new(w.xmin - 2.0, w.xmax + 2.0, w.ymin - 2.0, w.ymax + 2.0);
        let samples = [poly[i] + n, poly[i] - n];
        let counts = match &cfg.family {
            Family::Grht(p) => classify_regions(&GrhtMap::new(*p)?, &samples, search)?,
            Family::Henon(p) => classify_regions(&HenonMap::new(*p)?, &samples, search)?,
            Family::Quadratic(q) => classify_regions(q, &samples, search)?,
        };
        for (z, n, complete) in counts {
            println!("preimages,{},{n},{complete}", pt(z));
        }
    }
    Ok(())
}

fn ray_label(s: &str) -> CliResult<RayLabel> {
    RayLabel::parse(s).map_err(|e| CliError::Config(e.to_string()))
}

fn cmd_bif_scan(cfg: &RunConfig, ray: &str, k: &str, bracket: Option<&str>) -> CliResult<()> {
    let p = require_grht(cfg, "bif-scan")?;
    let label = ray_label(ray)?;
    let r = UnfoldingRay::axis(label);
    let mut events = Vec::new();
    for k in parse_k_range(k)? {
        let br = match bracket {
            Some(b) => {
                let v = parse_floats(b, 2, "bracket")?;
                [v[0], v[1]]
            }
            None => default_bracket(label, k, p.lambda.abs()),
        };
        events.extend(scan_ray(&p, &r, k, br)?);
    }
    let path = format!("{}_events.csv", cfg.out);
    write_events_csv(create(&path)?, &events)?;
    println!("wrote {path}");
    for e in &events {
        println!("{},{},{}", e.k, e.kind.as_str(), fmt17(e.epsilon));
    }
    Ok(())
}

fn cmd_scaling(cfg: &RunConfig, ray: &str, k: &str, event: &str) -> CliResult<()> {
    let p = require_grht(cfg, "scaling")?;
    let label = ray_label(ray)?;
    let kind = match event {
        "sn" => BifurcationKind::SaddleNode,
        "pd" => BifurcationKind::PeriodDoubling,
        other => return config_err(format!("unknown event `{other}` (expected sn or pd)")),
    };
    let model = label.model().expect("axis rays have a model");
    let alpha = p.lambda.abs();
    let r = UnfoldingRay::axis(label);
    let mut pts = Vec::new();
    for k in parse_k_range(k)? {
        let ev = scan_ray(&p, &r, k, default_bracket(label, k, alpha))?;
        let e = ev
            .iter()
            .find(|e| e.kind == kind)
            .ok_or_else(|| CliError::Domain(grht_core::Error::Domain(format!("no {} event for k = {k}", kind.as_str()))))?;
        pts.push((k, e.epsilon));
    }
    let fit = scaling_fit(&pts, model, alpha)?;
    let path = format!("{}_fit.csv", cfg.out);
    write_fit_csv(create(&path)?, &fit)?;
    println!("wrote {path}; model {}, last ratio {}", model.as_str(), fmt17(fit.constant));
    if let Some(x) = fit.extrapolated {
        println!("aitken,{}", fmt17(x));
    }
    Ok(())
}

fn cmd_normalform(cfg: &RunConfig, order: usize, a: Option<&str>, b: Option<&str>) -> CliResult<()> {
    let p = require_grht(cfg, "normalform")?;
    let report = detect_resonances(p.lambda, p.sigma, order.max(2) as i32, RESONANCE_TOL)?;
    for (i, j) in &report.pairs {
        println!("resonance,{i},{j}");
    }
    let coeffs = |s: Option<&str>| -> CliResult<Vec<f64>> {
        match s {
            Some(s) => parse_floats(s, order + 1, "coefficients"),
            None => Ok(vec![1.0; order + 1]),
        }
    };
    let table = OrderNTermTable::new(order, coeffs(a)?, coeffs(b)?).map_err(|e| CliError::Config(e.to_string()))?;
    let out = eliminate_order_n(p.lambda, p.sigma, &table, RESONANCE_TOL);
    let path = format!("{}_terms.csv", cfg.out);
    let mut f = create(&path)?;
    f.write_all(out.to_csv()?.as_bytes())?;
    f.flush()?;
    println!("wrote {path}");
    Ok(())
}

fn cmd_tangency(cfg: &RunConfig, parameter: &str, bracket: &str, width: f64) -> CliResult<()> {
    let v = parse_floats(bracket, 2, "bracket")?;
    let r = match cfg.family {
        Family::Henon(base) => {
            let setup = TangencySetup::henon_default();
            let mut probe = ParamBlock::from(&base);
            probe.set(parameter, 0.0).map_err(|_| CliError::Config(format!("unknown henon parameter `{parameter}`")))?;
            let count = |value: f64| {
                let mut b = ParamBlock::new();
                b.set(parameter, value)?;
                henon_intersection_count(b.apply_henon(base), &setup)
            };
            tangency_bisection(count, [v[0], v[1]], width)?
        }
        Family::Grht(base) => {
            if parameter != "mu1" {
                return config_err("grht tangency bisection drives mu1");
            }
            // The homoclinic point (1, 0): the unstable branch's fold meets the stable x-axis there.
            let window = Rect::new(0.9, 1.1, -0.02, 0.02);
            let setup = TangencySetup {
                window,
                seed_offset: 1e-2,
                n_points: 20,
                unstable_generations: 22,
                stable_depth: 22,
                unstable_sides: [true, false],
                stable_sides: [true, false],
                exclusion_radius: 0.0,
                opts: ManifoldOptions {
                    max_segment: 5e-3,
                    focus: Some(window),
                    focus_segment: 1e-4,
                    ..ManifoldOptions::for_window(Rect::new(-0.5, 2.5, -0.5, 1.5))
                },
            };
            let count = |mu1: f64| {
                let m = GrhtMap::new(GrhtMapParams { mu1, ..base })?;
                let f = saddle_frame(&m, Point2::ORIGIN)?;
                intersection_count(&m, &f, &setup)
            };
            tangency_bisection(count, [v[0], v[1]], width)?
        }
        Family::Quadratic(_) => return config_err("tangency needs the grht or henon map"),
    };
    println!("{parameter},{}", fmt17(r));
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli.common)?;
    if cli.common.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.common.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Eval { x, y } => cmd_eval(&cfg, *x, *y),
        Command::Sr { k } => cmd_sr(&cfg, k),
        Command::Manifold { kind, side, window, generations, offset, points, saddle } => {
            cmd_manifold(&cfg, kind, *side, window, *generations, *offset, *points, saddle.as_deref())
        }
        Command::Basin { grid, window, max_iter, max_period } => cmd_basin(&cfg, grid, window, *max_iter, *max_period),
        Command::Critical { grid, window } => cmd_critical(&cfg, grid, window),
        Command::BifScan { ray, k, bracket } => cmd_bif_scan(&cfg, ray, k, bracket.as_deref()),
        Command::Scaling { ray, k, event } => cmd_scaling(&cfg, ray, k, event),
        Command::Normalform { order, a, b } => cmd_normalform(&cfg, *order, a.as_deref(), b.as_deref()),
        Command::Tangency { parameter, bracket, width } => cmd_tangency(&cfg, parameter, bracket, *width),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("grht: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Domain(_) => ExitCode::from(1),
            }
        }
    }
}
