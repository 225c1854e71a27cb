use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use civd::artifact::Artifact;
use civd::civd::{BuildOptions, Civd, Site};
use civd::decomposition::Cell;
use civd::oracle::{validate_with, OracleReport};
use civd::{CivdError, InfluenceModel, ModelKind, Point, Region};

#[derive(Parser)]
#[command(name = "civd", version, about = "Approximate clustering-induced Voronoi diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a diagram from a point file and write it as JSON.
    Build(BuildArgs),
    /// Answer point queries against a built diagram.
    Query(QueryArgs),
    /// Check sampled queries against the exact optimum.
    Validate(ValidateArgs),
    /// Draw a planar diagram as SVG.
    RenderSvg(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Vector,
    Density,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Force exponent of the vector model.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Expected dimension; inferred from the input when omitted.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Seed for generated points and later validation runs.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV (one point per line) or JSON (`{"dim": d, "points": [...]}`).
    #[arg(long, required_unless_present = "uniform")]
    input: Option<PathBuf>,
    /// Generate this many uniform points in the unit cube instead of reading input.
    #[arg(long, conflicts_with = "input", requires = "dim")]
    uniform: Option<usize>,
    #[arg(long)]
    output: PathBuf,
    /// Override the decomposition tolerance.
    #[arg(long)]
    beta: Option<f64>,
    /// Largest box tree stored in the artifact; bigger diagrams are located lazily.
    #[arg(long, default_value_t = 2_000_000)]
    cell_cap: usize,
    /// Also write an SVG rendering (2-D only).
    #[arg(long)]
    render: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// Artifact written by `build`.
    #[arg(long)]
    input: PathBuf,
    /// Query point as comma-separated coordinates; repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    points: Vec<String>,
    /// File of query points, in the same formats as build input.
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Defaults to the seed stored in the artifact.
    #[arg(long)]
    seed: Option<u64>,
    /// Report file; a summary is printed either way.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, env = "CIVD_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Refuse to draw more cells than this.
    #[arg(long, default_value_t = 200_000)]
    max_cells: usize,
}

/// Failure caused by bad input files, flags or query points.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(e: impl std::fmt::Display) -> anyhow::Error {
    InputError(e.to_string()).into()
}

/// Maps library errors caused by the caller's data to input errors.
fn classify(e: CivdError) -> anyhow::Error {
    match e {
        CivdError::DimensionMismatch { .. }
        | CivdError::UnsupportedDimension(_)
        | CivdError::NonFinite
        | CivdError::EmptyInput
        | CivdError::DuplicatePoints(..)
        | CivdError::SingularQuery(_)
        | CivdError::NoSolution(_)
        | CivdError::Domain { .. }
        | CivdError::InvalidConfig(_) => input_err(e),
        other => other.into(),
    }
}

#[derive(Deserialize)]
struct JsonPoints {
    dim: usize,
    points: Vec<Vec<f64>>,
}

fn read_points(path: &Path) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = if text.trim_start().starts_with('{') {
        let doc: JsonPoints = serde_json::from_str(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        if let Some(i) = doc.points.iter().position(|r| r.len() != doc.dim) {
            return Err(input_err(format!("point {i} does not have {} coordinates", doc.dim)));
        }
        doc.points
    } else {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(input_err)?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| input_err(format!("{} record {}: {e}", path.display(), line + 1)))?;
            rows.push(row);
        }
        rows
    };
    rows.iter().map(|r| Point::new(r).map_err(classify)).collect()
}

fn parse_point(s: &str) -> Result<Point> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| input_err(format!("query point `{s}`: {e}")))?;
    Point::new(&coords).map_err(classify)
}

fn load_artifact(path: &Path) -> Result<Artifact> {
    let text = std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    Artifact::from_json(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn build(args: BuildArgs) -> Result<()> {
    let points = match (&args.input, args.uniform) {
        (Some(path), _) => read_points(path)?,
        (None, Some(n)) => {
            let dim = args.dim.unwrap_or(2);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(0));
            (0..n).map(|_| Point::from_fn(dim, |_| rng.gen_range(0.0..1.0))).collect()
        }
        (None, None) => bail!(InputError("no input given".into())),
    };
    let dim = points.first().map(Point::dim).ok_or_else(|| input_err("empty point set"))?;
    if let Some(want) = args.dim {
        if want != dim {
            return Err(classify(CivdError::DimensionMismatch { expected: want, got: dim }));
        }
    }
    let kind = match args.model {
        Model::Vector => ModelKind::Vector { t: args.t },
        Model::Density => ModelKind::Density,
    };
    let model = InfluenceModel::new(kind, dim, args.epsilon).map_err(classify)?;
    let opts = BuildOptions { beta: args.beta, domination: None };
    let artifact = Artifact::build(&points, model, opts, args.cell_cap, args.seed).map_err(classify)?;
    let m = &artifact.meta;
    log::info!("built in {:.3}s", m.build_seconds);
    println!(
        "n={} dim={} beta={} delta_inv={} cells={} (type1 box {}, type1 difference {}, type2 {}) materialized={}",
        m.n,
        m.dim,
        m.beta,
        m.delta_inv,
        m.stats.cells(),
        m.stats.type1_box,
        m.stats.type1_difference,
        m.stats.type2,
        m.materialized
    );
    write_file(&args.output, &artifact.to_json()?)?;
    if let Some(svg) = &args.render {
        write_file(svg, &render(&artifact, 200_000)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct QueryOutput {
    query: Point,
    site: Site,
    points: Vec<usize>,
    value: f64,
}

fn query(args: QueryArgs) -> Result<()> {
    let artifact = load_artifact(&args.input)?;
    let civd = artifact.civd();
    let mut queries = args.points.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>>>()?;
    if let Some(path) = &args.queries {
        queries.extend(read_points(path)?);
    }
    if queries.is_empty() {
        bail!(InputError("no query points given".into()));
    }
    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        let a = artifact.query(&civd, &q).map_err(classify)?;
        out.push(QueryOutput { query: q, site: a.site, points: a.points, value: a.value });
    }
    let json = serde_json::to_string_pretty(&out)?;
    match &args.output {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidationReport {
    samples: usize,
    failures: usize,
    worst_ratio: f64,
    epsilon: f64,
    seed: u64,
    reports: Vec<OracleReport>,
}

/// Returns whether every sample passed.
fn validate(args: ValidateArgs) -> Result<bool> {
    let artifact = load_artifact(&args.input)?;
    let civd = artifact.civd();
    let seed = args.seed.or(artifact.meta.seed).unwrap_or(0);
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let reports = validate_with(&civd, args.samples, seed, threads, |q| artifact.query(&civd, q).map(|a| a.value))
        .map_err(classify)?;
    let failures = reports.iter().filter(|r| !r.pass).count();
    let worst_ratio = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    println!("{} samples, {failures} failures, worst ratio {worst_ratio}", reports.len());
    let report = ValidationReport {
        samples: reports.len(),
        failures,
        worst_ratio,
        epsilon: civd.model.epsilon,
        seed,
        reports,
    };
    if let Some(path) = &args.output {
        write_file(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(failures == 0)
}

fn site_color(site: &Site) -> String {
    let mut h = DefaultHasher::new();
    site.hash(&mut h);
    let x = h.finish();
    format!("hsl({},{}%,{}%)", x % 360, 45 + (x >> 16) % 30, 55 + (x >> 32) % 25)
}

/// Draws cells, each filled by the color of its site, and the input points.
fn render(artifact: &Artifact, max_cells: usize) -> Result<String> {
    let civd = artifact.civd();
    if civd.dim() != 2 {
        return Err(classify(CivdError::UnsupportedDimension(civd.dim())));
    }
    let mut cells: Vec<(Cell, Site)> = Vec::new();
    match (&artifact.box_tree, &artifact.cells) {
        (Some(bt), Some(sites)) => {
            if bt.cells.len() > max_cells {
                bail!("{} cells exceed the rendering limit of {max_cells}", bt.cells.len());
            }
            cells.extend(bt.cells.iter().copied().zip(sites.iter().cloned()));
        }
        _ => bail!("the artifact stores no cell list; rebuild with a larger --cell-cap"),
    }
    Ok(svg(&civd, &cells))
}

fn svg(civd: &Civd, cells: &[(Cell, Site)]) -> String {
    const SIZE: f64 = 800.0;
    let pts = civd.points();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    let mut grow = |x: f64, y: f64| {
        lo = [lo[0].min(x), lo[1].min(y)];
        hi = [hi[0].max(x), hi[1].max(y)];
    };
    for p in pts {
        grow(p.get(0), p.get(1));
    }
    for (c, _) in cells {
        let b = c.region.outer();
        grow(b.lo(0), b.lo(1));
        grow(b.hi(0), b.hi(1));
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let scale = SIZE / span;
    let x = |v: f64| (v - lo[0]) * scale;
    let y = |v: f64| SIZE - (v - lo[1]) * scale;
    let rect = |b: &civd::AxisBox| {
        format!(
            "M{:.3},{:.3}H{:.3}V{:.3}H{:.3}Z",
            x(b.lo(0)),
            y(b.lo(1)),
            x(b.hi(0)),
            y(b.hi(1)),
            x(b.lo(0))
        )
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-5 -5 {} {}" width="{}" height="{}">"#,
        SIZE + 10.0,
        SIZE + 10.0,
        SIZE + 10.0,
        SIZE + 10.0
    );
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="0.3" fill-rule="evenodd">"#);
    for (cell, site) in cells {
        let d = match &cell.region {
            Region::Box { outer } => rect(outer),
            Region::BoxDifference { outer, inner } => format!("{}{}", rect(outer), rect(inner)),
        };
        let _ = writeln!(s, r#"<path d="{d}" fill="{}"/>"#, site_color(site));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g fill="black">"#);
    for p in pts {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="2.5"/>"#, x(p.get(0)), y(p.get(1)));
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build(a) => build(a)?,
        Command::Query(a) => query(a)?,
        Command::Validate(a) => {
            if !validate(a)? {
                return Ok(ExitCode::from(2));
            }
        }
        Command::RenderSvg(a) => {
            let artifact = load_artifact(&a.input)?;
            write_file(&a.output, &render(&artifact, a.max_cells)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
