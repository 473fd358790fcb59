//! Experiment runner: a JSON config in, one deterministic CSV file out.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exponents::ExponentSequence;
use crate::minimax::SolverOptions;
use crate::products::{estimate_alpha, product_approx_search, verify_product_remez, ProductSpaceSpec};
use crate::remezlab::{default_family, density_probe, remez_constant_estimate, verify_classical_extremal};
use crate::sets::{fat_cantor, Grid, SetDescriptor};
use crate::targets::Target;

#[derive(Debug, Parser)]
#[command(name = "muntzlab", version, about = "Müntz-space and Remez-inequality experiments", long_about = None)]
#[command(after_help = "Every CSV starts with one `#` line recording the config hash, seed and mesh.\n\
Environment: MUNTZLAB_THREADS caps the worker threads.\n\
Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 I/O failure.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Growth of span{1,…,xⁿ} at 0 given a bound on [1 − s, 1], against T_n((2 − s)/s).
    #[command(after_help = "Parameters: {\"n\": int|[int], \"s\": real|[real], \"mesh\": real}\n\n\
CSV columns:\n  n               polynomial degree\n  s               length of the constraint interval [1 − s, 1]\n  \
mesh            grid spacing on [1 − s, 1]\n  computed        growth functional at 0 on the grid\n  \
predicted       T_n((2 − s)/s)\n  relative_error  |computed − predicted| / predicted")]
    Classical(RunArgs),

    /// Growth-functional sweep over a set family and a query grid on [0, rho].
    #[command(after_help = "Parameters: {\"sequence\": {...}, \"n\": int|[int], \"s\": real, \"rho\": real,\n  \
\"mesh\": real, \"family\": [set, ...] (optional), \"max_dimension\": int (optional)}\n\n\
CSV columns:\n  n       truncation index (dimension n + 1)\n  s       required measure of the constraint sets\n  \
rho     left end of the admissible region [rho, 1]\n  set_id  constraint set identifier\n  y       query point in [0, rho]\n  \
mesh    grid spacing on the constraint set\n  value   sup |p(y)| over ‖p‖ ≤ 1 on the set")]
    RemezConstant(RunArgs),

    /// Best uniform approximation errors on a set for increasing truncations.
    #[command(after_help = "Parameters: {\"target\": \"abs2x1\"|\"runge\"|{\"monomial\": m}, \"sequence\": {...},\n  \
\"set\": {...}, \"n_list\": [int], \"mesh\": real, \"max_dimension\": int (optional)}\n\n\
CSV columns:\n  n             truncation index (dimension n + 1)\n  error         max |f − p*| on the grid\n  \
lower_bound   certified lower bound on the best error\n  relative_gap  (error − lower_bound) / error\n  \
references    number of reference points\n  alternates    whether the reference signs alternate")]
    Density(RunArgs),

    /// Product-space tasks: alpha estimates, the product Remez check, or the approximation search.
    #[command(after_help = "Parameters by task:\n  \
alpha:  {\"task\": \"alpha\", \"sequences\": [...], \"n\", \"s\", \"budget\", \"mesh\"}\n  \
check:  {\"task\": \"check\", \"sequences\": [...], \"n\", \"s\", \"rho\", \"budget\", \"check_budget\" (optional), \"mesh\"}\n  \
search: {\"task\": \"search\", \"sequences\": [...], \"n\", \"target\", \"rounds\", \"restarts\", \"grid_points\" (optional)}\n\n\
CSV columns (alpha):\n  j        factor index\n  n        truncation index\n  s        measure parameter\n  \
k        number of factors\n  alpha    estimated constant\n  samples  size of the sample family\n\n\
CSV columns (check):\n  sample     fresh-sample index\n  ratio      ‖p‖ on [0, rho] over ‖p‖ on A\n  \
c          product of the alphas\n  violation  ratio > c\n\n\
CSV columns (search):\n  round       descent round (from 1)\n  best_error  best error over all starts so far")]
    Products(RunArgs),

    /// Fat Cantor sets: measure and interval count by level.
    #[command(after_help = "Parameters: {\"level\": int|[int], \"carrier\": [a, b] (optional, default [0, 1])}\n\n\
CSV columns:\n  level      construction depth K\n  a          carrier left end\n  b          carrier right end\n  \
measure    Lebesgue measure\n  intervals  number of component intervals")]
    Cantor(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV path (overrides `output_path`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Classical,
    RemezConstant,
    Density,
    Products,
    Cantor,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Classical => "classical",
            Experiment::RemezConstant => "remez-constant",
            Experiment::Density => "density",
            Experiment::Products => "products",
            Experiment::Cantor => "cantor",
        }
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub output_path: String,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 (hex) of the canonical JSON form with sorted keys. The output
    /// path is left out so the same experiment hashes the same wherever it
    /// is written.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        value.as_object_mut().expect("config is an object").remove("output_path");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 4,
        e if e.is_numeric() => 3,
        _ => 2,
    }
}

/// Reads `MUNTZLAB_THREADS` and sizes the global worker pool.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("MUNTZLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("MUNTZLAB_THREADS must be a positive integer, got {raw:?}")))?;
    // a pool built earlier in the same process wins; that only happens in tests
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs a parsed command line and returns the CSV path written.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let (experiment, args) = match &cli.command {
        Command::Classical(a) => (Experiment::Classical, a),
        Command::RemezConstant(a) => (Experiment::RemezConstant, a),
        Command::Density(a) => (Experiment::Density, a),
        Command::Products(a) => (Experiment::Products, a),
        Command::Cantor(a) => (Experiment::Cantor, a),
    };
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if config.experiment != experiment {
        return Err(Error::Config(format!(
            "config is for experiment {} but the {} subcommand was invoked",
            config.experiment.name(),
            experiment.name()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_path = out.display().to_string();
    }
    let csv = render(&config)?;
    let path = PathBuf::from(&config.output_path);
    write_csv(&path, &csv)?;
    Ok(path)
}

fn write_csv(path: &Path, csv: &str) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(Error::Config("output_path is empty".into()));
    }
    std::fs::write(path, csv)?;
    Ok(())
}

/// Runs the experiment and renders its CSV text.
pub fn render(config: &ExperimentConfig) -> Result<String> {
    match config.experiment {
        Experiment::Classical => classical(config),
        Experiment::RemezConstant => remez_constant(config),
        Experiment::Density => density(config),
        Experiment::Products => products(config),
        Experiment::Cantor => cantor(config),
    }
}

fn params<T: DeserializeOwned>(config: &ExperimentConfig) -> Result<T> {
    serde_json::from_value(config.parameters.clone()).map_err(|e| Error::Config(format!("parameters: {e}")))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn default_mesh() -> f64 {
    1e-3
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

fn check_mesh(mesh: f64) -> Result<()> {
    check(mesh > 0.0 && mesh <= 1.0, || format!("mesh must lie in (0, 1], got {mesh}"))
}

fn options(max_dimension: Option<usize>) -> Result<SolverOptions> {
    let opts = SolverOptions::default();
    match max_dimension {
        Some(cap) => {
            check(cap >= 1, || "max_dimension must be at least 1".into())?;
            Ok(opts.with_max_dimension(cap))
        }
        None => Ok(opts),
    }
}

/// Header comment plus column line.
fn header(config: &ExperimentConfig, mesh: Option<f64>, extra: &str, columns: &str) -> String {
    let mesh = mesh.map_or_else(|| "none".to_string(), num);
    let mut out = format!("# config_sha256={} seed={} mesh={mesh}", config.hash(), config.seed);
    if !extra.is_empty() {
        out.push(' ');
        out.push_str(extra);
    }
    out.push('\n');
    out.push_str(columns);
    out.push('\n');
    out
}

fn push_rows(out: &mut String, rows: Vec<String>) {
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalParams {
    n: OneOrMany<u32>,
    s: OneOrMany<f64>,
    #[serde(default = "default_mesh")]
    mesh: f64,
}

fn classical(config: &ExperimentConfig) -> Result<String> {
    let p: ClassicalParams = params(config)?;
    check_mesh(p.mesh)?;
    let (mut ns, mut ss) = (p.n.to_vec(), p.s.to_vec());
    check(!ns.is_empty() && !ss.is_empty(), || "n and s must be non-empty".into())?;
    check(ns.iter().all(|&n| n <= 15), || "n must be at most 15".into())?;
    check(ss.iter().all(|&s| s > 0.0 && s <= 1.0), || "s must lie in (0, 1]".into())?;
    ns.sort_unstable();
    ns.dedup();
    ss.sort_by(f64::total_cmp);
    ss.dedup();
    let opts = SolverOptions::default();
    let mut rows = Vec::new();
    for &n in &ns {
        for &s in &ss {
            let r = verify_classical_extremal(n, s, p.mesh, &opts)?;
            rows.push(format!("{},{},{},{},{},{}", r.n, num(r.s), num(r.mesh), num(r.computed), num(r.predicted), num(r.relative_error)));
        }
    }
    let mut out = header(config, Some(p.mesh), "", "n,s,mesh,computed,predicted,relative_error");
    push_rows(&mut out, rows);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RemezParams {
    sequence: ExponentSequence,
    n: OneOrMany<usize>,
    s: f64,
    rho: f64,
    #[serde(default = "default_mesh")]
    mesh: f64,
    #[serde(default)]
    family: Option<Vec<SetDescriptor>>,
    #[serde(default)]
    max_dimension: Option<usize>,
}

fn remez_constant(config: &ExperimentConfig) -> Result<String> {
    let p: RemezParams = params(config)?;
    check_mesh(p.mesh)?;
    p.sequence.validate()?;
    check(p.s > 0.0 && p.s < 1.0, || format!("s must lie in (0, 1), got {}", p.s))?;
    check(p.rho > 0.0 && p.rho <= 1.0 - p.s, || format!("rho must lie in (0, 1 − s], got {}", p.rho))?;
    let opts = options(p.max_dimension)?;
    let mut ns = p.n.to_vec();
    check(!ns.is_empty(), || "n must be non-empty".into())?;
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        let dim = n + 1;
        check(dim <= opts.max_dimension, || format!("dimension {dim} exceeds max_dimension {}", opts.max_dimension))?;
    }
    let family = match p.family {
        Some(f) => f,
        None => default_family(p.s, p.rho)?,
    };
    check(!family.is_empty(), || "family must be non-empty".into())?;
    let mut rows: Vec<(usize, String, f64, String)> = Vec::new();
    for &n in &ns {
        let est = remez_constant_estimate(&p.sequence, n, p.s, p.rho, &family, p.mesh, &opts)?;
        for g in est.samples {
            let line = format!("{},{},{},{},{},{},{}", g.n, num(p.s), num(p.rho), g.set_id, num(g.y), num(p.mesh), num(g.value));
            rows.push((g.n, g.set_id, g.y, line));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    let mut out = header(config, Some(p.mesh), "", "n,s,rho,set_id,y,mesh,value");
    push_rows(&mut out, rows.into_iter().map(|r| r.3).collect());
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityParams {
    target: Target,
    sequence: ExponentSequence,
    set: SetDescriptor,
    n_list: Vec<usize>,
    #[serde(default = "default_mesh")]
    mesh: f64,
    #[serde(default)]
    max_dimension: Option<usize>,
}

fn density(config: &ExperimentConfig) -> Result<String> {
    let p: DensityParams = params(config)?;
    check_mesh(p.mesh)?;
    p.sequence.validate()?;
    let opts = options(p.max_dimension)?;
    check(!p.n_list.is_empty(), || "n_list must be non-empty".into())?;
    check(p.n_list.windows(2).all(|w| w[0] < w[1]), || "n_list must be strictly increasing".into())?;
    let top = *p.n_list.last().expect("non-empty") + 1;
    check(top <= opts.max_dimension, || format!("dimension {top} exceeds max_dimension {}", opts.max_dimension))?;
    let set = p.set.build()?;
    let probe = density_probe(&p.target, &p.sequence, &set, &p.n_list, p.mesh, &opts)?;
    let rows = probe
        .errors_by_n
        .iter()
        .zip(&probe.certificates)
        .map(|(&(n, err), c)| {
            format!("{n},{},{},{},{},{}", num(err), num(c.certified_lower_bound), num(c.relative_gap), c.reference_points.len(), c.alternates())
        })
        .collect();
    let mut out = header(config, Some(p.mesh), &format!("target={} set={}", p.target.name(), p.set.id()), "n,error,lower_bound,relative_gap,references,alternates");
    push_rows(&mut out, rows);
    Ok(out)
}

#[derive(Debug, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase", deny_unknown_fields)]
enum ProductsParams {
    Alpha {
        sequences: Vec<ExponentSequence>,
        n: usize,
        s: f64,
        budget: usize,
        #[serde(default = "default_mesh")]
        mesh: f64,
    },
    Check {
        sequences: Vec<ExponentSequence>,
        n: usize,
        s: f64,
        rho: f64,
        budget: usize,
        #[serde(default)]
        check_budget: Option<usize>,
        #[serde(default = "default_mesh")]
        mesh: f64,
    },
    Search {
        sequences: Vec<ExponentSequence>,
        n: usize,
        target: Target,
        rounds: usize,
        #[serde(default)]
        restarts: usize,
        #[serde(default = "default_grid_points")]
        grid_points: usize,
    },
}

fn default_grid_points() -> usize {
    1001
}

fn products(config: &ExperimentConfig) -> Result<String> {
    let p: ProductsParams = params(config)?;
    let opts = SolverOptions::default();
    let seed = config.seed;
    let check_common = |seqs: &[ExponentSequence], n: usize| -> Result<ProductSpaceSpec> {
        check(n < opts.max_dimension, || format!("dimension {} exceeds max_dimension {}", n + 1, opts.max_dimension))?;
        ProductSpaceSpec::new(seqs.to_vec())
    };
    match p {
        ProductsParams::Alpha { sequences, n, s, budget, mesh } => {
            check_mesh(mesh)?;
            check(s > 0.0 && s < 1.0, || format!("s must lie in (0, 1), got {s}"))?;
            check(budget >= 1, || "budget must be at least 1".into())?;
            let spec = check_common(&sequences, n)?;
            let k = spec.k();
            let mut out = header(config, Some(mesh), "task=alpha", "j,n,s,k,alpha,samples");
            for (j, seq) in spec.sequences().iter().enumerate() {
                let a = estimate_alpha(seq, j, n, s, k, budget, seed, mesh, &opts)?;
                writeln!(out, "{},{},{},{},{},{}", a.j, a.n, num(a.s), a.k, num(a.alpha), a.sample_count).expect("string write");
            }
            Ok(out)
        }
        ProductsParams::Check { sequences, n, s, rho, budget, check_budget, mesh } => {
            check_mesh(mesh)?;
            check(s > 0.0 && s < 1.0, || format!("s must lie in (0, 1), got {s}"))?;
            check(rho > 0.0 && rho <= 1.0 - s, || format!("rho must lie in (0, 1 − s], got {rho}"))?;
            check(budget >= 1, || "budget must be at least 1".into())?;
            let spec = check_common(&sequences, n)?;
            let k = spec.k();
            let alphas = spec
                .sequences()
                .iter()
                .enumerate()
                .map(|(j, seq)| estimate_alpha(seq, j, n, s, k, budget, seed, mesh, &opts))
                .collect::<Result<Vec<_>>>()?;
            let report = verify_product_remez(&spec, n, s, rho, &alphas, check_budget.unwrap_or(budget), seed, mesh, &opts)?;
            let extra = format!(
                "task=check c={} in_sample={} chain_violations={} norm_violations={} violations={}",
                report.c, report.in_sample, report.in_sample_chain_violations, report.in_sample_norm_violations, report.violations
            );
            let mut out = header(config, Some(mesh), &extra, "sample,ratio,c,violation");
            push_rows(&mut out, report.rows.iter().map(|r| format!("{},{},{},{}", r.sample, num(r.ratio), num(r.c), r.violation)).collect());
            Ok(out)
        }
        ProductsParams::Search { sequences, n, target, rounds, restarts, grid_points } => {
            check(rounds >= 1, || "rounds must be at least 1".into())?;
            check((2..=1_000_000).contains(&grid_points), || "grid_points must lie in [2, 10⁶]".into())?;
            let spec = check_common(&sequences, n)?;
            let grid = Grid::uniform(0.0, 1.0, grid_points)?;
            let f = target.sample(grid.points());
            let report = product_approx_search(&f, &grid, &spec, n, rounds, restarts, seed, &opts)?;
            let mut out = header(config, Some(grid.mesh()), &format!("task=search target={}", target.name()), "round,best_error");
            push_rows(&mut out, report.best_error_by_round.iter().enumerate().map(|(r, e)| format!("{},{}", r + 1, num(*e))).collect());
            Ok(out)
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CantorParams {
    level: OneOrMany<u32>,
    #[serde(default = "unit_carrier")]
    carrier: [f64; 2],
}

fn unit_carrier() -> [f64; 2] {
    [0.0, 1.0]
}

fn cantor(config: &ExperimentConfig) -> Result<String> {
    let p: CantorParams = params(config)?;
    let mut levels = p.level.to_vec();
    check(!levels.is_empty(), || "level must be non-empty".into())?;
    check(levels.iter().all(|&l| l <= 20), || "level must be at most 20".into())?;
    levels.sort_unstable();
    levels.dedup();
    let [a, b] = p.carrier;
    let mut rows = Vec::new();
    for level in levels {
        let set = fat_cantor(level, (a, b))?;
        rows.push(format!("{level},{},{},{},{}", num(a), num(b), num(set.measure()), set.intervals().len()));
    }
    let mut out = header(config, None, "", "level,a,b,measure,intervals");
    push_rows(&mut out, rows);
    Ok(out)
}
