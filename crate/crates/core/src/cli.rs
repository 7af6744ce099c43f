//! Command-line front end: argument parsing, config files and the
//! `fit`, `simulate`, `summarize`, `envelope`, `csr-test` and `report`
//! commands.
//!
//! Settings resolve as command-line flag, then `--config` file entry, then
//! built-in default. Config files hold `key = value` lines whose keys are
//! the long flag names; `#` starts a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::csr::{erl_global_test, r_grid, GlobalEnvelopeResult, DEFAULT_R_STEPS};
use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::inference::{bootstrap_ci, fit, BootstrapResult, FitConfig, FitResult, GridSpec};
use crate::io::{
    band_csv, curves_csv, ingest_csv, order_sequence, sequence_csv, write_json, write_string,
    OrderRule,
};
use crate::model::{pi_of_r_report, ModelParams, PiOfR, PointSequence};
use crate::rng::derive_seed;
use crate::sampler::{simulate, simulate_batch, SimulationConfig, DEFAULT_MAX_REJECTS};
use crate::summaries::{envelopes, EnvelopeBand, EnvelopeConfig, PerPointSummaries, StatisticKind};
use crate::svg;

#[derive(Debug, Parser)]
#[command(
    name = "sspp",
    version,
    about = "Sequential spatial point process toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum-likelihood fit of (theta, r) on a grid with optional simplex polish.
    Fit(FitArgs),
    /// Simulate sequences from given parameters.
    Simulate(SimulateArgs),
    /// Compute the four order-aware summary curves of a sequence.
    Summarize(SummarizeArgs),
    /// Pointwise Monte-Carlo envelopes of the summary curves.
    Envelope(EnvelopeArgs),
    /// Global ERL envelope test of complete spatial randomness.
    CsrTest(CsrArgs),
    /// Full pipeline: CSR test, fit, bootstrap, envelopes and interaction profile.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Config file with `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV with columns x,y[,dbh].
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Window as xmin,ymin,xmax,ymax; the bounding box of the points when omitted.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, value_enum)]
    pub order: Option<OrderRule>,
    /// Raster cell size; shorter window side / 200 by default.
    #[arg(long)]
    pub cell_size: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitOptions {
    /// theta grid as lo,hi,step.
    #[arg(long)]
    pub theta_grid: Option<String>,
    #[arg(long)]
    pub r_lower: Option<f64>,
    #[arg(long)]
    pub r_upper: Option<f64>,
    #[arg(long)]
    pub r_step: Option<f64>,
    /// Nelder-Mead polish after the grid search.
    #[arg(long)]
    pub refine: Option<bool>,
    /// Bootstrap replicates for confidence intervals (0 disables).
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitOptions,
    /// Write the surface heat map.
    #[arg(long)]
    pub svg: Option<bool>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub window: Option<String>,
    /// Fixed starting points as "x,y;x,y".
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub max_rejects: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub cumulative: Option<bool>,
}

#[derive(Debug, Clone, Args)]
pub struct EnvelopeOptions {
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub level: Option<f64>,
    /// One statistic; all four when omitted.
    #[arg(long)]
    pub statistic: Option<String>,
    #[arg(long)]
    pub cumulative: Option<bool>,
}

#[derive(Debug, Clone, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub envelope: EnvelopeOptions,
}

#[derive(Debug, Clone, Args)]
pub struct CsrOptions {
    #[arg(long)]
    pub n_sim: Option<usize>,
    /// Largest distance; min(5, half the shorter side) by default.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_steps: Option<usize>,
    /// Significance level.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CsrArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub csr: CsrOptions,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitOptions,
    #[command(flatten)]
    pub envelope: EnvelopeOptions,
    #[command(flatten)]
    pub csr: CsrOptions,
}

/// `key = value` settings from a config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {}: expected key = value", i + 1))
            })?;
            let key = k.trim().replace('_', "-");
            let value = v.trim().trim_matches('"').to_string();
            entries.insert(key, value);
        }
        Ok(Self { entries })
    }

    /// Flag value, else config entry, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("config key '{key}': cannot parse '{raw}'"))),
        }
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Like [`pick`](Self::pick) for values that carry their own parser.
    fn pick_str(&self, flag: &Option<String>, key: &str) -> Option<String> {
        flag.clone().or_else(|| self.entries.get(key).cloned())
    }
}

/// Fully resolved settings of one run, written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub input: Option<String>,
    pub window: Option<String>,
    pub order: Option<OrderRule>,
    pub cell_size: Option<f64>,
    pub fit: Option<FitConfig>,
    pub simulation: Option<SimulationConfig>,
    pub replicates: Option<usize>,
    pub radius: Option<f64>,
    pub envelope: Option<EnvelopeConfig>,
    pub statistics: Option<Vec<StatisticKind>>,
    pub csr: Option<CsrSettings>,
}

impl RunConfig {
    fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            input: None,
            window: None,
            order: None,
            cell_size: None,
            fit: None,
            simulation: None,
            replicates: None,
            radius: None,
            envelope: None,
            statistics: None,
            csr: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsrSettings {
    pub n_sim: usize,
    pub r_max: f64,
    pub r_steps: usize,
    pub alpha: f64,
    pub seed: u64,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Summarize(a) => run_summarize(a),
        Command::Envelope(a) => run_envelope(a),
        Command::CsrTest(a) => run_csr(a),
        Command::Report(a) => run_report(a),
    }
}

/// Parses `"x,y;x,y"`.
pub fn parse_points(s: &str) -> Result<Vec<Point>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (x, y) = p
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("point '{p}' must be 'x,y'")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("'{v}' is not a number")))
            };
            Ok(Point::new(parse(x)?, parse(y)?))
        })
        .collect()
}

fn parse_grid(s: &str) -> Result<GridSpec> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("grid '{s}' must be lo,hi,step")))
        })
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [lo, hi, step] => Ok(GridSpec::new(*lo, *hi, *step)),
        _ => Err(Error::Parse(format!("grid '{s}' must be lo,hi,step"))),
    }
}

struct Loaded {
    seq: PointSequence,
    max_dbh: Option<f64>,
}

fn load_input(
    input: &InputArgs,
    cfg: &ConfigFile,
    default_order: OrderRule,
    run: &mut RunConfig,
) -> Result<Loaded> {
    let path: PathBuf = cfg
        .pick(input.input.clone(), "input")?
        .ok_or_else(|| Error::Config("missing --input".into()))?;
    let window = match cfg.pick_str(&input.window, "window") {
        Some(w) => Some(w.parse::<Window>()?),
        None => None,
    };
    let record = ingest_csv(&path, window)?;
    let order_default = if record.dbh.is_some() {
        default_order
    } else {
        OrderRule::Given
    };
    let order: OrderRule = cfg.pick_or(input.order, "order", order_default)?;
    let seq = order_sequence(&record, order)?;
    run.input = Some(path.display().to_string());
    run.window = Some(record.window.to_string());
    run.order = Some(order);
    run.cell_size = cfg.pick(input.cell_size, "cell-size")?;
    Ok(Loaded {
        seq,
        max_dbh: record.max_dbh(),
    })
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn fit_config(
    opts: &FitOptions,
    cfg: &ConfigFile,
    seed: u64,
    cell_size: Option<f64>,
) -> Result<FitConfig> {
    let d = FitConfig::default();
    let theta_grid = match cfg.pick_str(&opts.theta_grid, "theta-grid") {
        Some(s) => parse_grid(&s)?,
        None => d.theta_grid,
    };
    Ok(FitConfig {
        theta_grid,
        r_lower: cfg.pick(opts.r_lower, "r-lower")?,
        r_upper: cfg.pick_or(opts.r_upper, "r-upper", d.r_upper)?,
        r_step: cfg.pick_or(opts.r_step, "r-step", d.r_step)?,
        refine: cfg.pick_or(opts.refine, "refine", d.refine)?,
        cell_size,
        bootstrap_replicates: cfg.pick_or(opts.bootstrap, "bootstrap", d.bootstrap_replicates)?,
        seed,
    })
}

fn surface_csv(f: &FitResult) -> String {
    let mut out = String::from("theta,r,loglik\n");
    for s in &f.surface {
        out.push_str(&format!("{},{},{}\n", s.theta, s.r, s.loglik));
    }
    out
}

fn write_fit_outputs(
    dir: &Path,
    f: &FitResult,
    boot: Option<&BootstrapResult>,
    with_svg: bool,
) -> Result<Vec<String>> {
    let mut files = vec!["fit.json".to_string(), "surface.csv".to_string()];
    write_json(dir.join("fit.json"), f)?;
    write_string(dir.join("surface.csv"), &surface_csv(f))?;
    if let Some(b) = boot {
        write_json(dir.join("bootstrap.json"), b)?;
        files.push("bootstrap.json".into());
    }
    if with_svg {
        write_string(dir.join("surface.svg"), &svg::surface_svg(f))?;
        files.push("surface.svg".into());
    }
    Ok(files)
}

fn fit_and_bootstrap(
    seq: &PointSequence,
    config: &FitConfig,
) -> Result<(FitResult, Option<BootstrapResult>)> {
    let mut result = fit(seq, config)?;
    if config.bootstrap_replicates == 0 {
        return Ok((result, None));
    }
    let boot = bootstrap_ci(seq, &result, config)?;
    result.theta_ci = Some(boot.theta_ci);
    result.r_ci = Some(boot.r_ci);
    result.warnings.extend(boot.warnings.iter().cloned());
    Ok((result, Some(boot)))
}

fn run_fit(a: &FitArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let mut run = RunConfig::new("fit", seed);
    let loaded = load_input(&a.input, &cfg, OrderRule::DescendingMark, &mut run)?;
    let config = fit_config(&a.fit, &cfg, seed, run.cell_size)?;
    run.fit = Some(config.clone());
    let with_svg = cfg.pick_or(a.svg, "svg", true)?;
    prepare_out(&a.common.out)?;
    let (f, boot) = fit_and_bootstrap(&loaded.seq, &config)?;
    write_fit_outputs(&a.common.out, &f, boot.as_ref(), with_svg)?;
    write_json(a.common.out.join("run_config.json"), &run)
}

fn run_simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let window = match cfg.pick_str(&a.window, "window") {
        Some(w) => w.parse::<Window>()?,
        None => Window::unit(),
    };
    let theta = cfg
        .pick(a.theta, "theta")?
        .ok_or_else(|| Error::Config("missing --theta".into()))?;
    let r = cfg
        .pick(a.r, "r")?
        .ok_or_else(|| Error::Config("missing --r".into()))?;
    let n = cfg
        .pick(a.n, "n")?
        .ok_or_else(|| Error::Config("missing --n".into()))?;
    let start = match cfg.pick_str(&a.start, "start") {
        Some(s) => parse_points(&s)?,
        None => Vec::new(),
    };
    let replicates = cfg.pick_or(a.replicates, "replicates", 1)?;
    let mut sim = SimulationConfig::new(ModelParams::new(theta, r, window)?, n, seed)
        .with_start_points(start);
    sim.max_rejects_per_point = cfg.pick_or(a.max_rejects, "max-rejects", DEFAULT_MAX_REJECTS)?;
    sim.validate()?;

    let mut run = RunConfig::new("simulate", seed);
    run.window = Some(window.to_string());
    run.simulation = Some(sim.clone());
    run.replicates = Some(replicates);
    prepare_out(&a.common.out)?;
    if replicates <= 1 {
        let seq = simulate(&sim)?;
        write_string(a.common.out.join("sequence.csv"), &sequence_csv(&seq))?;
        write_string(
            a.common.out.join("pattern.svg"),
            &svg::pattern_svg(&seq, "Simulated sequence"),
        )?;
    } else {
        for (j, seq) in simulate_batch(&sim, replicates)?.iter().enumerate() {
            write_string(
                a.common.out.join(format!("sequence_{:04}.csv", j + 1)),
                &sequence_csv(seq),
            )?;
        }
    }
    write_json(a.common.out.join("run_config.json"), &run)
}

fn resolve_radius(flag: Option<f64>, cfg: &ConfigFile) -> Result<f64> {
    cfg.pick(flag, "r")?
        .ok_or_else(|| Error::Config("missing --r".into()))
}

fn run_summarize(a: &SummarizeArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let mut run = RunConfig::new("summarize", seed);
    let loaded = load_input(&a.input, &cfg, OrderRule::DescendingMark, &mut run)?;
    let r = resolve_radius(a.r, &cfg)?;
    let cumulative = cfg.pick_or(a.cumulative, "cumulative", true)?;
    run.radius = Some(r);
    let h = run
        .cell_size
        .unwrap_or_else(|| loaded.seq.window().default_cell_size());
    let summaries = PerPointSummaries::compute(&loaded.seq, r, h)?;
    let curves: Vec<_> = StatisticKind::ALL
        .iter()
        .map(|&k| summaries.curve(k, cumulative))
        .collect();
    prepare_out(&a.common.out)?;
    write_string(a.common.out.join("summaries.csv"), &curves_csv(&curves))?;
    write_json(a.common.out.join("summaries.json"), &curves)?;
    write_string(
        a.common.out.join("summaries.svg"),
        &svg::curves_panel_svg(&curves),
    )?;
    write_json(a.common.out.join("run_config.json"), &run)
}

fn envelope_settings(
    opts: &EnvelopeOptions,
    cfg: &ConfigFile,
    seed: u64,
    cell_size: Option<f64>,
) -> Result<(EnvelopeConfig, Vec<StatisticKind>)> {
    let d = EnvelopeConfig::default();
    let config = EnvelopeConfig {
        replicates: cfg.pick_or(opts.replicates, "replicates", d.replicates)?,
        level: cfg.pick_or(opts.level, "level", d.level)?,
        seed,
        cell_size,
        cumulative: cfg.pick_or(opts.cumulative, "cumulative", d.cumulative)?,
    };
    let kinds = match cfg.pick_str(&opts.statistic, "statistic") {
        Some(s) => vec![s.parse()?],
        None => StatisticKind::ALL.to_vec(),
    };
    Ok((config, kinds))
}

fn write_envelopes(dir: &Path, bands: &[EnvelopeBand]) -> Result<Vec<String>> {
    let mut files = Vec::new();
    for b in bands {
        let name = format!("envelope_{}.csv", b.kind.name());
        write_string(dir.join(&name), &band_csv(b))?;
        files.push(name);
    }
    write_json(dir.join("envelopes.json"), &bands)?;
    write_string(dir.join("envelopes.svg"), &svg::bands_panel_svg(bands))?;
    files.push("envelopes.json".into());
    files.push("envelopes.svg".into());
    Ok(files)
}

fn run_envelope(a: &EnvelopeArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let mut run = RunConfig::new("envelope", seed);
    let loaded = load_input(&a.input, &cfg, OrderRule::DescendingMark, &mut run)?;
    let theta = cfg
        .pick(a.theta, "theta")?
        .ok_or_else(|| Error::Config("missing --theta".into()))?;
    let r = resolve_radius(a.r, &cfg)?;
    let params = ModelParams::new(theta, r, *loaded.seq.window())?;
    let (config, kinds) = envelope_settings(&a.envelope, &cfg, seed, run.cell_size)?;
    run.radius = Some(r);
    run.envelope = Some(config);
    run.statistics = Some(kinds.clone());
    let bands = envelopes(&loaded.seq, &params, &kinds, &config)?;
    prepare_out(&a.common.out)?;
    write_envelopes(&a.common.out, &bands)?;
    write_json(a.common.out.join("run_config.json"), &run)
}

fn csr_settings(
    opts: &CsrOptions,
    cfg: &ConfigFile,
    window: &Window,
    seed: u64,
) -> Result<CsrSettings> {
    Ok(CsrSettings {
        n_sim: cfg.pick_or(opts.n_sim, "n-sim", 4999)?,
        r_max: cfg.pick_or(opts.r_max, "r-max", (window.shorter_side() / 2.0).min(5.0))?,
        r_steps: cfg.pick_or(opts.r_steps, "r-steps", DEFAULT_R_STEPS)?,
        alpha: cfg.pick_or(opts.alpha, "alpha", 0.05)?,
        seed,
    })
}

fn run_csr_test(seq: &PointSequence, s: &CsrSettings) -> Result<GlobalEnvelopeResult> {
    let grid = r_grid(s.r_max, s.r_steps)?;
    erl_global_test(seq.points(), seq.window(), s.n_sim, &grid, s.alpha, s.seed)
}

fn csr_csv(res: &GlobalEnvelopeResult) -> String {
    let mut out = String::from("r,value,lower,upper,central\n");
    for j in 0..res.data_curve.r_grid.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            res.data_curve.r_grid[j],
            res.data_curve.values[j],
            res.lower[j],
            res.upper[j],
            res.central[j]
        ));
    }
    out
}

fn write_csr(dir: &Path, res: &GlobalEnvelopeResult) -> Result<Vec<String>> {
    write_json(dir.join("csr.json"), res)?;
    write_string(dir.join("csr.csv"), &csr_csv(res))?;
    write_string(dir.join("csr.svg"), &svg::csr_svg(res))?;
    Ok(vec!["csr.json".into(), "csr.csv".into(), "csr.svg".into()])
}

fn run_csr(a: &CsrArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let mut run = RunConfig::new("csr-test", seed);
    let loaded = load_input(&a.input, &cfg, OrderRule::Given, &mut run)?;
    let settings = csr_settings(&a.csr, &cfg, loaded.seq.window(), seed)?;
    run.csr = Some(settings);
    let res = run_csr_test(&loaded.seq, &settings)?;
    prepare_out(&a.common.out)?;
    write_csr(&a.common.out, &res)?;
    write_json(a.common.out.join("run_config.json"), &run)
}

/// Machine-readable summary of a `report` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub input: Option<String>,
    pub window: String,
    pub n_points: usize,
    pub seed: u64,
    pub seeds: BTreeMap<String, u64>,
    pub cell_size: f64,
    pub theta_hat: f64,
    pub r_hat: f64,
    pub grid_theta_hat: f64,
    pub grid_r_hat: f64,
    pub max_loglik: f64,
    pub theta_ci: Option<(f64, f64)>,
    pub r_ci: Option<(f64, f64)>,
    pub p_csr: f64,
    pub csr_rejects: bool,
    pub envelope_outside: BTreeMap<String, usize>,
    pub pi_of_r: Option<PiOfR>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    pub config: RunConfig,
}

fn run_report(a: &ReportArgs) -> Result<()> {
    let cfg = ConfigFile::load(a.common.config.as_deref())?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let mut run = RunConfig::new("report", seed);
    let loaded = load_input(&a.input, &cfg, OrderRule::DescendingMark, &mut run)?;
    let seq = &loaded.seq;
    let out = &a.common.out;
    prepare_out(out)?;

    let mut seeds = BTreeMap::new();
    let csr_seed = derive_seed(seed, "csr");
    let envelope_seed = derive_seed(seed, "envelope");
    seeds.insert("csr".to_string(), csr_seed);
    seeds.insert("bootstrap".to_string(), derive_seed(seed, "bootstrap"));
    seeds.insert("envelope".to_string(), envelope_seed);

    let csr = csr_settings(&a.csr, &cfg, seq.window(), csr_seed)?;
    let fit_cfg = fit_config(&a.fit, &cfg, seed, run.cell_size)?;
    let (env_cfg, kinds) = envelope_settings(&a.envelope, &cfg, envelope_seed, run.cell_size)?;
    run.csr = Some(csr);
    run.fit = Some(fit_cfg.clone());
    run.envelope = Some(env_cfg);
    run.statistics = Some(kinds.clone());

    let mut files = vec!["sequence.csv".to_string(), "pattern.svg".to_string()];
    write_string(out.join("sequence.csv"), &sequence_csv(seq))?;
    write_string(
        out.join("pattern.svg"),
        &svg::pattern_svg(seq, "Ordered pattern"),
    )?;

    let csr_result = run_csr_test(seq, &csr)?;
    files.extend(write_csr(out, &csr_result)?);

    let (f, boot) = fit_and_bootstrap(seq, &fit_cfg)?;
    files.extend(write_fit_outputs(out, &f, boot.as_ref(), true)?);

    let params = ModelParams::new(f.theta_hat, f.r_hat, *seq.window())?;
    let bands = envelopes(seq, &params, &kinds, &env_cfg)?;
    files.extend(write_envelopes(out, &bands)?);

    let pi = match loaded.max_dbh {
        Some(m) => {
            let p = pi_of_r_report(&params, m)?;
            write_json(out.join("pi_of_r.json"), &p)?;
            files.push("pi_of_r.json".into());
            Some(p)
        }
        None => None,
    };

    files.push("manifest.json".into());
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").into(),
        input: run.input.clone(),
        window: seq.window().to_string(),
        n_points: seq.len(),
        seed,
        seeds,
        cell_size: f.diagnostics.cell_size,
        theta_hat: f.theta_hat,
        r_hat: f.r_hat,
        grid_theta_hat: f.diagnostics.grid_theta_hat,
        grid_r_hat: f.diagnostics.grid_r_hat,
        max_loglik: f.max_loglik,
        theta_ci: f.theta_ci,
        r_ci: f.r_ci,
        p_csr: csr_result.p_value,
        csr_rejects: csr_result.rejects(),
        envelope_outside: bands
            .iter()
            .map(|b| (b.kind.name().to_string(), b.n_outside))
            .collect(),
        pi_of_r: pi,
        warnings: f.warnings.clone(),
        files,
        config: run,
    };
    write_json(out.join("manifest.json"), &manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing_and_precedence() {
        let cfg = ConfigFile::parse(
            "# comment\nseed = 7\nr_upper = 3.5 # trailing\ntheta-grid = \"0.1,0.9,0.1\"\n",
        )
        .unwrap();
        assert_eq!(cfg.pick_or::<u64>(None, "seed", 0).unwrap(), 7);
        assert_eq!(cfg.pick_or(Some(9u64), "seed", 0).unwrap(), 9);
        assert_eq!(cfg.pick_or::<f64>(None, "r-upper", 5.0).unwrap(), 3.5);
        assert_eq!(cfg.pick_or::<f64>(None, "r-lower", 0.2).unwrap(), 0.2);
        assert_eq!(
            cfg.pick_str(&None, "theta-grid").as_deref(),
            Some("0.1,0.9,0.1")
        );
        assert!(ConfigFile::parse("nonsense").is_err());
        let bad = ConfigFile::parse("seed = x").unwrap();
        assert!(bad.pick::<u64>(None, "seed").is_err());
    }

    #[test]
    fn point_list_parsing() {
        let p = parse_points("0.90,0.50;0.60,0.92").unwrap();
        assert_eq!(p, vec![Point::new(0.9, 0.5), Point::new(0.6, 0.92)]);
        assert!(parse_points("0.9;0.5").is_err());
        assert!(parse_points("").unwrap().is_empty());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(
            parse_grid("0.025,0.975,0.05").unwrap(),
            GridSpec::new(0.025, 0.975, 0.05)
        );
        assert!(parse_grid("0.1,0.2").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
