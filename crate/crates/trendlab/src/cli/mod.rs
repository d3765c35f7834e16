//! Command-line driver. Every subcommand resolves its configuration from
//! defaults, an optional preset, an optional `--config` file and the flags
//! (flags win), echoes the result to the output directory and runs one stage.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{fill_defaults, RunConfig, Settings};
use crate::error::{Error, Result};
use crate::{io, preset};

#[derive(Debug, Parser)]
#[command(
    name = "trendlab",
    version,
    about = "Trend persistence and reversion across horizons"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load prices and write normalized returns.
    Ingest(Flags),
    /// Build the trend-strength panel.
    Trend(Flags),
    /// Mean next-interval return by trend-strength bucket.
    Buckets(BucketFlags),
    /// Pooled regression with bootstrap errors and cross-validation.
    Regress(RegressFlags),
    /// Per-horizon fits, rescaled and joined into one coefficient curve.
    Scan(CurveFlags),
    /// Synthetic markets, or an end-to-end recovery check with --recover.
    Simulate(SimulateFlags),
    /// Rescale and join saved per-horizon fits into curve tables.
    Report(ReportFlags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// INI run configuration; flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Price CSV (`timestamp,asset,price`); repeatable, optionally `frequency:path`.
    #[arg(long, value_name = "PATH")]
    input: Vec<String>,
    #[arg(long, value_parser = ["minute", "daily", "monthly", "yearly"])]
    frequency: Option<String>,
    /// Grid exponents, e.g. `1..10`.
    #[arg(long, value_name = "k1..k2")]
    horizons: Option<String>,
    #[arg(long, value_parser = ["day-by-day", "continuous"])]
    mode: Option<String>,
    /// Extra intervals between trend measurement and response.
    #[arg(long, value_name = "N")]
    lag: Option<usize>,
    #[arg(long, value_parser = ["linear", "cubic", "quintic", "general"])]
    model: Option<String>,
    /// Comma-separated features, e.g. `phi,phi3,sign_phi`; overrides --model.
    #[arg(long, value_name = "LIST")]
    features: Option<String>,
    /// Bootstrap replicates; 0 disables.
    #[arg(long, value_name = "N")]
    bootstrap: Option<usize>,
    /// Cross-validation folds; 0 disables.
    #[arg(long, value_name = "N")]
    folds: Option<usize>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Fit only rows of the `[subgroup.NAME]` configuration section.
    #[arg(long, value_name = "NAME")]
    subgroup: Option<String>,
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the main result as JSON and write JSON tables.
    #[arg(long)]
    json: bool,
    /// Trend panel CSV written by `trend`, instead of --input.
    #[arg(long, value_name = "PATH")]
    panel: Option<PathBuf>,
    /// Regress on the equally weighted mean of all horizons.
    #[arg(long)]
    aggregate: bool,
    #[arg(long, value_parser = ["full_sample", "ewma"])]
    vol_mode: Option<String>,
    /// EWMA volatility half-life in intervals.
    #[arg(long, value_name = "N")]
    half_life: Option<f64>,
    /// Session file with `asset=HH:MM-HH:MM` lines.
    #[arg(long, value_name = "FILE")]
    sessions: Option<PathBuf>,
    #[arg(long, value_parser = ["rows", "equal_asset"])]
    weighting: Option<String>,
    /// Any configuration key, e.g. `--set trend.clip_phi=3`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct BucketFlags {
    #[command(flatten)]
    flags: Flags,
    #[arg(long, value_parser = ["3", "5"])]
    per_unit: Option<String>,
    #[arg(long, value_name = "K")]
    k_max: Option<i32>,
    /// Panel column label, e.g. `phi_k3`; default is every column.
    #[arg(long, value_name = "LABEL")]
    column: Option<String>,
}

#[derive(Debug, Args)]
struct RegressFlags {
    #[command(flatten)]
    flags: Flags,
    /// Write every bootstrap replicate to bootstrap.csv.
    #[arg(long)]
    export_bootstrap: bool,
    /// Cross-validation re-estimating normalization per fold (`series`) or on
    /// the fixed panel (`panel`).
    #[arg(long, value_parser = ["series", "panel"])]
    cv: Option<String>,
}

#[derive(Debug, Args)]
struct CurveFlags {
    #[command(flatten)]
    flags: Flags,
    /// Keep raw coefficients instead of rescaling by sqrt(T / 60 minutes).
    #[arg(long)]
    no_rescale: bool,
    /// Also write a gnuplot data file.
    #[arg(long)]
    gnuplot: bool,
    /// Drop a feature from a grid exponent on, e.g. `phi5@7`; repeatable.
    #[arg(long, value_name = "FEATURE@K")]
    drop: Vec<String>,
}

#[derive(Debug, Args)]
struct SimulateFlags {
    #[command(flatten)]
    flags: Flags,
    /// Fit the simulated markets and judge the estimates against the truth.
    #[arg(long)]
    recover: bool,
    #[arg(long, value_name = "N")]
    n_assets: Option<usize>,
    #[arg(long, value_name = "N")]
    n_intervals: Option<usize>,
    #[arg(long, value_name = "SIZE")]
    tick_size: Option<f64>,
    /// Grid exponents of the horizons driving the drift.
    #[arg(long, value_name = "k1..k2")]
    drivers: Option<String>,
}

#[derive(Debug, Args)]
struct ReportFlags {
    #[command(flatten)]
    curve: CurveFlags,
    /// Fit JSON files or directories of them, as written by `scan`.
    #[arg(long, value_name = "PATH")]
    fits: Vec<PathBuf>,
    /// Bucket JSON files to include in the bundle.
    #[arg(long, value_name = "PATH")]
    buckets: Vec<PathBuf>,
}

impl Flags {
    fn to_settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        let mut put = |section: &str, key: &str, v: Option<String>| {
            if let Some(v) = v {
                s.set(section, key, v);
            }
        };
        put(
            "data",
            "input",
            (!self.input.is_empty()).then(|| self.input.join(",")),
        );
        put("data", "frequency", self.frequency.clone());
        put("data", "vol_mode", self.vol_mode.clone());
        put(
            "data",
            "ewma_half_life",
            self.half_life.map(|h| h.to_string()),
        );
        put(
            "data",
            "sessions",
            self.sessions.as_ref().map(|p| p.display().to_string()),
        );
        put("trend", "horizons", self.horizons.clone());
        put("trend", "mode", self.mode.clone());
        put("trend", "lag", self.lag.map(|l| l.to_string()));
        put("trend", "aggregate", self.aggregate.then(|| "true".into()));
        put("model", "model", self.model.clone());
        put("model", "features", self.features.clone());
        put("model", "weighting", self.weighting.clone());
        put("fit", "bootstrap", self.bootstrap.map(|n| n.to_string()));
        put("fit", "folds", self.folds.map(|n| n.to_string()));
        put("fit", "subgroup", self.subgroup.clone());
        put("run", "seed", self.seed.map(|n| n.to_string()));
        put(
            "run",
            "out",
            self.out.as_ref().map(|p| p.display().to_string()),
        );
        put("run", "json", self.json.then(|| "true".into()));
        put(
            "panel",
            "path",
            self.panel.as_ref().map(|p| p.display().to_string()),
        );
        if self.model.is_some() && self.features.is_none() {
            // An explicit model replaces a feature list from lower layers.
            s.set("model", "features", "");
        }
        for item in &self.set {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set `{item}` is not SECTION.KEY=VALUE")))?;
            let (section, key) = key
                .rsplit_once('.')
                .ok_or_else(|| Error::Config(format!("--set `{item}` is not SECTION.KEY=VALUE")))?;
            s.set(section, key, value);
        }
        Ok(s)
    }
}

/// Settings from preset, config file and flags, not yet defaulted.
fn layered(command: &str, flags: &Flags, extra: Settings) -> Result<Settings> {
    let file = match &flags.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let mut flag_layer = flags.to_settings()?;
    flag_layer.overlay(&extra);
    let preset_name = flags.preset.clone().or_else(|| {
        file.get("run", "preset")
            .filter(|p| !p.is_empty())
            .map(String::from)
    });
    let mut s = match &preset_name {
        Some(name) => preset::settings(name)?,
        None => Settings::default(),
    };
    s.overlay(&file);
    s.overlay(&flag_layer);
    s.set("run", "command", command);
    if let Some(panel) = s.get("panel", "path").filter(|p| !p.is_empty()) {
        if s.get("data", "frequency").is_none() {
            let meta = io::read_panel_meta(Path::new(panel))?;
            s.set("data", "frequency", meta.frequency.as_str());
        }
    }
    Ok(s)
}

/// Fills defaults, parses, and echoes the resolved settings.
fn resolve(mut s: Settings, echo_name: &str) -> Result<RunConfig> {
    fill_defaults(&mut s)?;
    let cfg = RunConfig::from_settings(&s)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let path = cfg.out.join(echo_name);
    std::fs::write(&path, s.to_ini_string()).map_err(|e| Error::io(&path, e))?;
    Ok(cfg)
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("TRENDLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::Config(format!(
                "TRENDLAB_THREADS=`{value}` is not a positive integer"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))
}

/// Parses `args` and runs the command. Usage errors exit with 2, stage
/// failures with 1.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    init_logging(cli.verbose);
    match init_threads().and_then(|_| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(f) => commands::ingest(&resolve(
            layered("ingest", &f, Settings::default())?,
            "resolved.ini",
        )?),
        Command::Trend(f) => commands::trend(&resolve(
            layered("trend", &f, Settings::default())?,
            "resolved.ini",
        )?),
        Command::Buckets(b) => {
            let mut extra = Settings::default();
            if let Some(p) = &b.per_unit {
                extra.set("buckets", "per_unit", p.clone());
            }
            if let Some(k) = b.k_max {
                extra.set("buckets", "k_max", k.to_string());
            }
            if let Some(c) = &b.column {
                extra.set("buckets", "column", c.clone());
            }
            commands::buckets(&resolve(
                layered("buckets", &b.flags, extra)?,
                "resolved.ini",
            )?)
        }
        Command::Regress(r) => {
            let mut extra = Settings::default();
            if r.export_bootstrap {
                extra.set("fit", "export_bootstrap", "true");
            }
            if let Some(cv) = &r.cv {
                extra.set("fit", "cv", cv.clone());
            }
            commands::regress(&resolve(
                layered("regress", &r.flags, extra)?,
                "resolved.ini",
            )?)
        }
        Command::Scan(c) => {
            let s = layered("scan", &c.flags, curve_settings(&c))?;
            commands::scan(s)
        }
        Command::Simulate(m) => {
            let mut extra = Settings::default();
            if m.recover {
                extra.set("simulate", "recover", "true");
            }
            if let Some(n) = m.n_assets {
                extra.set("simulate", "n_assets", n.to_string());
            }
            if let Some(n) = m.n_intervals {
                extra.set("simulate", "n_intervals", n.to_string());
            }
            if let Some(t) = m.tick_size {
                extra.set("simulate", "tick_size", t.to_string());
            }
            if let Some(d) = &m.drivers {
                extra.set("simulate", "drivers", d.clone());
            }
            commands::simulate(&resolve(
                layered("simulate", &m.flags, extra)?,
                "resolved.ini",
            )?)
        }
        Command::Report(r) => {
            let mut extra = curve_settings(&r.curve);
            let list = |paths: &[PathBuf]| {
                paths
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            if !r.fits.is_empty() {
                extra.set("report", "fits", list(&r.fits));
            }
            if !r.buckets.is_empty() {
                extra.set("report", "buckets", list(&r.buckets));
            }
            commands::report(&resolve(
                layered("report", &r.curve.flags, extra)?,
                "resolved.ini",
            )?)
        }
    }
}

fn curve_settings(c: &CurveFlags) -> Settings {
    let mut s = Settings::default();
    if c.no_rescale {
        s.set("report", "rescale", "false");
    }
    if c.gnuplot {
        s.set("report", "gnuplot", "true");
    }
    if !c.drop.is_empty() {
        s.set("model", "drop", c.drop.join(","));
    }
    s
}
