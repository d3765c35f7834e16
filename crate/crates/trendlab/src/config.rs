//! Run configuration: INI files with sections, layered as
//! defaults < preset < `--config` file < command-line flags.
//!
//! Layers are merged as plain `section.key = value` text; the merged text is
//! echoed to the output directory after defaults are filled in, so it alone
//! reproduces the run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::Ini;
use trendlab_core::panel::{PanelMode, MAX_DAY_BY_DAY_HORIZON};
use trendlab_core::regress::{
    Feature, Model, ModelSpec, SpecTemplate, Subgroup, Weighting, DEFAULT_BOOTSTRAP_SAMPLES,
    DEFAULT_BOOTSTRAP_SAMPLES_COARSE, DEFAULT_FOLDS_DAILY, DEFAULT_FOLDS_INTRADAY,
};
use trendlab_core::series::{Session, DEFAULT_CLIP_SIGMA};
use trendlab_core::simulate::{Noise, SimConfig};
use trendlab_core::trend::{
    default_k_range, horizon_grid, DEFAULT_CLIP_PHI, DEFAULT_WARMUP_MULTIPLIER,
};
use trendlab_core::{Frequency, ReturnsConfig, TrendConfig, VolMode};

use crate::error::{Error, Result};

/// Keys accepted in each fixed section. `subgroup.<name>` and `sessions`
/// sections take free-form keys.
const KNOWN: &[(&str, &[&str])] = &[
    ("run", &["command", "seed", "out", "json", "preset"]),
    (
        "data",
        &[
            "input",
            "frequency",
            "vol_mode",
            "ewma_half_life",
            "clip_sigma",
            "min_sigma",
            "sessions",
            "session",
        ],
    ),
    ("panel", &["path"]),
    (
        "trend",
        &[
            "horizons",
            "mode",
            "lag",
            "clip_phi",
            "warmup_multiplier",
            "aggregate",
        ],
    ),
    ("model", &["model", "features", "drop", "weighting"]),
    (
        "fit",
        &[
            "bootstrap",
            "folds",
            "subgroup",
            "significance",
            "cv",
            "export_bootstrap",
        ],
    ),
    ("buckets", &["per_unit", "k_max", "column"]),
    ("report", &["rescale", "gnuplot", "fits", "buckets"]),
    (
        "simulate",
        &[
            "a",
            "b",
            "c",
            "d",
            "e",
            "drivers",
            "per_horizon",
            "n_assets",
            "n_intervals",
            "prepend_warmup",
            "burn_in",
            "noise_sigma",
            "noise",
            "tick_size",
            "initial_price",
            "return_vol",
            "drift_clip",
            "start_timestamp",
            "recover",
            "check",
            "min_t",
            "tolerance",
        ],
    ),
];

/// Merged `section -> key -> value` text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut out = Settings::default();
        for (section, props) in &ini {
            for (key, value) in props.iter() {
                let section = section
                    .ok_or_else(|| Error::Config(format!("key `{key}` outside any [section]")))?;
                out.set(section, key, value);
            }
        }
        out.check_keys()?;
        Ok(out)
    }

    fn check_keys(&self) -> Result<()> {
        for (section, keys) in &self.sections {
            if section == "sessions" || section.starts_with("subgroup.") {
                continue;
            }
            let known = KNOWN
                .iter()
                .find(|(s, _)| s == section)
                .ok_or_else(|| Error::Config(format!("unknown section [{section}]")))?
                .1;
            if let Some(k) = keys.keys().find(|k| !known.contains(&k.as_str())) {
                return Err(Error::Config(format!("unknown key `{k}` in [{section}]")));
            }
        }
        Ok(())
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.into().trim().to_string());
    }

    pub fn set_default(&mut self, section: &str, key: &str, value: impl Into<String>) {
        if self.get(section, key).is_none() {
            self.set(section, key, value);
        }
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    pub fn section(&self, section: &str) -> Option<&BTreeMap<String, String>> {
        self.sections.get(section)
    }

    /// Entries of `other` replace ours.
    pub fn overlay(&mut self, other: &Settings) {
        for (section, keys) in &other.sections {
            for (k, v) in keys {
                self.set(section, k, v.clone());
            }
        }
    }

    pub fn to_ini_string(&self) -> String {
        let mut ini = Ini::new();
        for (section, keys) in &self.sections {
            for (k, v) in keys {
                ini.with_section(Some(section.as_str()))
                    .set(k.as_str(), v.as_str());
            }
        }
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini output is UTF-8")
    }

    fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(section, key)
            .filter(|v| !v.is_empty())
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("[{section}] {key} = `{v}`: {e}")))
            })
            .transpose()
    }

    fn required<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(section, key)?
            .ok_or_else(|| Error::Config(format!("[{section}] {key} is not set")))
    }

    fn flag(&self, section: &str, key: &str) -> Result<bool> {
        match self
            .get(section, key)
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            None | Some("") | Some("false") | Some("no") | Some("0") => Ok(false),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some(other) => Err(Error::Config(format!(
                "[{section}] {key} = `{other}` is not a boolean"
            ))),
        }
    }

    fn list(&self, section: &str, key: &str) -> Vec<String> {
        self.get(section, key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// `k1..k2`, `1..10` or a single `k`.
pub fn parse_k_range(s: &str) -> Result<(i32, i32)> {
    let bad = || Error::Config(format!("horizon range `{s}` is not of the form k1..k2"));
    let num = |t: &str| {
        t.trim()
            .trim_start_matches('k')
            .parse::<i32>()
            .map_err(|_| bad())
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('=').trim())?),
        None => {
            let k = num(s)?;
            (k, k)
        }
    };
    if lo > hi || lo < 1 {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// `HH:MM-HH:MM`.
pub fn parse_session(s: &str) -> Result<Session> {
    let bad = || Error::Config(format!("session `{s}` is not of the form HH:MM-HH:MM"));
    let clock = |t: &str| -> Result<u32> {
        let (h, m) = t.trim().split_once(':').ok_or_else(bad)?;
        let (h, m): (u32, u32) = (h.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?);
        if m >= 60 || h > 24 || (h == 24 && m > 0) {
            return Err(bad());
        }
        Ok(h * 60 + m)
    };
    let (open, close) = s.split_once('-').ok_or_else(bad)?;
    Ok(Session::new(clock(open)?, clock(close)?)?)
}

fn format_session(s: Session) -> String {
    format!(
        "{:02}:{:02}-{:02}:{:02}",
        s.open / 60,
        s.open % 60,
        s.close / 60,
        s.close % 60
    )
}

/// Trading sessions per asset, with a fallback for unlisted assets.
#[derive(Debug, Clone, PartialEq)]
pub struct Sessions {
    pub default: Session,
    pub per_asset: BTreeMap<String, Session>,
}

impl Sessions {
    pub fn for_asset(&self, asset: &str) -> Session {
        self.per_asset.get(asset).copied().unwrap_or(self.default)
    }

    /// Plain `asset=HH:MM-HH:MM` lines; `default=` sets the fallback.
    pub fn parse(text: &str, fallback: Session) -> Result<Self> {
        let mut out = Sessions {
            default: fallback,
            per_asset: BTreeMap::new(),
        };
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty()
                || line.starts_with('#')
                || line.starts_with(';')
                || line.starts_with('[')
            {
                continue;
            }
            let (asset, window) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "sessions line {}: expected asset=HH:MM-HH:MM",
                    n + 1
                ))
            })?;
            let session = parse_session(window)?;
            match asset.trim() {
                "default" => out.default = session,
                a => {
                    out.per_asset.insert(a.to_string(), session);
                }
            }
        }
        Ok(out)
    }
}

/// One input file, optionally tagged `frequency:path`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub path: PathBuf,
    pub frequency: Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub inputs: Vec<InputSpec>,
    pub frequency: Frequency,
    pub returns: ReturnsConfig,
    pub sessions: Sessions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendSettings {
    pub k_range: (i32, i32),
    pub config: TrendConfig,
    pub mode: PanelMode,
    pub aggregate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub template: SpecTemplate,
    pub weighting: Weighting,
    /// 0 disables the bootstrap.
    pub bootstrap: usize,
    pub folds: Option<usize>,
    pub subgroup: Option<Subgroup>,
    /// `|t|` at or above which a coefficient is flagged significant.
    pub significance: f64,
    /// Re-estimate normalization and trend strengths per fold when raw
    /// prices are available.
    pub series_cv: bool,
    pub export_bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketSettings {
    pub per_unit: u32,
    pub k_max: i32,
    /// Column label such as `phi_k3` or `phi_agg`; `None` buckets every column.
    pub column: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportSettings {
    pub rescale: bool,
    pub gnuplot: bool,
    pub fits: Vec<PathBuf>,
    pub buckets: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    /// Coefficients and sizes; `horizons` holds the driving horizons.
    pub config: SimConfig,
    pub drivers: (i32, i32),
    /// One independent set of markets per driving horizon instead of one
    /// market driven by all of them.
    pub per_horizon: bool,
    /// Simulate the longest panel warmup on top of `n_intervals`.
    pub prepend_warmup: bool,
    pub recover: bool,
    /// Coefficients whose recovery is judged; `min_t` ones must also be
    /// significant.
    pub check: Vec<String>,
    pub min_t: Vec<String>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub preset: Option<String>,
    pub seed: u64,
    pub out: PathBuf,
    pub json: bool,
    pub data: DataConfig,
    pub panel: Option<PathBuf>,
    pub trend: TrendSettings,
    pub fit: FitSettings,
    pub buckets: BucketSettings,
    pub report: ReportSettings,
    pub simulate: SimSettings,
}

/// Fills frequency-dependent defaults into `s`.
pub fn fill_defaults(s: &mut Settings) -> Result<()> {
    s.set_default("run", "seed", "0");
    s.set_default("run", "out", "out");
    s.set_default("run", "json", "false");
    s.set_default("data", "frequency", "daily");
    let frequency: Frequency = s.required("data", "frequency")?;
    let (lo, hi) = default_k_range(frequency);
    s.set_default("trend", "horizons", format!("{lo}..{hi}"));
    let (_, k_hi) = parse_k_range(s.get("trend", "horizons").unwrap_or_default())?;
    let longest = horizon_grid(frequency, k_hi, k_hi)[0].intervals;
    let mode = if frequency == Frequency::Minute && longest <= MAX_DAY_BY_DAY_HORIZON {
        PanelMode::DayByDay
    } else {
        PanelMode::Continuous
    };
    s.set_default("trend", "mode", mode.as_str());
    s.set_default("trend", "lag", "0");
    s.set_default("trend", "clip_phi", DEFAULT_CLIP_PHI.to_string());
    s.set_default(
        "trend",
        "warmup_multiplier",
        DEFAULT_WARMUP_MULTIPLIER.to_string(),
    );
    s.set_default("trend", "aggregate", "false");

    match frequency {
        // A 30-year half-life, in months and in years.
        Frequency::Monthly => {
            s.set_default("data", "vol_mode", "ewma");
            s.set_default("data", "ewma_half_life", "360");
        }
        Frequency::Yearly => {
            s.set_default("data", "vol_mode", "ewma");
            s.set_default("data", "ewma_half_life", "30");
        }
        _ => s.set_default("data", "vol_mode", "full_sample"),
    }
    s.set_default("data", "clip_sigma", DEFAULT_CLIP_SIGMA.to_string());
    s.set_default("data", "session", "00:00-24:00");

    if s.get("model", "features").is_none() {
        s.set_default("model", "model", "cubic");
    }
    s.set_default("model", "weighting", "rows");
    let coarse = matches!(frequency, Frequency::Monthly | Frequency::Yearly);
    let samples = if coarse {
        DEFAULT_BOOTSTRAP_SAMPLES_COARSE
    } else {
        DEFAULT_BOOTSTRAP_SAMPLES
    };
    s.set_default("fit", "bootstrap", samples.to_string());
    let folds = if frequency == Frequency::Minute {
        DEFAULT_FOLDS_INTRADAY
    } else {
        DEFAULT_FOLDS_DAILY
    };
    s.set_default("fit", "folds", folds.to_string());
    s.set_default(
        "fit",
        "significance",
        if frequency == Frequency::Monthly {
            "3"
        } else {
            "2"
        },
    );
    s.set_default("fit", "cv", "series");
    s.set_default("fit", "export_bootstrap", "false");

    s.set_default(
        "buckets",
        "per_unit",
        if frequency == Frequency::Monthly {
            "5"
        } else {
            "3"
        },
    );
    s.set_default("buckets", "k_max", "7");

    s.set_default("report", "rescale", "true");
    s.set_default("report", "gnuplot", "false");

    let sim = SimConfig::default();
    for (k, v) in [
        ("a", sim.a),
        ("b", sim.b),
        ("c", sim.c),
        ("d", sim.d),
        ("e", sim.e),
    ] {
        s.set_default("simulate", k, v.to_string());
    }
    s.set_default("simulate", "drivers", format!("{lo}..{hi}"));
    s.set_default("simulate", "per_horizon", "false");
    s.set_default("simulate", "n_assets", "8");
    s.set_default("simulate", "n_intervals", "2500");
    s.set_default("simulate", "prepend_warmup", "false");
    s.set_default("simulate", "burn_in", sim.burn_in.to_string());
    s.set_default("simulate", "noise_sigma", sim.noise_sigma.to_string());
    s.set_default("simulate", "noise", "gaussian");
    s.set_default("simulate", "tick_size", sim.tick_size.to_string());
    s.set_default("simulate", "initial_price", sim.initial_price.to_string());
    s.set_default("simulate", "return_vol", sim.return_vol.to_string());
    s.set_default("simulate", "drift_clip", DEFAULT_CLIP_PHI.to_string());
    s.set_default(
        "simulate",
        "start_timestamp",
        sim.start_timestamp.to_string(),
    );
    s.set_default("simulate", "recover", "false");
    s.set_default("simulate", "check", "b,c");
    s.set_default("simulate", "min_t", "");
    s.set_default("simulate", "tolerance", "2");
    Ok(())
}

fn parse_noise(s: &str) -> Result<Noise> {
    match s.split_once(':') {
        None if s == "gaussian" => Ok(Noise::Gaussian),
        Some(("student_t", dof)) => Ok(Noise::StudentT {
            dof: dof
                .parse()
                .map_err(|_| Error::Config(format!("bad student_t dof `{dof}`")))?,
        }),
        _ => Err(Error::Config(format!(
            "noise `{s}` is neither gaussian nor student_t:DOF"
        ))),
    }
}

/// `phi5@7` drops `phi5` from grid exponent 7 on.
fn parse_drops(items: &[String]) -> Result<Vec<(Feature, i32)>> {
    items
        .iter()
        .map(|item| {
            let (f, k) = item.split_once('@').ok_or_else(|| {
                Error::Config(format!("drop `{item}` is not of the form feature@k"))
            })?;
            let k = k
                .trim()
                .trim_start_matches('k')
                .parse()
                .map_err(|_| Error::Config(format!("bad grid exponent in `{item}`")))?;
            Ok((f.parse()?, k))
        })
        .collect()
}

fn parse_input(item: &str, default: Frequency) -> Result<InputSpec> {
    if let Some((tag, path)) = item.split_once(':') {
        if let Ok(frequency) = tag.parse::<Frequency>() {
            return Ok(InputSpec {
                path: path.into(),
                frequency,
            });
        }
    }
    Ok(InputSpec {
        path: item.into(),
        frequency: default,
    })
}

impl RunConfig {
    /// Typed view of fully defaulted settings (see [`fill_defaults`]).
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let frequency: Frequency = s.required("data", "frequency")?;
        let vol_mode = match s.get("data", "vol_mode").unwrap_or("full_sample") {
            "full_sample" => VolMode::FullSample,
            "ewma" => VolMode::Ewma {
                half_life: s.required("data", "ewma_half_life")?,
            },
            other => return Err(Error::Config(format!("unknown vol_mode `{other}`"))),
        };
        let returns = ReturnsConfig {
            vol_mode,
            clip_sigma: s.required("data", "clip_sigma")?,
            min_sigma: s.parsed("data", "min_sigma")?,
        };
        returns.validate()?;
        let mut sessions = Sessions {
            default: parse_session(s.get("data", "session").unwrap_or("00:00-24:00"))?,
            per_asset: BTreeMap::new(),
        };
        if let Some(path) = s.get("data", "sessions").filter(|p| !p.is_empty()) {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            sessions = Sessions::parse(&text, sessions.default)?;
        }
        if let Some(extra) = s.section("sessions") {
            for (asset, window) in extra {
                let session = parse_session(window)?;
                if asset == "default" {
                    sessions.default = session;
                } else {
                    sessions.per_asset.insert(asset.clone(), session);
                }
            }
        }
        let inputs = s
            .list("data", "input")
            .iter()
            .map(|i| parse_input(i, frequency))
            .collect::<Result<Vec<_>>>()?;

        let k_range = parse_k_range(s.get("trend", "horizons").unwrap_or("1..10"))?;
        let mut trend_config = TrendConfig::new(horizon_grid(frequency, k_range.0, k_range.1));
        trend_config.clip_phi = s.required("trend", "clip_phi")?;
        trend_config.warmup_multiplier = s.required("trend", "warmup_multiplier")?;
        trend_config.lag = s.required("trend", "lag")?;
        trend_config.validate()?;
        let trend = TrendSettings {
            k_range,
            config: trend_config,
            mode: s.required("trend", "mode")?,
            aggregate: s.flag("trend", "aggregate")?,
        };

        let base = match s.get("model", "features").filter(|f| !f.is_empty()) {
            Some(list) => ModelSpec::parse_list(list)?,
            None => ModelSpec::model(s.required::<Model>("model", "model")?),
        };
        let subgroup = match s.get("fit", "subgroup").filter(|g| !g.is_empty()) {
            None => None,
            Some(name) => {
                let section = format!("subgroup.{name}");
                let def = s.section(&section).ok_or_else(|| {
                    Error::Config(format!("subgroup `{name}` needs a [{section}] section"))
                })?;
                let assets = def.get("assets").map(|a| {
                    a.split(',')
                        .map(str::trim)
                        .filter(|x| !x.is_empty())
                        .map(String::from)
                        .collect()
                });
                let window = def.get("window").map(|w| parse_session(w)).transpose()?;
                Some(Subgroup {
                    name: name.to_string(),
                    assets,
                    window,
                })
            }
        };
        let folds: usize = s.required("fit", "folds")?;
        let fit = FitSettings {
            template: SpecTemplate {
                base,
                drop_from_k: parse_drops(&s.list("model", "drop"))?,
            },
            weighting: match s.get("model", "weighting").unwrap_or("rows") {
                "rows" => Weighting::Rows,
                "equal_asset" => Weighting::EqualAsset,
                other => return Err(Error::Config(format!("unknown weighting `{other}`"))),
            },
            bootstrap: s.required("fit", "bootstrap")?,
            folds: (folds > 0).then_some(folds),
            subgroup,
            significance: s.required("fit", "significance")?,
            series_cv: match s.get("fit", "cv").unwrap_or("series") {
                "series" => true,
                "panel" => false,
                other => {
                    return Err(Error::Config(format!(
                        "cv must be series or panel, got `{other}`"
                    )))
                }
            },
            export_bootstrap: s.flag("fit", "export_bootstrap")?,
        };

        let buckets = BucketSettings {
            per_unit: s.required("buckets", "per_unit")?,
            k_max: s.required("buckets", "k_max")?,
            column: s
                .get("buckets", "column")
                .filter(|c| !c.is_empty())
                .map(String::from),
        };
        let report = ReportSettings {
            rescale: s.flag("report", "rescale")?,
            gnuplot: s.flag("report", "gnuplot")?,
            fits: s
                .list("report", "fits")
                .into_iter()
                .map(PathBuf::from)
                .collect(),
            buckets: s
                .list("report", "buckets")
                .into_iter()
                .map(PathBuf::from)
                .collect(),
        };

        let seed: u64 = s.required("run", "seed")?;
        let drivers = parse_k_range(s.get("simulate", "drivers").unwrap_or("1..1"))?;
        let drift_clip = match s.get("simulate", "drift_clip") {
            None | Some("") | Some("none") => None,
            Some(_) => Some(s.required("simulate", "drift_clip")?),
        };
        let sim_config = SimConfig {
            a: s.required("simulate", "a")?,
            b: s.required("simulate", "b")?,
            c: s.required("simulate", "c")?,
            d: s.required("simulate", "d")?,
            e: s.required("simulate", "e")?,
            horizons: horizon_grid(frequency, drivers.0, drivers.1)
                .iter()
                .map(|h| h.intervals)
                .collect(),
            n_assets: s.required("simulate", "n_assets")?,
            n_intervals: s.required("simulate", "n_intervals")?,
            burn_in: s.required("simulate", "burn_in")?,
            noise_sigma: s.required("simulate", "noise_sigma")?,
            noise: parse_noise(s.get("simulate", "noise").unwrap_or("gaussian"))?,
            tick_size: s.required("simulate", "tick_size")?,
            initial_price: s.required("simulate", "initial_price")?,
            return_vol: s.required("simulate", "return_vol")?,
            drift_clip,
            frequency,
            start_timestamp: s.required("simulate", "start_timestamp")?,
            seed,
        };
        let simulate = SimSettings {
            config: sim_config,
            drivers,
            per_horizon: s.flag("simulate", "per_horizon")?,
            prepend_warmup: s.flag("simulate", "prepend_warmup")?,
            recover: s.flag("simulate", "recover")?,
            check: s.list("simulate", "check"),
            min_t: s.list("simulate", "min_t"),
            tolerance: s.required("simulate", "tolerance")?,
        };

        Ok(RunConfig {
            command: s.get("run", "command").unwrap_or_default().to_string(),
            preset: s
                .get("run", "preset")
                .filter(|p| !p.is_empty())
                .map(String::from),
            seed,
            out: s.required::<PathBuf>("run", "out")?,
            json: s.flag("run", "json")?,
            data: DataConfig {
                inputs,
                frequency,
                returns,
                sessions,
            },
            panel: s
                .get("panel", "path")
                .filter(|p| !p.is_empty())
                .map(PathBuf::from),
            trend,
            fit,
            buckets,
            report,
            simulate,
        })
    }
}

/// Settings text for a session, as accepted back by [`parse_session`].
pub fn session_text(s: Session) -> String {
    format_session(s)
}
