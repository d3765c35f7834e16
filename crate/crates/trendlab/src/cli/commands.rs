use std::path::{Path, PathBuf};

use log::{info, warn};
use serde_json::{json, Value};
use trendlab_core::buckets::{bucket_curve, bucketize};
use trendlab_core::panel::aggregate_scales;
use trendlab_core::report::{assemble_curve, format_sig, DatasetFits, DatasetTag, HorizonCurve};
use trendlab_core::series::{LogReturns, Sigma};
use trendlab_core::{Frequency, Panel, PanelColumn};

use super::resolve;
use crate::config::{RunConfig, Settings};
use crate::error::{Error, Result};
use crate::io::{self, FitRecord};
use crate::pipeline;
use crate::recover::RecoveryPlan;

// Output lost to a closed pipe is not an error of the run.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn print_json(v: &Value) {
    outln!(
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values always serialize")
    );
}

/// The panel to work on, from `--panel` or built from the inputs, and the raw
/// returns behind it when they are available.
fn load_panel(cfg: &RunConfig) -> Result<(Panel, Option<Vec<LogReturns>>)> {
    match &cfg.panel {
        Some(path) => {
            let panel = io::read_panel(path)?;
            let has_aggregate = panel
                .columns()
                .iter()
                .any(|c| matches!(c, PanelColumn::Aggregate { .. }));
            let panel = if cfg.trend.aggregate && !has_aggregate {
                aggregate_scales(&panel)?
            } else {
                panel
            };
            info!(
                "{}: {} rows x {} columns",
                path.display(),
                panel.len(),
                panel.width()
            );
            Ok((panel, None))
        }
        None => {
            let series = pipeline::load_inputs(&cfg.data.inputs, cfg.data.frequency)?;
            let prepared = pipeline::prepare(&series, cfg)?;
            Ok((prepared.panel, Some(prepared.raw)))
        }
    }
}

pub fn ingest(cfg: &RunConfig) -> Result<()> {
    let series = pipeline::load_inputs(&cfg.data.inputs, cfg.data.frequency)?;
    let raw = pipeline::raw_returns(&series, cfg)?;
    let names: Vec<String> = raw.iter().map(|r| r.asset_id.clone()).collect();
    let (_, normalized) = pipeline::normalize_all(raw, cfg)?;
    let excluded: Vec<&String> = names
        .iter()
        .filter(|n| !normalized.iter().any(|r| &r.asset_id == *n))
        .collect();
    io::write_returns_csv(&cfg.out.join("returns.csv"), &normalized)?;
    let assets: Vec<Value> = normalized
        .iter()
        .map(|n| {
            let sigma = match &n.sigma {
                Sigma::Constant(s) => json!(s),
                Sigma::Ewma(v) => json!({ "first": v.first(), "last": v.last() }),
            };
            json!({
                "asset": n.asset_id,
                "n_returns": n.len(),
                "mu": n.mu,
                "sigma": sigma,
                "sessions": n.sessions.as_ref().map(Vec::len),
            })
        })
        .collect();
    let doc = json!({
        "frequency": cfg.data.frequency.as_str(),
        "returns": cfg.data.returns,
        "assets": assets,
        "excluded": excluded,
    });
    io::write_json(&cfg.out.join("returns.json"), &doc)?;
    if cfg.json {
        print_json(&doc);
    } else {
        for n in &normalized {
            outln!(
                "{:<12} {:>9} returns  mu {}",
                n.asset_id,
                n.len(),
                format_sig(n.mu)
            );
        }
        outln!("wrote {}", cfg.out.join("returns.csv").display());
    }
    Ok(())
}

pub fn trend(cfg: &RunConfig) -> Result<()> {
    let series = pipeline::load_inputs(&cfg.data.inputs, cfg.data.frequency)?;
    let prepared = pipeline::prepare(&series, cfg)?;
    let path = cfg.out.join("panel.csv");
    io::write_panel(&path, &prepared.panel)?;
    let summary = json!({
        "rows": prepared.panel.len(),
        "columns": prepared.panel.columns().iter().map(PanelColumn::label).collect::<Vec<_>>(),
        "assets": prepared.panel.assets(),
    });
    if cfg.json {
        print_json(&summary);
    } else {
        outln!(
            "{} rows x {} columns -> {}",
            prepared.panel.len(),
            prepared.panel.width(),
            path.display()
        );
    }
    Ok(())
}

pub fn buckets(cfg: &RunConfig) -> Result<()> {
    let (panel, _) = load_panel(cfg)?;
    let columns: Vec<usize> = match &cfg.buckets.column {
        Some(label) => vec![panel
            .columns()
            .iter()
            .position(|c| &c.label() == label)
            .ok_or_else(|| Error::Config(format!("panel has no column `{label}`")))?],
        None => (0..panel.width()).collect(),
    };
    let mut all = Vec::new();
    for c in columns {
        let label = panel.columns()[c].label();
        let stats = bucketize(&panel, c, cfg.buckets.per_unit, cfg.buckets.k_max)?;
        io::write_buckets_csv(&cfg.out.join(format!("buckets_{label}.csv")), &stats)?;
        let doc = json!({
            "column": label,
            "frequency": panel.frequency().as_str(),
            "stats": stats,
            "curve": bucket_curve(&stats),
        });
        if cfg.json {
            io::write_json(&cfg.out.join(format!("buckets_{label}.json")), &doc)?;
        } else {
            outln!("{label}");
            for b in stats.buckets.iter().filter(|b| b.count > 0) {
                outln!(
                    "  {:>4} {:>8} rows  mean phi {:>10}  mean response {:>12} ± {}",
                    b.k,
                    b.count,
                    format_sig(b.mean_phi),
                    format_sig(b.mean_response),
                    b.stderr.map_or("-".into(), format_sig)
                );
            }
        }
        all.push(doc);
    }
    if cfg.json {
        print_json(&Value::Array(all));
    }
    Ok(())
}

fn fit_table(fit: &trendlab_core::regress::FitResult, significance: f64) -> String {
    let mut out = String::new();
    for c in &fit.coefficients {
        let mark = if c.t.is_some_and(|t| t.abs() >= significance) {
            "*"
        } else {
            ""
        };
        out += &format!(
            "{:<3} {:>12} ± {:<12} t {:>8} {mark}\n",
            c.name(),
            format_sig(c.value),
            c.stderr.map_or("-".into(), format_sig),
            c.t.map_or("-".into(), |t| format!("{t:.2}"))
        );
    }
    out += &format!(
        "R2 {} bp, out-of-sample {} bp, {} rows over {} days\n",
        format_sig(fit.r2_bp),
        fit.r2_adj_bp.map_or("-".into(), format_sig),
        fit.n_rows,
        fit.n_days
    );
    out
}

pub fn regress(cfg: &RunConfig) -> Result<()> {
    let (panel, raw) = load_panel(cfg)?;
    let spec = &cfg.fit.template.base;
    let (fit, samples) = pipeline::fit_pooled(&panel, raw.as_deref(), spec, None, None, cfg)?;
    let rec = FitRecord {
        frequency: Some(panel.frequency()),
        horizon: match panel.columns() {
            [PanelColumn::Horizon(h)] => Some(*h),
            _ => None,
        },
        dataset: None,
        fit,
    };
    let doc = io::fit_to_json(&rec);
    io::write_json(&cfg.out.join("fit.json"), &doc)?;
    if cfg.fit.export_bootstrap {
        match &samples {
            Some(s) => io::write_bootstrap_csv(&cfg.out.join("bootstrap.csv"), spec, &s.samples)?,
            None => warn!("bootstrap is off; nothing to export"),
        }
    }
    if cfg.json {
        print_json(&doc);
    } else {
        out!("{}", fit_table(&rec.fit, cfg.fit.significance));
    }
    Ok(())
}

fn fits_file(dir: &Path, dataset: DatasetTag, k: i32) -> PathBuf {
    dir.join("fits").join(format!("{dataset}_k{k}.json"))
}

fn write_curve(cfg: &RunConfig, curve: &HorizonCurve, bundle: Value, name: &str) -> Result<()> {
    io::write_curve_csv(&cfg.out.join("curve.csv"), curve)?;
    io::write_json(&cfg.out.join(name), &bundle)?;
    if cfg.report.gnuplot {
        io::write_curve_gnuplot(&cfg.out.join("curve.dat"), curve)?;
    }
    if cfg.json {
        print_json(&bundle);
    } else {
        for p in &curve.points {
            outln!(
                "{:<8} T {:>12} min  {:<3} {:>12} ± {}",
                p.dataset.as_str(),
                format_sig(p.t_minutes),
                p.coef,
                format_sig(p.value),
                p.stderr.map_or("-".into(), format_sig)
            );
        }
    }
    Ok(())
}

/// Runs per-horizon fits for every input frequency. Each frequency resolves
/// its own defaults (grid, mode, volatility) from the shared settings.
pub fn scan(settings: Settings) -> Result<()> {
    let mut probe = settings.clone();
    crate::config::fill_defaults(&mut probe)?;
    let first = RunConfig::from_settings(&probe)?;
    let mut frequencies: Vec<Frequency> = Vec::new();
    if first.panel.is_some() {
        frequencies.push(first.data.frequency);
    }
    for input in &first.data.inputs {
        if !frequencies.contains(&input.frequency) {
            frequencies.push(input.frequency);
        }
    }
    if frequencies.is_empty() {
        return Err(Error::Config("scan needs --input or --panel".into()));
    }
    let single = frequencies.len() == 1;
    let mut datasets = Vec::new();
    let mut records = Vec::new();
    let mut out_cfg = None;
    for f in frequencies {
        let mut s = settings.clone();
        s.set("data", "frequency", f.as_str());
        let echo = if single {
            "resolved.ini".to_string()
        } else {
            format!("resolved_{f}.ini")
        };
        let cfg = resolve(s, &echo)?;
        let (panel, raw) = load_panel(&cfg)?;
        let dataset = DatasetTag::for_frequency(f);
        let mut fits = Vec::new();
        for (h, result) in pipeline::fit_each_horizon(&panel, raw.as_deref(), &cfg) {
            let Ok(fit) = result else { continue };
            let rec = FitRecord {
                fit,
                frequency: Some(f),
                horizon: Some(h),
                dataset: Some(dataset),
            };
            let doc = io::fit_to_json(&rec);
            io::write_json(&fits_file(&cfg.out, dataset, h.k), &doc)?;
            records.push(doc);
            fits.push((h, rec.fit));
        }
        datasets.push(DatasetFits {
            dataset,
            frequency: f,
            fits,
        });
        out_cfg = Some(cfg);
    }
    let cfg = out_cfg.expect("at least one frequency");
    let curve = assemble_curve(&datasets, cfg.report.rescale)?;
    let bundle = json!({ "curve": curve, "fits": records });
    write_curve(&cfg, &curve, bundle, "curve.json")
}

/// Fit files named directly, or every `.json` file of a directory, sorted.
fn expand_fit_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn report(cfg: &RunConfig) -> Result<()> {
    let paths = expand_fit_paths(&cfg.report.fits)?;
    if paths.is_empty() {
        return Err(Error::Config("report needs --fits".into()));
    }
    let mut datasets: Vec<DatasetFits> = Vec::new();
    let mut records = Vec::new();
    for path in &paths {
        let rec = io::read_fit(path)?;
        let (Some(frequency), Some(horizon)) = (rec.frequency, rec.horizon) else {
            return Err(Error::Config(format!(
                "{}: fit has no frequency or horizon to place it on the curve",
                path.display()
            )));
        };
        let dataset = rec.dataset.unwrap_or(DatasetTag::for_frequency(frequency));
        records.push(io::fit_to_json(&rec));
        match datasets
            .iter_mut()
            .find(|d| d.dataset == dataset && d.frequency == frequency)
        {
            Some(d) => d.fits.push((horizon, rec.fit)),
            None => datasets.push(DatasetFits {
                dataset,
                frequency,
                fits: vec![(horizon, rec.fit)],
            }),
        }
    }
    let curve = assemble_curve(&datasets, cfg.report.rescale)?;
    let mut buckets = Vec::new();
    for path in &cfg.report.buckets {
        let v: Value =
            serde_json::from_reader(io::open(path)?).map_err(|e| Error::json(path, e))?;
        buckets.push(v);
    }
    let bundle = json!({ "curve": curve, "fits": records, "buckets": buckets });
    write_curve(cfg, &curve, bundle, "bundle.json")
}

pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let plan = RecoveryPlan::from_config(cfg);
    if cfg.simulate.recover {
        let verdict = plan.run()?;
        let mut doc = serde_json::to_value(&verdict).map_err(|e| Error::Config(e.to_string()))?;
        doc["fit"] = io::fit_to_json(&FitRecord::bare(verdict.fit.clone()));
        io::write_json(&cfg.out.join("verdict.json"), &doc)?;
        if cfg.json {
            print_json(&doc);
        } else {
            out!("{}", verdict.summary());
        }
        return Ok(());
    }
    let markets = plan.markets()?;
    let series: Vec<_> = markets.iter().map(|(s, _)| s.clone()).collect();
    io::write_price_csv(&cfg.out.join("prices.csv"), &series)?;
    let assets: Vec<Value> = markets
        .iter()
        .map(|(s, h)| json!({ "asset": s.asset_id(), "driving_horizons": h, "n_prices": s.len() }))
        .collect();
    let doc = json!({ "config": plan.sim, "per_horizon": plan.per_horizon, "assets": assets });
    io::write_json(&cfg.out.join("sim.json"), &doc)?;
    if cfg.json {
        print_json(&doc);
    } else {
        outln!(
            "{} series -> {}",
            series.len(),
            cfg.out.join("prices.csv").display()
        );
    }
    Ok(())
}
