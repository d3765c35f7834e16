//! Stage glue shared by the commands: prices to returns to panel to fits.

use log::{info, warn};
use trendlab_core::panel::aggregate_scales;
use trendlab_core::regress::{
    cross_validate_series, fit_with_samples, BootstrapConfig, BootstrapOutput, FitConfig, FitData,
    FitOptions, FitResult, ModelSpec, SeriesCvInput,
};
use trendlab_core::series::{log_returns, normalize, split_trading_days, LogReturns};
use trendlab_core::{
    build_panel, Error as CoreError, Frequency, Horizon, NormalizedReturns, Panel, PriceSeries,
};

use crate::config::{InputSpec, RunConfig};
use crate::error::{Error, Result};
use crate::io;

/// Loads every input file of `frequency`.
pub fn load_inputs(inputs: &[InputSpec], frequency: Frequency) -> Result<Vec<PriceSeries>> {
    let mut all = Vec::new();
    for input in inputs.iter().filter(|i| i.frequency == frequency) {
        let series = io::load_price_csv(&input.path, frequency)?;
        info!("{}: {} assets", input.path.display(), series.len());
        all.extend(series);
    }
    if all.is_empty() {
        return Err(Error::Config(format!("no {frequency} input files given")));
    }
    Ok(all)
}

/// Log-returns per asset; minute data is cut into sessions first, keeping
/// overnight and first-minute returns only in continuous mode.
pub fn raw_returns(series: &[PriceSeries], cfg: &RunConfig) -> Result<Vec<LogReturns>> {
    series
        .iter()
        .map(|s| {
            if s.frequency() != Frequency::Minute {
                return Ok(log_returns(s));
            }
            let split = split_trading_days(s, cfg.data.sessions.for_asset(s.asset_id()))?;
            Ok(match cfg.trend.mode {
                trendlab_core::PanelMode::DayByDay => split.day_by_day(),
                trendlab_core::PanelMode::Continuous => split.continuous(),
            })
        })
        .collect()
}

/// Normalizes every asset; degenerate ones are dropped with a warning.
/// Returns the kept raw returns alongside, index-aligned.
pub fn normalize_all(
    raw: Vec<LogReturns>,
    cfg: &RunConfig,
) -> Result<(Vec<LogReturns>, Vec<NormalizedReturns>)> {
    let mut kept = Vec::with_capacity(raw.len());
    let mut normalized = Vec::with_capacity(raw.len());
    for r in raw {
        match normalize(&r, &cfg.data.returns) {
            Ok(n) => {
                kept.push(r);
                normalized.push(n);
            }
            Err(e @ CoreError::Degenerate { .. }) => warn!("excluded: {e}"),
            Err(e) => return Err(e.into()),
        }
    }
    if normalized.is_empty() {
        return Err(CoreError::Empty("every asset was excluded as degenerate").into());
    }
    Ok((kept, normalized))
}

pub fn panel(normalized: &[NormalizedReturns], cfg: &RunConfig) -> Result<Panel> {
    let panel = build_panel(normalized, &cfg.trend.config, cfg.trend.mode)?;
    if panel.is_empty() {
        warn!("panel is empty: series are shorter than the warmup");
    }
    Ok(if cfg.trend.aggregate {
        aggregate_scales(&panel)?
    } else {
        panel
    })
}

/// Inputs of one frequency, from prices to panel.
pub struct Prepared {
    pub raw: Vec<LogReturns>,
    pub normalized: Vec<NormalizedReturns>,
    pub panel: Panel,
}

pub fn prepare(series: &[PriceSeries], cfg: &RunConfig) -> Result<Prepared> {
    let (raw, normalized) = normalize_all(raw_returns(series, cfg)?, cfg)?;
    let panel = panel(&normalized, cfg)?;
    info!("panel: {} rows x {} columns", panel.len(), panel.width());
    Ok(Prepared {
        raw,
        normalized,
        panel,
    })
}

pub fn fit_options(cfg: &RunConfig) -> FitOptions {
    FitOptions {
        columns: None,
        subgroup: cfg.fit.subgroup.clone(),
        weighting: cfg.fit.weighting,
    }
}

fn fit_config(cfg: &RunConfig, panel_cv: bool) -> FitConfig {
    FitConfig {
        bootstrap: (cfg.fit.bootstrap > 0).then_some(BootstrapConfig {
            n_samples: cfg.fit.bootstrap,
            seed: cfg.seed,
        }),
        folds: if panel_cv { cfg.fit.folds } else { None },
    }
}

/// Pooled fit of `spec` on the given panel columns. With raw returns at hand
/// and series cross-validation enabled, the out-of-sample R^2 re-estimates
/// normalization and trend strengths on every training fold.
pub fn fit_pooled(
    panel: &Panel,
    raw: Option<&[LogReturns]>,
    spec: &ModelSpec,
    columns: Option<Vec<usize>>,
    horizons: Option<Vec<Horizon>>,
    cfg: &RunConfig,
) -> Result<(FitResult, Option<BootstrapOutput>)> {
    let opts = FitOptions {
        columns,
        ..fit_options(cfg)
    };
    let series_cv = cfg.fit.series_cv && raw.is_some() && cfg.fit.folds.is_some();
    let data = FitData::from_panel(panel, spec, &opts)?;
    let (mut fit, samples) = fit_with_samples(&data, &fit_config(cfg, !series_cv))?;
    if let (true, Some(raw), Some(k)) = (series_cv, raw, cfg.fit.folds) {
        let mut trend = cfg.trend.config.clone();
        let aggregate = match horizons {
            Some(h) => {
                trend.horizons = h;
                false
            }
            None => cfg.trend.aggregate,
        };
        let input = SeriesCvInput {
            raw,
            returns: &cfg.data.returns,
            trend: &trend,
            mode: cfg.trend.mode,
            spec,
            opts: &FitOptions {
                columns: None,
                ..fit_options(cfg)
            },
            aggregate,
        };
        fit.r2_adj_bp = Some(cross_validate_series(&input, k)?);
    }
    Ok((fit, samples))
}

/// Separate fit per horizon column, with the template's per-horizon spec.
/// Failures stay per horizon.
pub fn fit_each_horizon(
    panel: &Panel,
    raw: Option<&[LogReturns]>,
    cfg: &RunConfig,
) -> Vec<(Horizon, Result<FitResult>)> {
    panel
        .columns()
        .iter()
        .enumerate()
        .filter_map(|(c, col)| col.horizon().map(|h| (c, h)))
        .map(|(c, h)| {
            let result = cfg
                .fit
                .template
                .spec_for(h.k)
                .map_err(Error::from)
                .and_then(|spec| fit_pooled(panel, raw, &spec, Some(vec![c]), Some(vec![h]), cfg))
                .map(|(f, _)| f);
            if let Err(e) = &result {
                warn!("horizon k={}: {e}", h.k);
            }
            (h, result)
        })
        .collect()
}
