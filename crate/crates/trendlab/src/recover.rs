//! End-to-end recovery: simulate markets with known coefficients, run them
//! through return normalization, trend strengths and the pooled fit, and
//! judge the estimates against the truth.

use log::info;
use rayon::prelude::*;
use serde::Serialize;
use trendlab_core::panel::{for_each_row, PanelMode};
use trendlab_core::regress::{
    fit, BootstrapConfig, FitConfig, FitDataBuilder, FitResult, ModelSpec,
};
use trendlab_core::series::compute_returns;
use trendlab_core::simulate::{simulate_asset, SimConfig};
use trendlab_core::trend::horizon_grid;
use trendlab_core::{Horizon, PriceSeries, ReturnsConfig, TrendConfig};

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// Series per sequential work unit. Fixed, so the merge order of the
/// per-day factors and hence every output bit is independent of the thread
/// count.
const SERIES_PER_CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryPlan {
    /// Coefficients and sizes; `horizons` is ignored in favour of `drivers`.
    pub sim: SimConfig,
    pub drivers: Vec<Horizon>,
    /// One set of `n_assets` markets per driving horizon, each driven by
    /// and analysed at that horizon only, all pooled into one fit.
    pub per_horizon: bool,
    pub prepend_warmup: bool,
    pub returns: ReturnsConfig,
    /// Analysis grid and clipping.
    pub trend: TrendConfig,
    pub mode: PanelMode,
    pub spec: ModelSpec,
    pub bootstrap: usize,
    pub folds: Option<usize>,
    pub check: Vec<String>,
    pub min_t: Vec<String>,
    /// Allowed distance from the truth in bootstrap standard errors.
    pub tolerance: f64,
    /// `|t|` required of the `min_t` coefficients.
    pub significance: f64,
    pub label: Option<String>,
}

impl RecoveryPlan {
    pub fn from_config(cfg: &RunConfig) -> Self {
        let s = &cfg.simulate;
        Self {
            sim: s.config.clone(),
            drivers: horizon_grid(cfg.data.frequency, s.drivers.0, s.drivers.1),
            per_horizon: s.per_horizon,
            prepend_warmup: s.prepend_warmup,
            returns: cfg.data.returns,
            trend: cfg.trend.config.clone(),
            mode: cfg.trend.mode,
            spec: cfg.fit.template.base.clone(),
            bootstrap: cfg.fit.bootstrap,
            folds: cfg.fit.folds,
            check: s.check.clone(),
            min_t: s.min_t.clone(),
            tolerance: s.tolerance,
            significance: cfg.fit.significance,
            label: cfg.preset.clone(),
        }
    }

    fn truth(&self, name: &str) -> f64 {
        match name {
            "a" => self.sim.a,
            "b" => self.sim.b,
            "c" => self.sim.c,
            "d" => self.sim.d,
            "e" => self.sim.e,
            _ => 0.0,
        }
    }

    /// `(simulation config, analysis config)` of every simulated series, in
    /// asset-index order.
    fn tasks(&self) -> Result<Vec<(SimConfig, TrendConfig, usize)>> {
        let warmup = if self.prepend_warmup {
            self.trend
                .horizons
                .iter()
                .map(|h| self.trend.warmup(h.intervals))
                .max()
                .unwrap_or(0)
        } else {
            0
        };
        let mut sim = self.sim.clone();
        sim.n_intervals += warmup;
        let n = sim.n_assets;
        if !self.per_horizon {
            sim.horizons = self.drivers.iter().map(|h| h.intervals).collect();
            return Ok((0..n)
                .map(|a| (sim.clone(), self.trend.clone(), a))
                .collect());
        }
        if self.drivers != self.trend.horizons {
            return Err(Error::Config(
                "per-horizon recovery needs the driving horizons to equal the analysis grid".into(),
            ));
        }
        let mut tasks = Vec::with_capacity(n * self.drivers.len());
        for (k, h) in self.drivers.iter().enumerate() {
            let mut one = sim.clone();
            one.horizons = vec![h.intervals];
            let mut trend = self.trend.clone();
            trend.horizons = vec![*h];
            tasks.extend((0..n).map(|a| (one.clone(), trend.clone(), k * n + a)));
        }
        Ok(tasks)
    }

    /// Simulated prices of every series, in asset-index order, with the
    /// horizons driving each.
    pub fn markets(&self) -> Result<Vec<(PriceSeries, Vec<f64>)>> {
        let tasks = self.tasks()?;
        tasks
            .par_iter()
            .map(|(sim, _, asset)| Ok((simulate_asset(sim, *asset)?, sim.horizons.clone())))
            .collect()
    }

    /// Simulates, normalizes and stacks every series into one pooled fit.
    pub fn fit(&self) -> Result<FitResult> {
        let tasks = self.tasks()?;
        for (sim, _, _) in tasks.iter().take(1) {
            sim.validate()?;
        }
        info!(
            "recovery: {} series x {} intervals",
            tasks.len(),
            tasks[0].0.n_intervals
        );
        let chunks: Vec<Result<FitDataBuilder>> = tasks
            .par_chunks(SERIES_PER_CHUNK)
            .map(|chunk| {
                let mut builder = FitDataBuilder::new(&self.spec);
                for (sim, trend, asset) in chunk {
                    let prices = simulate_asset(sim, *asset)?;
                    let returns = compute_returns(&prices, &self.returns)?;
                    let frequency = sim.frequency;
                    for_each_row(&returns, trend, self.mode, |ts, phi, response| {
                        for &v in phi {
                            builder.push(frequency.day_of(ts), v, response);
                        }
                    })?;
                }
                Ok(builder)
            })
            .collect();
        let mut pooled = FitDataBuilder::new(&self.spec);
        for b in chunks {
            pooled.merge(b?);
        }
        let data = pooled.finish();
        info!(
            "recovery: {} rows over {} days",
            data.n_rows(),
            data.n_days()
        );
        let cfg = FitConfig {
            bootstrap: (self.bootstrap > 0).then_some(BootstrapConfig {
                n_samples: self.bootstrap,
                seed: self.sim.seed,
            }),
            folds: self.folds,
        };
        Ok(fit(&data, &cfg)?)
    }

    pub fn run(&self) -> Result<Verdict> {
        let fit = self.fit()?;
        Ok(self.judge(fit))
    }

    /// Compares a fit with the simulated truth.
    pub fn judge(&self, fit: FitResult) -> Verdict {
        let coefficients: Vec<CoefficientCheck> = fit
            .coefficients
            .iter()
            .map(|c| {
                let name = c.name();
                let truth = self.truth(name);
                let checked = self.check.iter().any(|x| x == name);
                let tol = c.stderr.map(|s| self.tolerance * s);
                let within = tol.is_some_and(|t| (c.value - truth).abs() <= t);
                let sign_ok = truth == 0.0 || c.value.signum() == truth.signum();
                let t_ok = self
                    .min_t
                    .iter()
                    .any(|x| x == name)
                    .then(|| c.t.is_some_and(|t| t.abs() >= self.significance));
                CoefficientCheck {
                    name: name.to_string(),
                    truth,
                    value: c.value,
                    stderr: c.stderr,
                    t: c.t,
                    z: c.stderr.map(|s| (c.value - truth) / s),
                    ci: tol.map(|t| [c.value - t, c.value + t]),
                    checked,
                    within_tolerance: within,
                    sign_ok,
                    t_ok,
                    pass: !checked || (within && sign_ok && t_ok.unwrap_or(true)),
                }
            })
            .collect();
        let pass = coefficients.iter().all(|c| c.pass) && coefficients.iter().any(|c| c.checked);
        Verdict {
            preset: self.label.clone(),
            seed: self.sim.seed,
            tolerance: self.tolerance,
            n_series: self.sim.n_assets
                * if self.per_horizon {
                    self.drivers.len()
                } else {
                    1
                },
            n_rows: fit.n_rows,
            n_days: fit.n_days,
            n_bootstrap: fit.n_bootstrap,
            r2_bp: fit.r2_bp,
            r2_adj_bp: fit.r2_adj_bp,
            coefficients,
            pass,
            fit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub name: String,
    pub truth: f64,
    pub value: f64,
    pub stderr: Option<f64>,
    pub t: Option<f64>,
    /// `(value - truth) / stderr`.
    pub z: Option<f64>,
    /// `value ± tolerance * stderr`.
    pub ci: Option<[f64; 2]>,
    pub checked: bool,
    pub within_tolerance: bool,
    pub sign_ok: bool,
    pub t_ok: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub preset: Option<String>,
    pub seed: u64,
    pub tolerance: f64,
    pub n_series: usize,
    pub n_rows: usize,
    pub n_days: usize,
    pub n_bootstrap: usize,
    pub r2_bp: f64,
    pub r2_adj_bp: Option<f64>,
    pub coefficients: Vec<CoefficientCheck>,
    pub pass: bool,
    #[serde(skip)]
    pub fit: FitResult,
}

impl Verdict {
    /// One line per coefficient, then the overall verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.coefficients {
            let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:+.3}"));
            out += &format!(
                "{:<3} truth {:+.6}  estimate {:+.6} ± {:.6}  t {}  z {}  {}\n",
                c.name,
                c.truth,
                c.value,
                c.stderr.unwrap_or(f64::NAN),
                fmt(c.t),
                fmt(c.z),
                if !c.checked {
                    "(not judged)"
                } else if c.pass {
                    "ok"
                } else {
                    "MISS"
                }
            );
        }
        out += &format!(
            "{} rows, {} days, R2 {:.3} bp: {}\n",
            self.n_rows,
            self.n_days,
            self.r2_bp,
            if self.pass { "PASS" } else { "FAIL" }
        );
        out
    }
}
