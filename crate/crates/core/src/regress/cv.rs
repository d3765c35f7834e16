use alloc::vec::Vec;
use core::ops::Range;

use super::data::{solve_factor, FitData};
use super::qr::Triangular;
use super::{FitOptions, ModelSpec};
use crate::error::{Error, Result};
use crate::panel::{aggregate_scales, build_panel, PanelMode};
use crate::par;
use crate::series::{normalize_masked, LogReturns, ReturnsConfig};
use crate::trend::TrendConfig;

fn fold_ranges(n_days: usize, k: usize) -> Result<Vec<Range<usize>>> {
    if k < 2 {
        return Err(Error::Config(alloc::format!(
            "cross-validation needs at least 2 folds, got {k}"
        )));
    }
    if n_days < k {
        return Err(Error::InsufficientData {
            what: "distinct days for the requested folds",
            needed: k,
            got: n_days,
        });
    }
    Ok((0..k)
        .map(|f| f * n_days / k..(f + 1) * n_days / k)
        .collect())
}

/// `(SSE, SST)` of the validation rows under the training fit; SST is taken
/// around the training mean response.
fn score(
    train: &Triangular,
    validation: &Triangular,
    validation_rows: usize,
    spec: &ModelSpec,
) -> Result<(f64, f64)> {
    let p = spec.len();
    if validation_rows < p {
        return Err(Error::InsufficientData {
            what: "rows in a validation fold",
            needed: p,
            got: validation_rows,
        });
    }
    let fit = solve_factor(train, spec)?;
    let (w, wy) = train.weight_and_response_sum();
    let mut mean_only = alloc::vec![0.0; p];
    mean_only[0] = wy / w;
    Ok((
        validation.residual_ss(&fit.beta),
        validation.residual_ss(&mean_only),
    ))
}

fn pooled_bp(scores: Vec<Result<(f64, f64)>>) -> Result<f64> {
    let (mut sse, mut sst) = (0.0, 0.0);
    for s in scores {
        let (e, t) = s?;
        sse += e;
        sst += t;
    }
    if !(sst > 0.0) {
        return Err(Error::Data("validation responses have no variance".into()));
    }
    Ok((1.0 - sse / sst) * 1e4)
}

/// Out-of-sample R^2 in basis points over `k` contiguous blocks of days,
/// pooled over folds. Trend strengths and normalizations are taken as they
/// are in `data`; see [`cross_validate_series`] for the variant that
/// re-estimates them per fold.
pub fn cross_validate(data: &FitData, k: usize) -> Result<f64> {
    let folds = fold_ranges(data.n_days(), k)?;
    let n_days = data.n_days();
    let scores = par::map_indexed(folds.len(), |f| {
        let fold = folds[f].clone();
        let (train, _) = data.factor_of((0..fold.start).chain(fold.end..n_days));
        let (validation, rows) = data.factor_of(fold);
        score(&train, &validation, rows, data.spec())
    });
    pooled_bp(scores)
}

/// Raw inputs for cross-validation with per-fold re-estimation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesCvInput<'a> {
    pub raw: &'a [LogReturns],
    pub returns: &'a ReturnsConfig,
    pub trend: &'a TrendConfig,
    pub mode: PanelMode,
    pub spec: &'a ModelSpec,
    pub opts: &'a FitOptions,
    /// Regress on the equally weighted mean of all horizons.
    pub aggregate: bool,
}

/// Out-of-sample R^2 in basis points where, for every fold, each asset's
/// mean and volatility are estimated from training days only and the trend
/// panel is rebuilt from those estimates before fitting.
pub fn cross_validate_series(input: &SeriesCvInput<'_>, k: usize) -> Result<f64> {
    let mut all_days: Vec<i64> = input
        .raw
        .iter()
        .flat_map(|r| {
            r.points
                .iter()
                .map(move |p| r.frequency.day_of(p.timestamp))
        })
        .collect();
    all_days.sort_unstable();
    all_days.dedup();
    let folds = fold_ranges(all_days.len(), k)?;

    let scores = par::map_indexed(folds.len(), |f| {
        let (lo, hi) = (all_days[folds[f].start], all_days[folds[f].end - 1]);
        let in_fold = |day: i64| day >= lo && day <= hi;
        let normalized = input
            .raw
            .iter()
            .map(|r| {
                normalize_masked(r, input.returns, |i| {
                    !in_fold(r.frequency.day_of(r.points[i].timestamp))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut panel = build_panel(&normalized, input.trend, input.mode)?;
        if input.aggregate {
            panel = aggregate_scales(&panel)?;
        }
        let train =
            FitData::from_panel_masked(&panel, input.spec, input.opts, |i| !in_fold(panel.day(i)))?;
        let validation =
            FitData::from_panel_masked(&panel, input.spec, input.opts, |i| in_fold(panel.day(i)))?;
        let (train_r, _) = train.factor_of(0..train.n_days());
        let (validation_r, rows) = validation.factor_of(0..validation.n_days());
        score(&train_r, &validation_r, rows, input.spec)
    });
    pooled_bp(scores)
}
