//! The (time x asset) table of per-horizon trend strengths and the
//! next-interval response.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::series::{Frequency, NormalizedReturns};
use crate::trend::{Horizon, TrendConfig, TrendState};

/// Longest horizon allowed when trend state restarts every session.
pub const MAX_DAY_BY_DAY_HORIZON: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PanelMode {
    /// Trend state restarts every session; warmup is `T` intervals per day.
    DayByDay,
    /// One uninterrupted stream per asset; warmup is `warmup_multiplier * T`.
    Continuous,
}

impl PanelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PanelMode::DayByDay => "day-by-day",
            PanelMode::Continuous => "continuous",
        }
    }
}

impl core::str::FromStr for PanelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "day-by-day" | "day_by_day" => Ok(PanelMode::DayByDay),
            "continuous" => Ok(PanelMode::Continuous),
            other => Err(Error::Config(format!("unknown panel mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PanelColumn {
    Horizon(Horizon),
    /// Equally weighted mean of several horizons.
    Aggregate {
        of: Vec<Horizon>,
    },
}

impl PanelColumn {
    pub fn label(&self) -> String {
        match self {
            PanelColumn::Horizon(h) => h.label(),
            PanelColumn::Aggregate { .. } => "phi_agg".into(),
        }
    }

    pub fn horizon(&self) -> Option<Horizon> {
        match self {
            PanelColumn::Horizon(h) => Some(*h),
            PanelColumn::Aggregate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelMeta {
    pub frequency: Frequency,
    pub columns: Vec<PanelColumn>,
    pub lag: usize,
    pub mode: PanelMode,
    pub clip_phi: f64,
    pub warmup_multiplier: f64,
    /// Where the trend-strength clip is applied.
    pub clip_stage: String,
}

/// Rows ordered by `(timestamp, asset)`; trend strengths stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    meta: PanelMeta,
    assets: Vec<String>,
    timestamps: Vec<i64>,
    asset_index: Vec<u32>,
    phi: Vec<f64>,
    response: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelRow<'a> {
    pub timestamp: i64,
    pub asset: u32,
    pub phi: &'a [f64],
    pub response: f64,
}

impl Panel {
    /// Assembles a panel from loose rows `(timestamp, asset index, phi, response)`.
    pub fn from_rows(
        meta: PanelMeta,
        assets: Vec<String>,
        mut rows: Vec<(i64, u32, Vec<f64>, f64)>,
    ) -> Result<Self> {
        let width = meta.columns.len();
        if width == 0 {
            return Err(Error::Config(
                "panel needs at least one trend column".into(),
            ));
        }
        rows.sort_by_key(|r| (r.0, r.1));
        let mut panel = Panel {
            meta,
            assets,
            timestamps: Vec::with_capacity(rows.len()),
            asset_index: Vec::with_capacity(rows.len()),
            phi: Vec::with_capacity(rows.len() * width),
            response: Vec::with_capacity(rows.len()),
        };
        for (i, (ts, asset, phi, response)) in rows.into_iter().enumerate() {
            if phi.len() != width {
                return Err(Error::Data(format!(
                    "panel row {i}: expected {width} trend values, got {}",
                    phi.len()
                )));
            }
            if asset as usize >= panel.assets.len() {
                return Err(Error::Data(format!(
                    "panel row {i}: unknown asset index {asset}"
                )));
            }
            if i > 0 && panel.timestamps[i - 1] == ts && panel.asset_index[i - 1] == asset {
                return Err(Error::Duplicate(format!(
                    "panel row for asset {} at {ts}",
                    panel.assets[asset as usize]
                )));
            }
            if let Some(v) = phi.iter().find(|v| !(v.abs() <= panel.meta.clip_phi)) {
                return Err(Error::Data(format!(
                    "panel row {i}: trend strength {v} outside ±{}",
                    panel.meta.clip_phi
                )));
            }
            panel.timestamps.push(ts);
            panel.asset_index.push(asset);
            panel.phi.extend_from_slice(&phi);
            panel.response.push(response);
        }
        Ok(panel)
    }

    pub fn meta(&self) -> &PanelMeta {
        &self.meta
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn frequency(&self) -> Frequency {
        self.meta.frequency
    }

    pub fn columns(&self) -> &[PanelColumn] {
        &self.meta.columns
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn width(&self) -> usize {
        self.meta.columns.len()
    }

    pub fn timestamp(&self, i: usize) -> i64 {
        self.timestamps[i]
    }

    pub fn asset_index(&self, i: usize) -> u32 {
        self.asset_index[i]
    }

    pub fn asset(&self, i: usize) -> &str {
        &self.assets[self.asset_index[i] as usize]
    }

    pub fn phi(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.phi[i * w..(i + 1) * w]
    }

    pub fn response(&self, i: usize) -> f64 {
        self.response[i]
    }

    /// Resampling unit (trading day, or the interval itself) of row `i`.
    pub fn day(&self, i: usize) -> i64 {
        self.meta.frequency.day_of(self.timestamps[i])
    }

    pub fn row(&self, i: usize) -> PanelRow<'_> {
        PanelRow {
            timestamp: self.timestamps[i],
            asset: self.asset_index[i],
            phi: self.phi(i),
            response: self.response[i],
        }
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = PanelRow<'_>> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    /// Panel restricted to the given trend columns.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Panel> {
        if columns.is_empty() {
            return Err(Error::Config("no panel columns selected".into()));
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= self.width()) {
            return Err(Error::Config(format!("panel has no column {c}")));
        }
        let mut meta = self.meta.clone();
        meta.columns = columns
            .iter()
            .map(|&c| self.meta.columns[c].clone())
            .collect();
        let mut phi = Vec::with_capacity(self.len() * columns.len());
        for i in 0..self.len() {
            let row = self.phi(i);
            phi.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Panel {
            meta,
            assets: self.assets.clone(),
            timestamps: self.timestamps.clone(),
            asset_index: self.asset_index.clone(),
            phi,
            response: self.response.clone(),
        })
    }

    /// Index of the column holding grid horizon `k`.
    pub fn column_of_k(&self, k: i32) -> Option<usize> {
        self.meta
            .columns
            .iter()
            .position(|c| matches!(c, PanelColumn::Horizon(h) if h.k == k))
    }
}

fn runs(input: &NormalizedReturns, mode: PanelMode) -> Result<Vec<Range<usize>>> {
    match mode {
        PanelMode::Continuous => Ok(alloc::vec![0..input.len()]),
        PanelMode::DayByDay => input.sessions.clone().ok_or_else(|| {
            Error::Config(format!(
                "asset {}: day-by-day panels need session-segmented returns",
                input.asset_id
            ))
        }),
    }
}

fn check_mode(cfg: &TrendConfig, mode: PanelMode) -> Result<()> {
    cfg.validate()?;
    if mode == PanelMode::DayByDay {
        if let Some(h) = cfg
            .horizons
            .iter()
            .find(|h| h.intervals > MAX_DAY_BY_DAY_HORIZON)
        {
            return Err(Error::Config(format!(
                "day-by-day panels support horizons up to {MAX_DAY_BY_DAY_HORIZON}, got {}",
                h.intervals
            )));
        }
    }
    Ok(())
}

/// Streams the panel rows of one asset in time order as
/// `(timestamp, clipped phi per horizon, response)`.
///
/// A row is emitted once every horizon is past its warmup and the response
/// `1 + lag` intervals ahead lies inside the same run.
pub fn for_each_row<F>(
    input: &NormalizedReturns,
    cfg: &TrendConfig,
    mode: PanelMode,
    mut emit: F,
) -> Result<()>
where
    F: FnMut(i64, &[f64], f64),
{
    check_mode(cfg, mode)?;
    let warmup = cfg
        .horizons
        .iter()
        .map(|h| match mode {
            PanelMode::DayByDay => crate::math::ceil(h.intervals) as usize,
            PanelMode::Continuous => cfg.warmup(h.intervals),
        })
        .max()
        .unwrap_or(0);
    let mut states: Vec<TrendState> = cfg
        .horizons
        .iter()
        .map(|h| TrendState::new(h.intervals))
        .collect();
    let mut phi = alloc::vec![0.0; states.len()];
    for run in runs(input, mode)? {
        states.iter_mut().for_each(TrendState::reset);
        for i in run.clone() {
            let x = input.excess_at(i);
            for (slot, state) in phi.iter_mut().zip(states.iter_mut()) {
                *slot = state.update(x).clamp(-cfg.clip_phi, cfg.clip_phi);
            }
            let target = i + 1 + cfg.lag;
            if i - run.start >= warmup && target < run.end {
                emit(input.values[i].timestamp, &phi, input.values[target].value);
            }
        }
    }
    Ok(())
}

/// Builds the panel for all assets; asset indices follow input order.
/// Timestamps, flattened trend rows and responses of one asset.
type AssetRows = (Vec<i64>, Vec<f64>, Vec<f64>);

pub fn build_panel(
    inputs: &[NormalizedReturns],
    cfg: &TrendConfig,
    mode: PanelMode,
) -> Result<Panel> {
    check_mode(cfg, mode)?;
    let frequency = inputs
        .first()
        .ok_or(Error::Empty("no assets to build a panel from"))?
        .frequency;
    if let Some(other) = inputs.iter().find(|r| r.frequency != frequency) {
        return Err(Error::Config(format!(
            "inconsistent frequencies: {} is {}, expected {frequency}",
            other.asset_id, other.frequency
        )));
    }
    let width = cfg.horizons.len();
    let per_asset: Vec<Result<AssetRows>> = par::map_indexed(inputs.len(), |a| {
        let (mut ts, mut phi, mut resp) = (Vec::new(), Vec::new(), Vec::new());
        for_each_row(&inputs[a], cfg, mode, |t, p, r| {
            ts.push(t);
            phi.extend_from_slice(p);
            resp.push(r);
        })?;
        Ok((ts, phi, resp))
    });
    let per_asset = per_asset.into_iter().collect::<Result<Vec<_>>>()?;

    let mut order: Vec<(i64, u32, u32)> = per_asset
        .iter()
        .enumerate()
        .flat_map(|(a, (ts, _, _))| {
            ts.iter()
                .enumerate()
                .map(move |(j, &t)| (t, a as u32, j as u32))
        })
        .collect();
    order.sort_unstable();

    let mut panel = Panel {
        meta: PanelMeta {
            frequency,
            columns: cfg
                .horizons
                .iter()
                .map(|&h| PanelColumn::Horizon(h))
                .collect(),
            lag: cfg.lag,
            mode,
            clip_phi: cfg.clip_phi,
            warmup_multiplier: cfg.warmup_multiplier,
            clip_stage: "emission".into(),
        },
        assets: inputs.iter().map(|r| r.asset_id.clone()).collect(),
        timestamps: Vec::with_capacity(order.len()),
        asset_index: Vec::with_capacity(order.len()),
        phi: Vec::with_capacity(order.len() * width),
        response: Vec::with_capacity(order.len()),
    };
    for (t, a, j) in order {
        let (_, phi, resp) = &per_asset[a as usize];
        let j = j as usize;
        panel.timestamps.push(t);
        panel.asset_index.push(a);
        panel
            .phi
            .extend_from_slice(&phi[j * width..(j + 1) * width]);
        panel.response.push(resp[j]);
    }
    Ok(panel)
}

/// Replaces the trend columns by their equally weighted mean.
pub fn aggregate_scales(panel: &Panel) -> Result<Panel> {
    if panel.width() < 2 {
        return Err(Error::Config(
            "aggregation needs at least two horizons".into(),
        ));
    }
    let of: Vec<Horizon> = panel
        .meta
        .columns
        .iter()
        .filter_map(PanelColumn::horizon)
        .collect();
    let mut meta = panel.meta.clone();
    meta.columns = alloc::vec![PanelColumn::Aggregate { of }];
    let k = panel.width() as f64;
    let phi = (0..panel.len())
        .map(|i| panel.phi(i).iter().sum::<f64>() / k)
        .collect();
    Ok(Panel {
        meta,
        assets: panel.assets.clone(),
        timestamps: panel.timestamps.clone(),
        asset_index: panel.asset_index.clone(),
        phi,
        response: panel.response.clone(),
    })
}

#[cfg(test)]
#[allow(clippy::single_range_in_vec_init)]
mod tests {
    use super::*;
    use crate::series::{ReturnPoint, Sigma};
    use alloc::vec;

    fn normalized(
        id: &str,
        values: &[f64],
        sessions: Option<Vec<Range<usize>>>,
    ) -> NormalizedReturns {
        NormalizedReturns {
            asset_id: id.into(),
            frequency: Frequency::Minute,
            values: values
                .iter()
                .enumerate()
                .map(|(i, &v)| ReturnPoint {
                    timestamp: i as i64,
                    value: v,
                })
                .collect(),
            mu: 0.0,
            sigma: Sigma::Constant(1.0),
            clip_sigma: 20.0,
            sessions,
        }
    }

    fn wiggle(n: usize) -> Vec<f64> {
        (0..n).map(|i| libm::sin(i as f64 * 0.37) + 0.1).collect()
    }

    #[test]
    fn day_by_day_ramp_up_count() {
        // One 388-return day, T = 8: rows at local index 8..=386.
        let input = normalized("ES", &wiggle(388), Some(vec![0..388]));
        let cfg = TrendConfig::new(vec![Horizon::grid(Frequency::Minute, 3)]);
        let panel = build_panel(&[input], &cfg, PanelMode::DayByDay).unwrap();
        assert_eq!(panel.len(), 379);
        assert_eq!(panel.timestamp(0), 8);
    }

    #[test]
    fn day_by_day_resets_state_each_session() {
        let values = wiggle(200);
        let cfg = TrendConfig::new(vec![Horizon::grid(Frequency::Minute, 2)]);
        let joined = normalized("ES", &values, Some(vec![0..100, 100..200]));
        let panel = build_panel(&[joined], &cfg, PanelMode::DayByDay).unwrap();
        let second = normalized("ES", &values[100..], Some(vec![0..100]));
        let alone = build_panel(&[second], &cfg, PanelMode::DayByDay).unwrap();
        let tail: Vec<f64> = (0..panel.len())
            .filter(|&i| panel.timestamp(i) >= 100)
            .map(|i| panel.phi(i)[0])
            .collect();
        let expected: Vec<f64> = (0..alone.len()).map(|i| alone.phi(i)[0]).collect();
        assert_eq!(tail, expected);
    }

    #[test]
    fn day_by_day_rejects_long_horizons() {
        let input = normalized("ES", &wiggle(400), Some(vec![0..400]));
        let cfg = TrendConfig::new(vec![Horizon::grid(Frequency::Minute, 7)]);
        assert!(matches!(
            build_panel(&[input], &cfg, PanelMode::DayByDay),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn lag_shifts_response() {
        let values = wiggle(300);
        let input = normalized("X", &values, None);
        let mut cfg = TrendConfig::new(vec![Horizon::grid(Frequency::Minute, 2)]);
        let p0 = build_panel(std::slice::from_ref(&input), &cfg, PanelMode::Continuous).unwrap();
        cfg.lag = 1;
        let p1 = build_panel(&[input], &cfg, PanelMode::Continuous).unwrap();
        assert_eq!(p1.len(), p0.len() - 1);
        for i in 0..p1.len() {
            let t = p1.timestamp(i) as usize;
            assert_eq!(p0.response(i), values[t + 1]);
            assert_eq!(p1.response(i), values[t + 2]);
            assert_eq!(p1.phi(i), p0.phi(i));
        }
    }

    #[test]
    fn rows_sorted_by_time_then_asset() {
        let a = normalized("A", &wiggle(100), None);
        let b = normalized("B", &wiggle(80), None);
        let cfg = TrendConfig::new(vec![
            Horizon::grid(Frequency::Minute, 1),
            Horizon::grid(Frequency::Minute, 2),
        ]);
        let p = build_panel(&[a, b], &cfg, PanelMode::Continuous).unwrap();
        for i in 1..p.len() {
            assert!(
                (p.timestamp(i - 1), p.asset_index(i - 1)) < (p.timestamp(i), p.asset_index(i))
            );
        }
        assert!(p.rows().all(|r| r.phi.iter().all(|v| v.abs() <= 2.5)));
    }

    #[test]
    fn inconsistent_frequencies_rejected() {
        let a = normalized("A", &wiggle(100), None);
        let mut b = normalized("B", &wiggle(100), None);
        b.frequency = Frequency::Daily;
        let cfg = TrendConfig::new(vec![Horizon::grid(Frequency::Minute, 1)]);
        assert!(matches!(
            build_panel(&[a, b], &cfg, PanelMode::Continuous),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn aggregation_of_opposite_columns_is_zero() {
        let meta = PanelMeta {
            frequency: Frequency::Daily,
            columns: vec![
                PanelColumn::Horizon(Horizon::grid(Frequency::Daily, 1)),
                PanelColumn::Horizon(Horizon::grid(Frequency::Daily, 2)),
            ],
            lag: 0,
            mode: PanelMode::Continuous,
            clip_phi: 2.5,
            warmup_multiplier: 5.0,
            clip_stage: "emission".into(),
        };
        let p = Panel::from_rows(
            meta,
            vec!["A".into()],
            vec![(0, 0, vec![1.0, -1.0], 0.3), (1, 0, vec![0.5, 0.5], 0.1)],
        )
        .unwrap();
        let agg = aggregate_scales(&p).unwrap();
        assert_eq!(agg.width(), 1);
        assert_eq!(agg.phi(0), &[0.0]);
        assert_eq!(agg.phi(1), &[0.5]);
        assert_eq!(agg.response(0), 0.3);
    }
}
