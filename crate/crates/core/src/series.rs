//! Price series, normalized log-returns and trading-day segmentation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

pub const MINUTES_PER_CALENDAR_DAY: i64 = 1440;

/// Number of raw returns whose sample variance seeds the EWMA volatility.
pub const EWMA_SEED_RETURNS: usize = 12;

pub const DEFAULT_CLIP_SIGMA: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Minute,
    Daily,
    Monthly,
    Yearly,
}

impl Frequency {
    pub const ALL: [Frequency; 4] = [
        Frequency::Minute,
        Frequency::Daily,
        Frequency::Monthly,
        Frequency::Yearly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Minute => "minute",
            Frequency::Daily => "daily",
            Frequency::Monthly => "monthly",
            Frequency::Yearly => "yearly",
        }
    }

    /// Resampling unit of a timestamp: the calendar day for minute data,
    /// the observation itself for coarser frequencies.
    pub fn day_of(self, timestamp: i64) -> i64 {
        match self {
            Frequency::Minute => timestamp.div_euclid(MINUTES_PER_CALENDAR_DAY),
            _ => timestamp,
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "minute" => Ok(Frequency::Minute),
            "daily" => Ok(Frequency::Daily),
            "monthly" => Ok(Frequency::Monthly),
            "yearly" => Ok(Frequency::Yearly),
            other => Err(Error::Config(format!("unknown frequency `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub timestamp: i64,
    pub price: f64,
}

/// Timestamped prices of one asset at one frequency.
///
/// Timestamps are integer minutes, days, months or years since the epoch,
/// depending on the frequency, and strictly increasing. Prices are positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    asset_id: String,
    frequency: Frequency,
    observations: Vec<Observation>,
}

impl PriceSeries {
    pub fn new(
        asset_id: impl Into<String>,
        frequency: Frequency,
        observations: Vec<Observation>,
    ) -> Result<Self> {
        let asset_id = asset_id.into();
        for (i, obs) in observations.iter().enumerate() {
            if !(obs.price > 0.0) || !obs.price.is_finite() {
                return Err(Error::Data(format!(
                    "asset {asset_id}: non-positive or non-finite price {} at timestamp {}",
                    obs.price, obs.timestamp
                )));
            }
            if i > 0 && observations[i - 1].timestamp >= obs.timestamp {
                return Err(Error::Data(format!(
                    "asset {asset_id}: timestamps not strictly increasing at {}",
                    obs.timestamp
                )));
            }
        }
        Ok(Self {
            asset_id,
            frequency,
            observations,
        })
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn into_observations(self) -> Vec<Observation> {
        self.observations
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPoint {
    pub timestamp: i64,
    pub value: f64,
}

/// Raw log-returns of one asset, optionally partitioned into sessions.
///
/// `sessions`, when present, are contiguous index ranges into `points`; trend
/// state is reset at every session start when building day-by-day panels.
#[derive(Debug, Clone, PartialEq)]
pub struct LogReturns {
    pub asset_id: String,
    pub frequency: Frequency,
    pub points: Vec<ReturnPoint>,
    pub sessions: Option<Vec<Range<usize>>>,
}

/// `r(t) = ln(P(t) / P(t-1))`, stamped with the later timestamp. Gaps between
/// timestamps are treated as adjacent intervals.
pub fn log_returns(series: &PriceSeries) -> LogReturns {
    let points = series
        .observations
        .windows(2)
        .map(|w| ReturnPoint {
            timestamp: w[1].timestamp,
            value: math::ln(w[1].price / w[0].price),
        })
        .collect();
    LogReturns {
        asset_id: series.asset_id.clone(),
        frequency: series.frequency,
        points,
        sessions: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VolMode {
    /// Mean and population standard deviation over the whole sample.
    FullSample,
    /// Exponentially weighted variance with the given half-life in intervals.
    Ewma { half_life: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnsConfig {
    pub vol_mode: VolMode,
    /// Returns further than `clip_sigma` standard deviations from the mean are
    /// clipped to that boundary.
    pub clip_sigma: f64,
    /// Assets whose volatility falls below this level are rejected as degenerate.
    pub min_sigma: Option<f64>,
}

impl Default for ReturnsConfig {
    fn default() -> Self {
        Self {
            vol_mode: VolMode::FullSample,
            clip_sigma: DEFAULT_CLIP_SIGMA,
            min_sigma: None,
        }
    }
}

impl ReturnsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_sigma > 0.0) {
            return Err(Error::Config(format!(
                "clip_sigma must be positive, got {}",
                self.clip_sigma
            )));
        }
        if let VolMode::Ewma { half_life } = self.vol_mode {
            if !(half_life > 0.0) || !half_life.is_finite() {
                return Err(Error::Config(format!(
                    "ewma half-life must be positive, got {half_life}"
                )));
            }
        }
        Ok(())
    }
}

/// Volatility used to normalize each emitted return.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma {
    Constant(f64),
    /// One value per emitted return, estimated from strictly earlier returns.
    Ewma(Vec<f64>),
}

impl Sigma {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Sigma::Constant(s) => *s,
            Sigma::Ewma(v) => v[i],
        }
    }
}

/// Clipped, variance-normalized log-returns `R = r / sigma`.
///
/// `mu` is the per-interval arithmetic mean of raw log-returns used for both
/// clipping and the excess returns `R - mu / sigma` that feed the trend
/// recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedReturns {
    pub asset_id: String,
    pub frequency: Frequency,
    pub values: Vec<ReturnPoint>,
    pub mu: f64,
    pub sigma: Sigma,
    pub clip_sigma: f64,
    pub sessions: Option<Vec<Range<usize>>>,
}

impl NormalizedReturns {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Normalized risk premium `mu / sigma` at index `i`.
    pub fn drift_at(&self, i: usize) -> f64 {
        self.mu / self.sigma.at(i)
    }

    pub fn excess_at(&self, i: usize) -> f64 {
        self.values[i].value - self.drift_at(i)
    }

    pub fn excess(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.excess_at(i)).collect()
    }
}

/// Load-time normalization: log-returns of `series`, then [`normalize`].
pub fn compute_returns(series: &PriceSeries, cfg: &ReturnsConfig) -> Result<NormalizedReturns> {
    if series.len() < 3 {
        return Err(Error::InsufficientData {
            what: "observations",
            needed: 3,
            got: series.len(),
        });
    }
    normalize(&log_returns(series), cfg)
}

pub fn normalize(raw: &LogReturns, cfg: &ReturnsConfig) -> Result<NormalizedReturns> {
    normalize_masked(raw, cfg, |_| true)
}

/// Normalizes `raw` with `mu` and (full-sample) `sigma` estimated only from the
/// points for which `include` returns true. Used to keep validation folds out
/// of the estimates during cross-validation.
pub fn normalize_masked<F>(
    raw: &LogReturns,
    cfg: &ReturnsConfig,
    include: F,
) -> Result<NormalizedReturns>
where
    F: Fn(usize) -> bool,
{
    cfg.validate()?;
    let n_used = (0..raw.points.len()).filter(|&i| include(i)).count();
    if n_used < 2 {
        return Err(Error::InsufficientData {
            what: "returns",
            needed: 2,
            got: n_used,
        });
    }
    let mu = (0..raw.points.len())
        .filter(|&i| include(i))
        .map(|i| raw.points[i].value)
        .sum::<f64>()
        / n_used as f64;
    let degenerate = |reason: String| Error::Degenerate {
        asset: raw.asset_id.clone(),
        reason,
    };

    match cfg.vol_mode {
        VolMode::FullSample => {
            let (mut var, mut ms) = (0.0, 0.0);
            for i in (0..raw.points.len()).filter(|&i| include(i)) {
                let r = raw.points[i].value;
                var += (r - mu) * (r - mu);
                ms += r * r;
            }
            var /= n_used as f64;
            ms /= n_used as f64;
            let sigma = math::sqrt(var);
            check_sigma(sigma, math::sqrt(ms), cfg.min_sigma).map_err(degenerate)?;
            let values = raw
                .points
                .iter()
                .map(|p| ReturnPoint {
                    timestamp: p.timestamp,
                    value: clip_return(p.value, mu, sigma, cfg.clip_sigma) / sigma,
                })
                .collect();
            Ok(NormalizedReturns {
                asset_id: raw.asset_id.clone(),
                frequency: raw.frequency,
                values,
                mu,
                sigma: Sigma::Constant(sigma),
                clip_sigma: cfg.clip_sigma,
                sessions: raw.sessions.clone(),
            })
        }
        VolMode::Ewma { half_life } => {
            let n = raw.points.len();
            if n <= EWMA_SEED_RETURNS {
                return Err(Error::InsufficientData {
                    what: "returns for ewma seeding",
                    needed: EWMA_SEED_RETURNS + 1,
                    got: n,
                });
            }
            let seed = &raw.points[..EWMA_SEED_RETURNS];
            let seed_mean = seed.iter().map(|p| p.value).sum::<f64>() / EWMA_SEED_RETURNS as f64;
            let mut var = seed
                .iter()
                .map(|p| (p.value - seed_mean) * (p.value - seed_mean))
                .sum::<f64>()
                / (EWMA_SEED_RETURNS - 1) as f64;
            let decay = math::powf(2.0, -1.0 / half_life);
            let rms =
                math::sqrt(raw.points.iter().map(|p| p.value * p.value).sum::<f64>() / n as f64);

            let mut values = Vec::with_capacity(n - EWMA_SEED_RETURNS);
            let mut sigmas = Vec::with_capacity(n - EWMA_SEED_RETURNS);
            for p in &raw.points[EWMA_SEED_RETURNS..] {
                let sigma = math::sqrt(var);
                check_sigma(sigma, rms, cfg.min_sigma)
                    .map_err(|r| degenerate(format!("{r} at timestamp {}", p.timestamp)))?;
                let r = clip_return(p.value, mu, sigma, cfg.clip_sigma);
                values.push(ReturnPoint {
                    timestamp: p.timestamp,
                    value: r / sigma,
                });
                sigmas.push(sigma);
                // Deviations from the seed mean keep sigma(t) free of later returns.
                var = decay * var + (1.0 - decay) * (r - seed_mean) * (r - seed_mean);
            }
            let sessions = raw.sessions.as_ref().map(|s| {
                s.iter()
                    .filter_map(|r| {
                        let start = r.start.max(EWMA_SEED_RETURNS) - EWMA_SEED_RETURNS;
                        let end = r.end.max(EWMA_SEED_RETURNS) - EWMA_SEED_RETURNS;
                        (end > start).then_some(start..end)
                    })
                    .collect()
            });
            Ok(NormalizedReturns {
                asset_id: raw.asset_id.clone(),
                frequency: raw.frequency,
                values,
                mu,
                sigma: Sigma::Ewma(sigmas),
                clip_sigma: cfg.clip_sigma,
                sessions,
            })
        }
    }
}

fn check_sigma(sigma: f64, rms: f64, min_sigma: Option<f64>) -> core::result::Result<(), String> {
    // Relative floor: constant returns leave round-off sized variance.
    if !(sigma > 1e-10 * rms) || !sigma.is_finite() {
        return Err("zero return variance".to_string());
    }
    if let Some(floor) = min_sigma {
        if sigma < floor {
            return Err(format!("volatility {sigma} below minimum {floor}"));
        }
    }
    Ok(())
}

/// Ceiling/floor at `mu ± clip_sigma * sigma`. Idempotent.
pub fn clip_return(r: f64, mu: f64, sigma: f64, clip_sigma: f64) -> f64 {
    let bound = clip_sigma * sigma;
    r.clamp(mu - bound, mu + bound)
}

/// Trading session as minutes after midnight, `[open, close)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub open: u32,
    pub close: u32,
}

impl Session {
    pub fn new(open: u32, close: u32) -> Result<Self> {
        if open >= close || close > MINUTES_PER_CALENDAR_DAY as u32 {
            return Err(Error::Config(format!(
                "session must satisfy open < close <= 24:00, got {open}..{close} minutes"
            )));
        }
        Ok(Self { open, close })
    }

    pub fn contains(&self, timestamp: i64) -> bool {
        let minute = timestamp.rem_euclid(MINUTES_PER_CALENDAR_DAY) as u32;
        minute >= self.open && minute < self.close
    }
}

/// Intraday returns of one session with the first-minute return removed.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingDaySegment {
    pub asset_id: String,
    /// Days since the epoch.
    pub date: i64,
    pub returns: Vec<ReturnPoint>,
}

/// Result of [`split_trading_days`].
///
/// `segments` plus `excluded` (overnight and first-minute returns, and the
/// returns of skipped sessions) partition the continuous in-session return
/// stream.
#[derive(Debug, Clone, PartialEq)]
pub struct DaySplit {
    pub asset_id: String,
    pub segments: Vec<TradingDaySegment>,
    pub excluded: Vec<ReturnPoint>,
    pub skipped_days: Vec<i64>,
}

impl DaySplit {
    /// All in-session returns in time order, overnight returns reinstated.
    pub fn continuous(&self) -> LogReturns {
        let mut points: Vec<ReturnPoint> = self
            .segments
            .iter()
            .flat_map(|s| s.returns.iter().copied())
            .chain(self.excluded.iter().copied())
            .collect();
        points.sort_by_key(|p| p.timestamp);
        LogReturns {
            asset_id: self.asset_id.clone(),
            frequency: Frequency::Minute,
            points,
            sessions: None,
        }
    }

    /// Segment returns concatenated, with one session range per segment.
    pub fn day_by_day(&self) -> LogReturns {
        let mut points = Vec::new();
        let mut sessions = Vec::with_capacity(self.segments.len());
        for seg in &self.segments {
            let start = points.len();
            points.extend_from_slice(&seg.returns);
            sessions.push(start..points.len());
        }
        LogReturns {
            asset_id: self.asset_id.clone(),
            frequency: Frequency::Minute,
            points,
            sessions: Some(sessions),
        }
    }
}

/// Breaks a minute series into one segment per trading session.
///
/// Prices outside `session` are discarded. Within each day the first return is
/// dropped; the return spanning two days is overnight. Both are kept in
/// [`DaySplit::excluded`]. Days left without returns are skipped with a warning.
pub fn split_trading_days(series: &PriceSeries, session: Session) -> Result<DaySplit> {
    if series.frequency != Frequency::Minute {
        return Err(Error::Config(format!(
            "trading-day segmentation needs minute data, got {}",
            series.frequency
        )));
    }
    let prices: Vec<Observation> = series
        .observations
        .iter()
        .copied()
        .filter(|o| session.contains(o.timestamp))
        .collect();

    let mut split = DaySplit {
        asset_id: series.asset_id.clone(),
        segments: Vec::new(),
        excluded: Vec::new(),
        skipped_days: Vec::new(),
    };
    let mut start = 0;
    while start < prices.len() {
        let date = Frequency::Minute.day_of(prices[start].timestamp);
        let mut end = start + 1;
        while end < prices.len() && Frequency::Minute.day_of(prices[end].timestamp) == date {
            end += 1;
        }
        if start > 0 {
            split
                .excluded
                .push(point(&prices[start - 1], &prices[start]));
        }
        let mut returns: Vec<ReturnPoint> = prices[start..end]
            .windows(2)
            .map(|w| point(&w[0], &w[1]))
            .collect();
        if !returns.is_empty() {
            split.excluded.push(returns.remove(0));
        }
        if returns.is_empty() {
            log::warn!(
                "asset {}: empty session on day {date}, skipped",
                series.asset_id
            );
            split.skipped_days.push(date);
        } else {
            split.segments.push(TradingDaySegment {
                asset_id: series.asset_id.clone(),
                date,
                returns,
            });
        }
        start = end;
    }
    split.excluded.sort_by_key(|p| p.timestamp);
    Ok(split)
}

fn point(prev: &Observation, next: &Observation) -> ReturnPoint {
    ReturnPoint {
        timestamp: next.timestamp,
        value: math::ln(next.price / prev.price),
    }
}
