//! Trend strength: a unit-variance, exponentially weighted sum of past excess
//! returns with kernel `w(n) = M_T * n * exp(-2n/T)`.
//!
//! The kernel admits an exact two-term recursion, so each horizon costs O(1)
//! per interval. See [`TrendState`].

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::series::{Frequency, NormalizedReturns};

pub const DEFAULT_CLIP_PHI: f64 = 2.5;
pub const DEFAULT_WARMUP_MULTIPLIER: f64 = 5.0;

/// One trend horizon: grid exponent `k` and length in native intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub k: i32,
    pub intervals: f64,
}

impl Horizon {
    /// Grid horizon `k` for a frequency: `2^k` intervals, or `1.5 * 2^k`
    /// months for monthly data.
    pub fn grid(frequency: Frequency, k: i32) -> Self {
        let base = math::powf(2.0, k as f64);
        let intervals = match frequency {
            Frequency::Monthly => 1.5 * base,
            _ => base,
        };
        Self { k, intervals }
    }

    pub fn label(&self) -> alloc::string::String {
        format!("phi_k{}", self.k)
    }
}

/// Default exponent range of the horizon grid for each frequency.
pub fn default_k_range(frequency: Frequency) -> (i32, i32) {
    match frequency {
        Frequency::Minute | Frequency::Daily => (1, 10),
        Frequency::Monthly => (1, 8),
        Frequency::Yearly => (1, 7),
    }
}

pub fn horizon_grid(frequency: Frequency, k_lo: i32, k_hi: i32) -> Vec<Horizon> {
    (k_lo..=k_hi).map(|k| Horizon::grid(frequency, k)).collect()
}

pub fn default_grid(frequency: Frequency) -> Vec<Horizon> {
    let (lo, hi) = default_k_range(frequency);
    horizon_grid(frequency, lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendConfig {
    pub horizons: Vec<Horizon>,
    /// Emitted trend strengths are clipped to `±clip_phi`.
    pub clip_phi: f64,
    /// Continuous series emit nothing during the first `warmup_multiplier * T` intervals.
    pub warmup_multiplier: f64,
    /// Extra intervals between the trend measurement and the response.
    pub lag: usize,
}

impl TrendConfig {
    pub fn new(horizons: Vec<Horizon>) -> Self {
        Self {
            horizons,
            clip_phi: DEFAULT_CLIP_PHI,
            warmup_multiplier: DEFAULT_WARMUP_MULTIPLIER,
            lag: 0,
        }
    }

    pub fn for_frequency(frequency: Frequency) -> Self {
        Self::new(default_grid(frequency))
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() {
            return Err(Error::Config("no trend horizons configured".into()));
        }
        if let Some(h) = self.horizons.iter().find(|h| !(h.intervals >= 2.0)) {
            return Err(Error::Config(format!(
                "trend horizon must be at least 2 intervals, got {}",
                h.intervals
            )));
        }
        if !(self.clip_phi > 0.0) {
            return Err(Error::Config(format!(
                "clip_phi must be positive, got {}",
                self.clip_phi
            )));
        }
        if !(self.warmup_multiplier >= 3.0) {
            return Err(Error::Config(format!(
                "warmup multiplier must be at least 3, got {}",
                self.warmup_multiplier
            )));
        }
        Ok(())
    }

    /// Intervals consumed before a continuous series emits horizon `t`.
    pub fn warmup(&self, t: f64) -> usize {
        math::ceil(self.warmup_multiplier * t) as usize
    }
}

/// Decay per interval, `q = exp(-2/T)`.
pub fn decay(t: f64) -> f64 {
    math::exp(-2.0 / t)
}

/// `M_T` such that `sum_n (M_T n q^n)^2 = 1`, from the closed form
/// `sum_n n^2 p^n = p (1 + p) / (1 - p)^3` with `p = q^2`.
pub fn kernel_normalization(t: f64) -> f64 {
    let p = math::exp(-4.0 / t);
    let one_minus = 1.0 - p;
    1.0 / math::sqrt(p * (1.0 + p) / (one_minus * one_minus * one_minus))
}

/// Normalized kernel weight of the return `n` intervals back.
pub fn kernel_weight(t: f64, n: u64) -> f64 {
    kernel_normalization(t) * n as f64 * math::exp(-2.0 * n as f64 / t)
}

/// Kernel-weighted mean of `n + 1`, equal to `2 / (1 - q)`.
///
/// This is about `T + 1` rather than exactly `T`.
pub fn mean_lookback(t: f64) -> f64 {
    2.0 / (1.0 - decay(t))
}

/// Running state of one horizon.
///
/// With `A(t) = sum_n q^n x(t-n)` and `B(t) = sum_n n q^n x(t-n)`:
/// `B(t) = q (B(t-1) + A(t-1))`, `A(t) = x(t) + q A(t-1)`, and the trend
/// strength is `M_T B(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendState {
    q: f64,
    norm: f64,
    a: f64,
    b: f64,
    count: u64,
}

impl TrendState {
    pub fn new(t: f64) -> Self {
        Self {
            q: decay(t),
            norm: kernel_normalization(t),
            a: 0.0,
            b: 0.0,
            count: 0,
        }
    }

    /// Consumes the excess return of the current interval and returns the
    /// unclipped trend strength at its close.
    #[inline]
    pub fn update(&mut self, excess: f64) -> f64 {
        self.b = self.q * (self.b + self.a);
        self.a = excess + self.q * self.a;
        self.count += 1;
        self.norm * self.b
    }

    #[inline]
    pub fn phi(&self) -> f64 {
        self.norm * self.b
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn reset(&mut self) {
        self.a = 0.0;
        self.b = 0.0;
        self.count = 0;
    }

    /// Sets the state to that of an infinite history of constant excess
    /// return, scaled so that the current trend strength equals `phi`.
    pub fn prime(&mut self, phi: f64) {
        let q = self.q;
        let x = phi * (1.0 - q) * (1.0 - q) / (self.norm * q);
        self.a = x / (1.0 - q);
        self.b = x * q / ((1.0 - q) * (1.0 - q));
    }
}

/// Unclipped trend strength after every interval of `excess`.
pub fn trend_values(excess: &[f64], t: f64) -> Vec<f64> {
    let mut state = TrendState::new(t);
    excess.iter().map(|&x| state.update(x)).collect()
}

/// Clipped trend strengths of one horizon, emitted after the warmup.
///
/// Sessions on `returns` are ignored; the series is treated as continuous.
pub fn trend_series(returns: &NormalizedReturns, t: f64, cfg: &TrendConfig) -> Vec<(i64, f64)> {
    let warmup = cfg.warmup(t);
    if returns.len() <= warmup {
        log::warn!(
            "asset {}: {} returns do not cover the {warmup}-interval warmup of horizon {t}",
            returns.asset_id,
            returns.len()
        );
        return Vec::new();
    }
    let mut state = TrendState::new(t);
    let mut out = Vec::with_capacity(returns.len() - warmup);
    for i in 0..returns.len() {
        let phi = state.update(returns.excess_at(i));
        if i >= warmup {
            out.push((
                returns.values[i].timestamp,
                phi.clamp(-cfg.clip_phi, cfg.clip_phi),
            ));
        }
    }
    out
}
