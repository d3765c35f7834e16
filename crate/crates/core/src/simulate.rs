//! Synthetic markets whose normalized returns follow
//! `R(t+1) = a + sum_T [b phi_T + c phi_T^3 + d phi_T^5 + e sign(phi_T)] + eps`,
//! with each `phi_T` updated by the same recursion the analyzer uses.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Frequency, Observation, PriceSeries};
use crate::trend::{TrendState, DEFAULT_CLIP_PHI};
use crate::{math, par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    Gaussian,
    /// Student-t rescaled to unit variance; needs `dof > 2`.
    StudentT {
        dof: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    /// Horizons whose trend strengths drive the drift; their contributions add.
    pub horizons: Vec<f64>,
    pub n_assets: usize,
    /// Returns per asset; each series has `n_intervals + 1` prices.
    pub n_intervals: usize,
    /// Intervals simulated before the first recorded price.
    pub burn_in: usize,
    pub noise_sigma: f64,
    pub noise: Noise,
    /// Price grid; 0 keeps prices continuous.
    pub tick_size: f64,
    pub initial_price: f64,
    /// Standard deviation of raw log-returns, approximately.
    pub return_vol: f64,
    /// Trend strengths entering the drift are clipped to this bound, as the
    /// analyzer clips them; `None` leaves them unclipped.
    pub drift_clip: Option<f64>,
    pub frequency: Frequency,
    pub start_timestamp: i64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: 0.0,
            horizons: alloc::vec![16.0],
            n_assets: 1,
            n_intervals: 1000,
            burn_in: 0,
            noise_sigma: 1.0,
            noise: Noise::Gaussian,
            tick_size: 0.0,
            initial_price: 100.0,
            return_vol: 0.01,
            drift_clip: Some(DEFAULT_CLIP_PHI),
            frequency: Frequency::Daily,
            start_timestamp: 0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::Config(m));
        if self.horizons.is_empty() || self.horizons.iter().any(|&t| !(t >= 2.0)) {
            return bad(format!(
                "simulation horizons must all be at least 2, got {:?}",
                self.horizons
            ));
        }
        if !(self.noise_sigma > 0.0) {
            return bad(format!(
                "noise_sigma must be positive, got {}",
                self.noise_sigma
            ));
        }
        if let Noise::StudentT { dof } = self.noise {
            if !(dof > 2.0) {
                return bad(format!("student-t noise needs dof > 2, got {dof}"));
            }
        }
        if !(self.initial_price > 0.0) || !(self.return_vol > 0.0) {
            return bad("initial_price and return_vol must be positive".into());
        }
        if !(self.tick_size >= 0.0) {
            return bad(format!(
                "tick_size must be non-negative, got {}",
                self.tick_size
            ));
        }
        if self.n_assets == 0 || self.n_intervals < 2 {
            return bad("need at least one asset and two intervals".into());
        }
        if let Some(clip) = self.drift_clip {
            if !(clip > 0.0) {
                return bad(format!("drift_clip must be positive, got {clip}"));
            }
        }
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
        ] {
            if !v.is_finite() {
                return bad(format!("coefficient {name} is not finite"));
            }
        }
        Ok(())
    }

    pub fn asset_id(&self, asset: usize) -> alloc::string::String {
        format!("SIM{asset:03}")
    }
}

/// One asset's return process, stepped one interval at a time.
#[derive(Debug, Clone)]
pub struct MarketProcess {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    noise_sigma: f64,
    noise: Noise,
    drift_clip: Option<f64>,
    states: Vec<TrendState>,
    rng: ChaCha8Rng,
}

impl MarketProcess {
    pub fn new(cfg: &SimConfig, asset: usize) -> Self {
        Self {
            a: cfg.a,
            b: cfg.b,
            c: cfg.c,
            d: cfg.d,
            e: cfg.e,
            noise_sigma: cfg.noise_sigma,
            noise: cfg.noise,
            drift_clip: cfg.drift_clip,
            states: cfg.horizons.iter().map(|&t| TrendState::new(t)).collect(),
            rng: rng::stream(cfg.seed, rng::DOMAIN_SIMULATE, asset as u64),
        }
    }

    /// Starts every horizon from trend strength `phi`.
    pub fn prime(&mut self, phi: f64) {
        self.states.iter_mut().for_each(|s| s.prime(phi));
    }

    /// Current unclipped trend strengths, one per horizon.
    pub fn phi(&self) -> Vec<f64> {
        self.states.iter().map(TrendState::phi).collect()
    }

    /// Expected next return given the current state.
    pub fn drift(&self) -> f64 {
        let mut drift = self.a;
        for s in &self.states {
            let mut phi = s.phi();
            if let Some(clip) = self.drift_clip {
                phi = phi.clamp(-clip, clip);
            }
            let phi2 = phi * phi;
            drift += phi * (self.b + phi2 * (self.c + phi2 * self.d)) + self.e * math::signum0(phi);
        }
        drift
    }

    fn draw(&mut self) -> f64 {
        match self.noise {
            Noise::Gaussian => self.rng.sample::<f64, _>(StandardNormal),
            Noise::StudentT { dof } => {
                let t: f64 = StudentT::new(dof)
                    .expect("dof validated")
                    .sample(&mut self.rng);
                t * math::sqrt((dof - 2.0) / dof)
            }
        }
    }

    /// Advances one interval and returns the normalized return.
    pub fn step(&mut self) -> f64 {
        let r = self.drift() + self.noise_sigma * self.draw();
        let excess = r - self.a;
        for s in &mut self.states {
            s.update(excess);
        }
        r
    }
}

/// Prices of one asset; asset `i` always draws from the same random stream.
pub fn simulate_asset(cfg: &SimConfig, asset: usize) -> Result<PriceSeries> {
    cfg.validate()?;
    let mut process = MarketProcess::new(cfg, asset);
    for _ in 0..cfg.burn_in {
        process.step();
    }
    let scale = cfg.return_vol / cfg.noise_sigma;
    let mut log_price = math::ln(cfg.initial_price);
    let mut obs = Vec::with_capacity(cfg.n_intervals + 1);
    obs.push(Observation {
        timestamp: cfg.start_timestamp,
        price: cfg.initial_price,
    });
    for i in 1..=cfg.n_intervals {
        log_price += scale * process.step();
        obs.push(Observation {
            timestamp: cfg.start_timestamp + i as i64,
            price: math::exp(log_price),
        });
    }
    let series = PriceSeries::new(cfg.asset_id(asset), cfg.frequency, obs)?;
    if cfg.tick_size > 0.0 {
        apply_tick_grid(&series, cfg.tick_size)
    } else {
        Ok(series)
    }
}

/// All assets, simulated in parallel.
pub fn simulate_market(cfg: &SimConfig) -> Result<Vec<PriceSeries>> {
    cfg.validate()?;
    par::map_indexed(cfg.n_assets, |i| simulate_asset(cfg, i))
        .into_iter()
        .collect()
}

/// Rounds every price to the nearest multiple of `tick_size`, halves up.
pub fn apply_tick_grid(series: &PriceSeries, tick_size: f64) -> Result<PriceSeries> {
    if !(tick_size > 0.0) {
        return Err(Error::Config(format!(
            "tick size must be positive, got {tick_size}"
        )));
    }
    let obs = series
        .observations()
        .iter()
        .map(|o| {
            if tick_size >= o.price {
                return Err(Error::Data(format!(
                    "asset {}: tick size {tick_size} not below price {} at {}",
                    series.asset_id(),
                    o.price,
                    o.timestamp
                )));
            }
            Ok(Observation {
                timestamp: o.timestamp,
                price: math::floor(o.price / tick_size + 0.5) * tick_size,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PriceSeries::new(series.asset_id(), series.frequency(), obs)
}

/// Couplings of `V = b/2 phi^2 - c/4 phi^4 + d/6 phi^6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauParams {
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Potential and force `-dV/dphi`.
///
/// With couplings `(-b, c, -d)` the force equals the drift terms
/// `b phi + c phi^3 + d phi^5` of the response model.
pub fn landau_potential(phi: f64, p: &LandauParams) -> (f64, f64) {
    let phi2 = phi * phi;
    let v = phi2 * (p.b / 2.0 - phi2 * (p.c / 4.0 - phi2 * p.d / 6.0));
    let force = phi * (-p.b + phi2 * (p.c - phi2 * p.d));
    (v, force)
}
