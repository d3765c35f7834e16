use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::FitData;
use super::qr::solve_gram;
use crate::error::{Error, Result};
use crate::{math, par, rng};

/// Fewest distinct days a day-resampling bootstrap accepts.
pub const MIN_BOOTSTRAP_DAYS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOutput {
    /// Standard deviation of each coefficient across replicates.
    pub stderr: Vec<f64>,
    /// Coefficients of every non-singular replicate, in replicate order.
    pub samples: Vec<Vec<f64>>,
    pub n_effective: usize,
}

/// Resamples whole days with replacement and refits on each replicate.
///
/// A day drawn once contributes every row it holds, across all assets and
/// horizons. Replicate `r` draws from its own random stream, so the output
/// does not depend on the number of worker threads. Replicates whose design
/// is singular are dropped.
pub fn bootstrap(data: &FitData, cfg: &BootstrapConfig) -> Result<BootstrapOutput> {
    if cfg.n_samples < 2 {
        return Err(Error::Config(alloc::format!(
            "bootstrap needs at least 2 samples for a standard error, got {}",
            cfg.n_samples
        )));
    }
    if cfg.n_samples < 100 {
        log::warn!(
            "{} bootstrap samples give unreliable standard errors",
            cfg.n_samples
        );
    }
    let n_days = data.n_days();
    if n_days < MIN_BOOTSTRAP_DAYS {
        return Err(Error::InsufficientData {
            what: "distinct days for the bootstrap",
            needed: MIN_BOOTSTRAP_DAYS,
            got: n_days,
        });
    }
    let m = data.spec().len() + 1;
    let grams: Vec<Vec<f64>> = data.stats().iter().map(|s| s.r.gram()).collect();

    let replicates: Vec<Option<Vec<f64>>> = par::map_indexed(cfg.n_samples, |r| {
        let mut rng = rng::stream(cfg.seed, rng::DOMAIN_BOOTSTRAP, r as u64);
        let mut counts = alloc::vec![0u32; n_days];
        for _ in 0..n_days {
            counts[rng.random_range(0..n_days)] += 1;
        }
        let mut g = alloc::vec![0.0; m * m];
        for (gram, &c) in grams.iter().zip(&counts) {
            if c == 0 {
                continue;
            }
            let c = c as f64;
            for (acc, v) in g.iter_mut().zip(gram) {
                *acc += c * v;
            }
        }
        solve_gram(&g, m)
    });

    let samples: Vec<Vec<f64>> = replicates.into_iter().flatten().collect();
    let n_effective = samples.len();
    if n_effective < cfg.n_samples {
        log::warn!(
            "{} of {} bootstrap replicates were singular and skipped",
            cfg.n_samples - n_effective,
            cfg.n_samples
        );
    }
    if n_effective < 2 {
        return Err(Error::InsufficientData {
            what: "non-singular bootstrap replicates",
            needed: 2,
            got: n_effective,
        });
    }
    let p = m - 1;
    let n = n_effective as f64;
    let stderr = (0..p)
        .map(|j| {
            let mean = samples.iter().map(|s| s[j]).sum::<f64>() / n;
            let var = samples
                .iter()
                .map(|s| (s[j] - mean) * (s[j] - mean))
                .sum::<f64>()
                / (n - 1.0);
            math::sqrt(var)
        })
        .collect();
    Ok(BootstrapOutput {
        stderr,
        samples,
        n_effective,
    })
}
