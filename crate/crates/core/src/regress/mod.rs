//! Polynomial response models in the trend strength, fitted by least squares
//! with day-resampled standard errors and blocked cross-validation.

mod bootstrap;
mod cv;
mod data;
mod qr;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::panel::Panel;
use crate::series::Session;
use crate::trend::Horizon;

pub use bootstrap::{bootstrap, BootstrapConfig, BootstrapOutput, MIN_BOOTSTRAP_DAYS};
pub use cv::{cross_validate, cross_validate_series, SeriesCvInput};
pub use data::{FitData, FitDataBuilder, OlsFit};

/// Bootstrap replicates used by default for daily and intraday data.
pub const DEFAULT_BOOTSTRAP_SAMPLES: usize = 5000;
/// Bootstrap replicates used by default for monthly and yearly data.
pub const DEFAULT_BOOTSTRAP_SAMPLES_COARSE: usize = 500;
pub const DEFAULT_FOLDS_DAILY: usize = 15;
pub const DEFAULT_FOLDS_INTRADAY: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Const,
    Phi,
    Phi2,
    Phi3,
    Phi4,
    Phi5,
    SignPhi,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::Const,
        Feature::Phi,
        Feature::Phi2,
        Feature::Phi3,
        Feature::Phi4,
        Feature::Phi5,
        Feature::SignPhi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Const => "const",
            Feature::Phi => "phi",
            Feature::Phi2 => "phi2",
            Feature::Phi3 => "phi3",
            Feature::Phi4 => "phi4",
            Feature::Phi5 => "phi5",
            Feature::SignPhi => "sign_phi",
        }
    }

    /// Coefficient name in the response model
    /// `a + b phi + c2 phi^2 + c phi^3 + c4 phi^4 + d phi^5 + e sign(phi)`.
    pub fn coefficient(self) -> &'static str {
        match self {
            Feature::Const => "a",
            Feature::Phi => "b",
            Feature::Phi2 => "c2",
            Feature::Phi3 => "c",
            Feature::Phi4 => "c4",
            Feature::Phi5 => "d",
            Feature::SignPhi => "e",
        }
    }

    /// True for features odd in `phi`.
    pub fn is_odd(self) -> bool {
        matches!(
            self,
            Feature::Phi | Feature::Phi3 | Feature::Phi5 | Feature::SignPhi
        )
    }

    #[inline]
    pub fn eval(self, phi: f64) -> f64 {
        match self {
            Feature::Const => 1.0,
            Feature::Phi => phi,
            Feature::Phi2 => phi * phi,
            Feature::Phi3 => math::powi(phi, 3),
            Feature::Phi4 => math::powi(phi, 4),
            Feature::Phi5 => math::powi(phi, 5),
            Feature::SignPhi => math::signum0(phi),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Feature::ALL
            .into_iter()
            .find(|f| f.as_str() == s || f.coefficient() == s)
            .or(match s {
                "sign" => Some(Feature::SignPhi),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown feature `{s}`")))
    }
}

/// Named feature sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Linear,
    Cubic,
    /// Odd quintic plus the sign term.
    Quintic,
    /// All powers up to five.
    General,
}

impl Model {
    pub fn features(self) -> &'static [Feature] {
        use Feature::*;
        match self {
            Model::Linear => &[Const, Phi],
            Model::Cubic => &[Const, Phi, Phi3],
            Model::Quintic => &[Const, Phi, Phi3, Phi5, SignPhi],
            Model::General => &[Const, Phi, Phi2, Phi3, Phi4, Phi5],
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(Model::Linear),
            "cubic" => Ok(Model::Cubic),
            "quintic" => Ok(Model::Quintic),
            "general" => Ok(Model::General),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Ordered feature set; the constant always comes first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Feature>", into = "Vec<Feature>")]
pub struct ModelSpec {
    features: Vec<Feature>,
}

impl ModelSpec {
    /// The constant is prepended when missing; duplicates are an error.
    pub fn new(features: impl IntoIterator<Item = Feature>) -> Result<Self> {
        let mut out = alloc::vec![Feature::Const];
        for f in features {
            if f == Feature::Const {
                continue;
            }
            if out.contains(&f) {
                return Err(Error::Config(format!("feature `{f}` listed twice")));
            }
            out.push(f);
        }
        if out.len() < 2 {
            return Err(Error::Config(
                "model needs at least one trend feature".into(),
            ));
        }
        Ok(Self { features: out })
    }

    pub fn model(model: Model) -> Self {
        Self {
            features: model.features().to_vec(),
        }
    }

    /// Comma-separated feature or coefficient names, e.g. `phi,phi3` or `b,c`.
    pub fn parse_list(list: &str) -> Result<Self> {
        let features = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Feature::from_str)
            .collect::<Result<Vec<_>>>()?;
        Self::new(features)
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, f: Feature) -> bool {
        self.features.contains(&f)
    }

    pub fn with(&self, extra: &[Feature]) -> Result<Self> {
        Self::new(self.features.iter().chain(extra).copied())
    }

    pub fn without(&self, f: Feature) -> Result<Self> {
        Self::new(self.features.iter().copied().filter(|&g| g != f))
    }

    /// Writes the design row of `phi` followed by `y` into `out`.
    #[inline]
    pub(crate) fn design_row(&self, phi: f64, y: f64, out: &mut [f64]) {
        for (slot, f) in out.iter_mut().zip(&self.features) {
            *slot = f.eval(phi);
        }
        out[self.features.len()] = y;
    }
}

impl TryFrom<Vec<Feature>> for ModelSpec {
    type Error = Error;

    fn try_from(v: Vec<Feature>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ModelSpec> for Vec<Feature> {
    fn from(s: ModelSpec) -> Self {
        s.features
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, feat) in self.features.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(feat.as_str())?;
        }
        Ok(())
    }
}

/// Row filter by asset membership and, for intraday data, time of day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subgroup {
    pub name: String,
    pub assets: Option<Vec<String>>,
    pub window: Option<Session>,
}

impl Subgroup {
    pub fn matches(&self, asset: &str, timestamp: i64) -> bool {
        self.assets
            .as_ref()
            .is_none_or(|a| a.iter().any(|x| x == asset))
            && self.window.is_none_or(|w| w.contains(timestamp))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Every row counts once, so long histories dominate.
    #[default]
    Rows,
    /// Rows are reweighted so that every asset carries the same total weight.
    EqualAsset,
}

/// How panel rows become regression samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Trend columns stacked into one pooled sample; `None` means all.
    pub columns: Option<Vec<usize>>,
    pub subgroup: Option<Subgroup>,
    pub weighting: Weighting,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitConfig {
    pub bootstrap: Option<BootstrapConfig>,
    /// Contiguous day-block folds for the out-of-sample R^2.
    pub folds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub feature: Feature,
    pub value: f64,
    /// Standard deviation across bootstrap replicates.
    pub stderr: Option<f64>,
    pub t: Option<f64>,
}

impl Coefficient {
    pub fn name(&self) -> &'static str {
        self.feature.coefficient()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub coefficients: Vec<Coefficient>,
    /// In-sample R^2 in basis points.
    pub r2_bp: f64,
    /// Pooled out-of-sample R^2 in basis points; may be negative.
    pub r2_adj_bp: Option<f64>,
    pub n_rows: usize,
    pub n_days: usize,
    pub n_bootstrap: usize,
    pub seed: Option<u64>,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name() == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.coefficient(name).map(|c| c.value)
    }
}

/// Point estimate, then optionally bootstrap errors and cross-validation.
pub fn fit(data: &FitData, cfg: &FitConfig) -> Result<FitResult> {
    fit_with_samples(data, cfg).map(|(f, _)| f)
}

/// As [`fit`], also handing back the bootstrap replicates.
pub fn fit_with_samples(
    data: &FitData,
    cfg: &FitConfig,
) -> Result<(FitResult, Option<BootstrapOutput>)> {
    let ols = data.ols()?;
    let mut coefficients: Vec<Coefficient> = data
        .spec()
        .features()
        .iter()
        .zip(&ols.beta)
        .map(|(&feature, &value)| Coefficient {
            feature,
            value,
            stderr: None,
            t: None,
        })
        .collect();
    let mut n_bootstrap = 0;
    let mut replicates = None;
    if let Some(bcfg) = &cfg.bootstrap {
        let out = bootstrap(data, bcfg)?;
        n_bootstrap = out.n_effective;
        for (c, &se) in coefficients.iter_mut().zip(&out.stderr) {
            c.stderr = Some(se);
            c.t = Some(c.value / se);
        }
        replicates = Some(out);
    }
    let r2_adj_bp = cfg.folds.map(|k| cross_validate(data, k)).transpose()?;
    let result = FitResult {
        spec: data.spec().clone(),
        coefficients,
        r2_bp: ols.r2 * 1e4,
        r2_adj_bp,
        n_rows: data.n_rows(),
        n_days: data.n_days(),
        n_bootstrap,
        seed: cfg.bootstrap.map(|b| b.seed),
    };
    Ok((result, replicates))
}

/// Least-squares fit of `spec` on the panel, without resampling.
pub fn ols_fit(panel: &Panel, spec: &ModelSpec, opts: &FitOptions) -> Result<FitResult> {
    fit(
        &FitData::from_panel(panel, spec, opts)?,
        &FitConfig::default(),
    )
}

/// Per-horizon feature selection: `base` minus each dropped feature from its
/// grid exponent onwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecTemplate {
    pub base: ModelSpec,
    pub drop_from_k: Vec<(Feature, i32)>,
}

impl SpecTemplate {
    pub fn uniform(base: ModelSpec) -> Self {
        Self {
            base,
            drop_from_k: Vec::new(),
        }
    }

    pub fn spec_for(&self, k: i32) -> Result<ModelSpec> {
        let mut spec = self.base.clone();
        for &(f, from) in &self.drop_from_k {
            if k >= from && spec.contains(f) {
                spec = spec.without(f)?;
            }
        }
        Ok(spec)
    }
}

/// Independent fit for every horizon column; failures stay per horizon.
pub fn fit_by_horizon(
    panel: &Panel,
    template: &SpecTemplate,
    opts: &FitOptions,
    cfg: &FitConfig,
) -> Vec<(Horizon, Result<FitResult>)> {
    panel
        .columns()
        .iter()
        .enumerate()
        .filter_map(|(c, col)| col.horizon().map(|h| (c, h)))
        .map(|(c, h)| {
            let result = template.spec_for(h.k).and_then(|spec| {
                let opts = FitOptions {
                    columns: Some(alloc::vec![c]),
                    ..opts.clone()
                };
                fit(&FitData::from_panel(panel, &spec, &opts)?, cfg)
            });
            if let Err(e) = &result {
                log::warn!("horizon k={}: {e}", h.k);
            }
            (h, result)
        })
        .collect()
}
