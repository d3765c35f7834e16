//! Horizons in minutes, `sqrt(T / 60)` coefficient rescaling and the joined
//! coefficient-versus-horizon curve across datasets.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::regress::FitResult;
use crate::series::Frequency;
use crate::trend::Horizon;

/// One trading day counts as `2^10` minutes.
pub const MINUTES_PER_TRADING_DAY: f64 = 1024.0;
pub const TRADING_DAYS_PER_YEAR: f64 = 260.0;
/// Horizon, in minutes, at which rescaled coefficients equal raw ones.
pub const REFERENCE_MINUTES: f64 = 60.0;

pub fn horizon_to_minutes(frequency: Frequency, t: f64) -> f64 {
    match frequency {
        Frequency::Minute => t,
        Frequency::Daily => MINUTES_PER_TRADING_DAY * t,
        Frequency::Monthly => MINUTES_PER_TRADING_DAY * (TRADING_DAYS_PER_YEAR / 12.0) * t,
        Frequency::Yearly => MINUTES_PER_TRADING_DAY * TRADING_DAYS_PER_YEAR * t,
    }
}

pub fn rescale_factor(t_minutes: f64) -> f64 {
    math::sqrt(t_minutes / REFERENCE_MINUTES)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledCoefficient {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

impl ScaledCoefficient {
    pub fn t(&self) -> Option<f64> {
        self.stderr.map(|s| self.value / s)
    }
}

/// Every coefficient and its standard error times `sqrt(T_minutes / 60)`.
pub fn rescale_coefficients(fit: &FitResult, t_minutes: f64) -> Vec<ScaledCoefficient> {
    let f = rescale_factor(t_minutes);
    fit.coefficients
        .iter()
        .map(|c| ScaledCoefficient {
            name: c.name().into(),
            value: c.value * f,
            stderr: c.stderr.map(|s| s * f),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetTag {
    Intraday,
    Daily,
    Monthly,
    Yearly,
}

impl DatasetTag {
    pub fn for_frequency(frequency: Frequency) -> Self {
        match frequency {
            Frequency::Minute => DatasetTag::Intraday,
            Frequency::Daily => DatasetTag::Daily,
            Frequency::Monthly => DatasetTag::Monthly,
            Frequency::Yearly => DatasetTag::Yearly,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetTag::Intraday => "intraday",
            DatasetTag::Daily => "daily",
            DatasetTag::Monthly => "monthly",
            DatasetTag::Yearly => "yearly",
        }
    }
}

impl fmt::Display for DatasetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub dataset: DatasetTag,
    pub t_minutes: f64,
    pub coef: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

/// Coefficients of several datasets on one horizon axis, sorted by minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonCurve {
    pub points: Vec<CurvePoint>,
    pub rescaled: bool,
}

impl HorizonCurve {
    /// Applies the `sqrt(T / 60)` rescaling; refuses to do so twice.
    pub fn rescale(&mut self) -> Result<()> {
        if self.rescaled {
            return Err(Error::Config("curve is already rescaled".into()));
        }
        for p in &mut self.points {
            let f = rescale_factor(p.t_minutes);
            p.value *= f;
            p.stderr = p.stderr.map(|s| s * f);
        }
        self.rescaled = true;
        Ok(())
    }

    /// Points of one coefficient, in horizon order.
    pub fn coefficient<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a CurvePoint> + 'a {
        self.points.iter().filter(move |p| p.coef == name)
    }
}

/// Per-horizon fits of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFits {
    pub dataset: DatasetTag,
    pub frequency: Frequency,
    pub fits: Vec<(Horizon, FitResult)>,
}

/// Joins per-horizon fits into one curve. Overlapping horizons of different
/// datasets are all kept; the same horizon twice within a dataset is an error.
pub fn assemble_curve(inputs: &[DatasetFits], rescale: bool) -> Result<HorizonCurve> {
    if inputs.iter().all(|d| d.fits.is_empty()) {
        return Err(Error::Empty("no fits to assemble into a curve"));
    }
    let mut keyed: Vec<(f64, DatasetTag, usize, CurvePoint)> = Vec::new();
    let mut seen: Vec<(DatasetTag, f64)> = Vec::new();
    for set in inputs {
        for (h, fit) in &set.fits {
            let t_minutes = horizon_to_minutes(set.frequency, h.intervals);
            if !(t_minutes > 0.0) {
                return Err(Error::Config(format!(
                    "horizon {} is not positive",
                    h.intervals
                )));
            }
            if seen.contains(&(set.dataset, t_minutes)) {
                return Err(Error::Duplicate(format!(
                    "{} fit at T = {} minutes",
                    set.dataset, t_minutes
                )));
            }
            seen.push((set.dataset, t_minutes));
            for c in &fit.coefficients {
                keyed.push((
                    t_minutes,
                    set.dataset,
                    c.feature as usize,
                    CurvePoint {
                        dataset: set.dataset,
                        t_minutes,
                        coef: c.name().into(),
                        value: c.value,
                        stderr: c.stderr,
                    },
                ));
            }
        }
    }
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut curve = HorizonCurve {
        points: keyed.into_iter().map(|k| k.3).collect(),
        rescaled: false,
    };
    if rescale {
        curve.rescale()?;
    }
    Ok(curve)
}

/// `x` with six significant digits; scientific notation outside `[1e-4, 1e6)`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = math::floor(libm::log10(x.abs())) as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // A round-up such as 9.999996 -> 10.00000 gains a digit.
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded.abs() >= libm::pow(10.0, (mag + 1) as f64) && decimals > 0 {
        return format!("{x:.prec$}", prec = decimals - 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::{Coefficient, Feature, Model, ModelSpec};

    fn fit(b: f64, se: f64) -> FitResult {
        FitResult {
            spec: ModelSpec::model(Model::Linear),
            coefficients: alloc::vec![
                Coefficient {
                    feature: Feature::Const,
                    value: 0.001,
                    stderr: Some(0.002),
                    t: Some(0.5)
                },
                Coefficient {
                    feature: Feature::Phi,
                    value: b,
                    stderr: Some(se),
                    t: Some(b / se)
                },
            ],
            r2_bp: 1.0,
            r2_adj_bp: None,
            n_rows: 100,
            n_days: 100,
            n_bootstrap: 100,
            seed: Some(1),
        }
    }

    #[test]
    fn minutes_conversion() {
        assert_eq!(horizon_to_minutes(Frequency::Daily, 1.0), 1024.0);
        assert_eq!(horizon_to_minutes(Frequency::Monthly, 12.0), 266_240.0);
        assert_eq!(horizon_to_minutes(Frequency::Yearly, 2.0), 532_480.0);
        assert_eq!(
            horizon_to_minutes(Frequency::Minute, 1024.0),
            horizon_to_minutes(Frequency::Daily, 1.0)
        );
    }

    #[test]
    fn rescale_example() {
        let r = rescale_coefficients(
            &fit(0.0129, 0.0043),
            horizon_to_minutes(Frequency::Daily, 256.0),
        );
        assert!((r[1].value - 0.853).abs() < 5e-4, "{}", r[1].value);
        let same = rescale_coefficients(&fit(0.0129, 0.0043), 60.0);
        assert_eq!(same[1].value, 0.0129);
    }

    #[test]
    fn curve_order_duplicates_and_single_rescale() {
        let intraday = DatasetFits {
            dataset: DatasetTag::Intraday,
            frequency: Frequency::Minute,
            fits: alloc::vec![(Horizon::grid(Frequency::Minute, 10), fit(0.01, 0.005))],
        };
        let daily = DatasetFits {
            dataset: DatasetTag::Daily,
            frequency: Frequency::Daily,
            fits: alloc::vec![(Horizon::grid(Frequency::Daily, 1), fit(0.02, 0.005))],
        };
        let mut curve = assemble_curve(&[daily.clone(), intraday.clone()], false).unwrap();
        let b: Vec<f64> = curve.coefficient("b").map(|p| p.t_minutes).collect();
        assert_eq!(b, [1024.0, 2048.0]);
        curve.rescale().unwrap();
        assert!(curve.rescale().is_err());
        assert!(matches!(
            assemble_curve(&[daily.clone(), daily], false),
            Err(Error::Duplicate(_))
        ));
        assert!(assemble_curve(&[], false).is_err());
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig(0.853_040_1), "0.853040");
        assert_eq!(format_sig(1234.5678), "1234.57");
        assert_eq!(format_sig(-0.0062), "-0.00620000");
        assert_eq!(format_sig(266_240.0), "266240");
        assert_eq!(format_sig(9.999_999_9), "10.0000");
        assert_eq!(format_sig(1.5e-7), "1.50000e-7");
    }
}
