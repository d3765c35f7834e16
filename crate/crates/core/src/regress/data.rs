use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::qr::{Triangular, MAX_WIDTH};
use super::{FitOptions, ModelSpec, Weighting};
use crate::error::{Error, Result};
use crate::panel::Panel;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DayStats {
    pub r: Triangular,
    pub rows: usize,
}

impl DayStats {
    fn new(m: usize) -> Self {
        Self {
            r: Triangular::new(m),
            rows: 0,
        }
    }

    fn merge(&mut self, other: &DayStats) {
        self.r.merge(&other.r);
        self.rows += other.rows;
    }
}

/// Regression sample reduced to one triangular factor per resampling day.
///
/// Every bootstrap replicate and cross-validation fold is a union of whole
/// days, so nothing else about the rows needs to be kept.
#[derive(Debug, Clone, PartialEq)]
pub struct FitData {
    spec: ModelSpec,
    days: Vec<i64>,
    stats: Vec<DayStats>,
    n_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub beta: Vec<f64>,
    pub r2: f64,
    pub sse: f64,
    pub sst: f64,
}

/// Accumulates `(day, phi, response)` rows. Rows are cheapest to add in day
/// order, but any order is accepted.
#[derive(Debug, Clone)]
pub struct FitDataBuilder {
    spec: ModelSpec,
    days: BTreeMap<i64, DayStats>,
    current: Option<(i64, DayStats)>,
}

impl FitDataBuilder {
    pub fn new(spec: &ModelSpec) -> Self {
        Self {
            spec: spec.clone(),
            days: BTreeMap::new(),
            current: None,
        }
    }

    fn width(&self) -> usize {
        self.spec.len() + 1
    }

    #[inline]
    pub fn push(&mut self, day: i64, phi: f64, response: f64) {
        self.push_weighted(day, phi, response, 1.0);
    }

    pub fn push_weighted(&mut self, day: i64, phi: f64, response: f64, weight: f64) {
        if self.current.as_ref().is_none_or(|(d, _)| *d != day) {
            self.flush();
            self.current = Some((day, DayStats::new(self.width())));
        }
        let m = self.width();
        let mut row = [0.0; MAX_WIDTH];
        self.spec.design_row(phi, response, &mut row[..m]);
        if weight != 1.0 {
            let s = crate::math::sqrt(weight);
            row[..m].iter_mut().for_each(|v| *v *= s);
        }
        let (_, stats) = self.current.as_mut().expect("current day set above");
        stats.r.add_row(&mut row[..m]);
        stats.rows += 1;
    }

    fn flush(&mut self) {
        if let Some((day, stats)) = self.current.take() {
            match self.days.get_mut(&day) {
                Some(existing) => existing.merge(&stats),
                None => {
                    self.days.insert(day, stats);
                }
            }
        }
    }

    /// Absorbs another builder for the same spec.
    pub fn merge(&mut self, mut other: FitDataBuilder) {
        debug_assert_eq!(self.spec, other.spec);
        self.flush();
        other.flush();
        for (day, stats) in other.days {
            match self.days.get_mut(&day) {
                Some(existing) => existing.merge(&stats),
                None => {
                    self.days.insert(day, stats);
                }
            }
        }
    }

    pub fn finish(mut self) -> FitData {
        self.flush();
        let n_rows = self.days.values().map(|s| s.rows).sum();
        let (days, stats) = self.days.into_iter().unzip();
        FitData {
            spec: self.spec,
            days,
            stats,
            n_rows,
        }
    }
}

impl FitData {
    /// Regression sample from panel rows; the selected trend columns are
    /// stacked so each contributes one row per panel row.
    pub fn from_panel(panel: &Panel, spec: &ModelSpec, opts: &FitOptions) -> Result<FitData> {
        Self::from_panel_masked(panel, spec, opts, |_| true)
    }

    /// As [`FitData::from_panel`], restricted to rows `i` with `mask(i)`.
    pub fn from_panel_masked<M>(
        panel: &Panel,
        spec: &ModelSpec,
        opts: &FitOptions,
        mask: M,
    ) -> Result<FitData>
    where
        M: Fn(usize) -> bool,
    {
        let columns: Vec<usize> = match &opts.columns {
            Some(c) => c.clone(),
            None => (0..panel.width()).collect(),
        };
        if columns.is_empty() {
            return Err(Error::Config(
                "no trend columns selected for the fit".into(),
            ));
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= panel.width()) {
            return Err(Error::Config(alloc::format!("panel has no column {c}")));
        }
        let keep = |i: usize| {
            mask(i)
                && opts
                    .subgroup
                    .as_ref()
                    .is_none_or(|g| g.matches(panel.asset(i), panel.timestamp(i)))
        };
        let weights = match opts.weighting {
            Weighting::Rows => None,
            Weighting::EqualAsset => {
                let mut counts = alloc::vec![0usize; panel.assets().len()];
                for i in (0..panel.len()).filter(|&i| keep(i)) {
                    counts[panel.asset_index(i) as usize] += 1;
                }
                let total: usize = counts.iter().sum();
                let present = counts.iter().filter(|&&c| c > 0).count();
                Some(
                    counts
                        .iter()
                        .map(|&c| {
                            if c > 0 {
                                total as f64 / (present * c) as f64
                            } else {
                                0.0
                            }
                        })
                        .collect::<Vec<f64>>(),
                )
            }
        };
        let mut builder = FitDataBuilder::new(spec);
        for i in (0..panel.len()).filter(|&i| keep(i)) {
            let phi = panel.phi(i);
            let w = weights
                .as_ref()
                .map_or(1.0, |w| w[panel.asset_index(i) as usize]);
            for &c in &columns {
                builder.push_weighted(panel.day(i), phi[c], panel.response(i), w);
            }
        }
        let data = builder.finish();
        if data.n_rows == 0 {
            return Err(Error::Empty("no panel rows selected for the fit"));
        }
        Ok(data)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn days(&self) -> &[i64] {
        &self.days
    }

    pub(crate) fn stats(&self) -> &[DayStats] {
        &self.stats
    }

    /// Factor of the days in `range` (indices into [`FitData::days`]).
    pub(crate) fn factor_of<I: IntoIterator<Item = usize>>(&self, days: I) -> (Triangular, usize) {
        let mut r = Triangular::new(self.spec.len() + 1);
        let mut rows = 0;
        for d in days {
            r.merge(&self.stats[d].r);
            rows += self.stats[d].rows;
        }
        (r, rows)
    }

    /// Least-squares point estimate on all rows.
    pub fn ols(&self) -> Result<OlsFit> {
        let p = self.spec.len();
        if self.n_rows <= p {
            return Err(Error::InsufficientData {
                what: "rows for the least-squares fit",
                needed: p + 1,
                got: self.n_rows,
            });
        }
        if self.n_rows <= 10 * p {
            log::warn!("only {} rows for {p} features", self.n_rows);
        }
        let (r, _) = self.factor_of(0..self.days.len());
        solve_factor(&r, &self.spec)
    }
}

pub(crate) fn solve_factor(r: &Triangular, spec: &ModelSpec) -> Result<OlsFit> {
    let beta = r.solve().map_err(|j| Error::SingularFit {
        feature: spec.features()[j].as_str(),
    })?;
    let sse = r.residual_ss(&beta);
    let (w, wy) = r.weight_and_response_sum();
    let mut mean_only = alloc::vec![0.0; beta.len()];
    mean_only[0] = wy / w;
    let sst = r.residual_ss(&mean_only);
    let r2 = if sst > 0.0 {
        (1.0 - sse / sst).max(0.0)
    } else {
        0.0
    };
    Ok(OlsFit { beta, r2, sse, sst })
}
