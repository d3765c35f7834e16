//! Trend persistence and reversion measurement.
//!
//! The crate turns price series into variance-normalized returns, measures
//! exponentially weighted trend strengths on a grid of horizons, and fits
//! polynomial response models with resampling-based inference. A synthetic
//! market generator of the same response process is included so that every
//! stage can be checked against known ground truth.
//!
//! Everything here is pure computation over `alloc` collections. File formats,
//! configuration and the command-line driver live in the `trendlab` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
mod math;
mod par;

pub mod buckets;
pub mod panel;
pub mod regress;
pub mod report;
pub mod rng;
pub mod series;
pub mod simulate;
pub mod trend;

pub use error::{Error, Result};
pub use panel::{build_panel, Panel, PanelColumn, PanelMode};
pub use series::{Frequency, NormalizedReturns, PriceSeries, ReturnsConfig, VolMode};
pub use trend::{Horizon, TrendConfig};
