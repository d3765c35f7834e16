//! Named experiment presets: published coefficient values and the matching
//! data, grid and model defaults, as a settings layer.
//!
//! Simulation sizes are desk-scale stand-ins for the original data sets.
//! Bootstrap counts are those used for synthetic recovery runs.

use crate::config::Settings;
use crate::error::{Error, Result};

pub const NAMES: [&str; 6] = [
    "table3",
    "table5",
    "table6",
    "table8-short",
    "table8-long",
    "table9",
];

pub fn settings(name: &str) -> Result<Settings> {
    let text = match name {
        // Daily futures, pooled cubic fit over k = 1..10.
        "table3" => {
            "[data]\nfrequency = daily\n\
             [trend]\nhorizons = 1..10\nmode = continuous\n\
             [model]\nmodel = cubic\n\
             [fit]\nbootstrap = 1000\nfolds = 15\n\
             [simulate]\na = 0.0133\nb = 0.0129\nc = -0.0062\nd = 0\ne = 0\ndrivers = 1..10\n\
             per_horizon = true\nn_assets = 24\nn_intervals = 7800\nprepend_warmup = true\n\
             check = b,c\nmin_t = b,c\n"
        }
        // Minute data, short horizons, odd quintic plus the tick-size step.
        "table5" => {
            "[data]\nfrequency = minute\n\
             [trend]\nhorizons = 1..4\nmode = continuous\n\
             [model]\nmodel = quintic\n\
             [fit]\nbootstrap = 1000\nfolds = 12\n\
             [simulate]\na = 0.00017\nb = -0.00912\nc = 0.00259\nd = -0.00038\ne = -0.00282\ndrivers = 1..4\n\
             per_horizon = true\nn_assets = 16\nn_intervals = 1000000\nprepend_warmup = true\n\
             check = b,c,d,e\n"
        }
        // Minute data, longer horizons, no quintic term.
        "table6" => {
            "[data]\nfrequency = minute\n\
             [trend]\nhorizons = 6..10\nmode = continuous\n\
             [model]\nfeatures = const,phi,phi3,sign_phi\n\
             [fit]\nbootstrap = 1000\nfolds = 12\n\
             [simulate]\na = 0.00003\nb = 0.00132\nc = -0.00039\nd = 0\ne = -0.00071\ndrivers = 6..10\n\
             per_horizon = true\nn_assets = 16\nn_intervals = 1000000\nprepend_warmup = true\n\
             check = b,c,e\n"
        }
        // Monthly data, horizons of 3 to 12 months.
        "table8-short" => {
            "[data]\nfrequency = monthly\n\
             [trend]\nhorizons = 1..3\nmode = continuous\n\
             [model]\nmodel = cubic\n\
             [fit]\nbootstrap = 500\nfolds = 15\n\
             [simulate]\na = 0.061\nb = 0.070\nc = -0.014\nd = 0\ne = 0\ndrivers = 1..3\n\
             per_horizon = true\nn_assets = 24\nn_intervals = 1800\nprepend_warmup = true\n\
             check = b,c\n"
        }
        // Monthly data, horizons of 2 to 16 years.
        "table8-long" => {
            "[data]\nfrequency = monthly\n\
             [trend]\nhorizons = 4..7\nmode = continuous\n\
             [model]\nmodel = cubic\n\
             [fit]\nbootstrap = 500\nfolds = 15\n\
             [simulate]\na = 0.022\nb = -0.042\nc = 0.011\nd = 0\ne = 0\ndrivers = 4..7\n\
             per_horizon = true\nn_assets = 24\nn_intervals = 3960\nprepend_warmup = true\n\
             check = b,c\n"
        }
        // Yearly interest rates, linear fit over 2 to 128 years.
        "table9" => {
            "[data]\nfrequency = yearly\n\
             [trend]\nhorizons = 1..7\nmode = continuous\n\
             [model]\nmodel = linear\n\
             [fit]\nbootstrap = 500\nfolds = 15\n\
             [simulate]\na = 0.010\nb = -0.11\nc = 0\nd = 0\ne = 0\ndrivers = 1..7\n\
             per_horizon = true\nn_assets = 6\nn_intervals = 650\nprepend_warmup = true\n\
             check = b\n"
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}`; known presets: {}",
                NAMES.join(", ")
            )))
        }
    };
    let mut s = Settings::parse(text)?;
    s.set("run", "preset", name);
    Ok(s)
}
