//! On-disk formats: long-format price CSV, the trend panel with its JSON
//! sidecar, and the result tables.

mod panel;
mod prices;
mod tables;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

pub use panel::{read_panel, read_panel_meta, sidecar_path, write_panel};
pub use prices::{load_price_csv, read_prices, write_price_csv, write_prices};
pub use tables::{
    fit_from_json, fit_to_json, read_fit, write_bootstrap_csv, write_buckets_csv, write_curve_csv,
    write_curve_gnuplot, write_json, write_returns_csv, FitRecord,
};

use crate::error::{Error, Result};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}
