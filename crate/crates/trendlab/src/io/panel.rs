use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trendlab_core::panel::PanelMeta;
use trendlab_core::{Error as CoreError, Panel};

use super::{create, open};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    meta: PanelMeta,
    assets: Vec<String>,
    n_rows: usize,
}

/// `panel.csv` -> `panel.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `timestamp,asset,phi_k..,response` rows plus the metadata sidecar.
/// Values are written in shortest round-trip form, so reading the panel back
/// reproduces it exactly.
pub fn write_panel(path: &Path, panel: &Panel) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["timestamp".to_string(), "asset".to_string()];
    header.extend(panel.columns().iter().map(|c| c.label()));
    header.push("response".into());
    wtr.write_record(&header).map_err(|e| Error::csv(path, e))?;
    let mut record = csv::ByteRecord::new();
    let mut buf = FloatBuf::default();
    for row in panel.rows() {
        record.clear();
        record.push_field(row.timestamp.to_string().as_bytes());
        record.push_field(panel.assets()[row.asset as usize].as_bytes());
        for &v in row.phi {
            record.push_field(buf.format(v));
        }
        record.push_field(buf.format(row.response));
        wtr.write_byte_record(&record)
            .map_err(|e| Error::csv(path, e))?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))?;

    let side = sidecar_path(path);
    let sidecar = Sidecar {
        meta: panel.meta().clone(),
        assets: panel.assets().to_vec(),
        n_rows: panel.len(),
    };
    let mut out = create(&side)?;
    serde_json::to_writer_pretty(&mut out, &sidecar).map_err(|e| Error::json(&side, e))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&side, e))
}

/// Metadata of a written panel, from its sidecar alone.
pub fn read_panel_meta(path: &Path) -> Result<PanelMeta> {
    let side = sidecar_path(path);
    let sidecar: Sidecar =
        serde_json::from_reader(open(&side)?).map_err(|e| Error::json(&side, e))?;
    Ok(sidecar.meta)
}

/// Reads a panel written by [`write_panel`]; the sidecar must sit next to it.
pub fn read_panel(path: &Path) -> Result<Panel> {
    let side = sidecar_path(path);
    let sidecar: Sidecar =
        serde_json::from_reader(open(&side)?).map_err(|e| Error::json(&side, e))?;
    let width = sidecar.meta.columns.len();
    let asset_of: HashMap<&str, u32> = sidecar
        .assets
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i as u32))
        .collect();

    let mut rdr = csv::Reader::from_reader(open(path)?);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let expected: Vec<String> = std::iter::once("timestamp".to_string())
        .chain(std::iter::once("asset".into()))
        .chain(sidecar.meta.columns.iter().map(|c| c.label()))
        .chain(std::iter::once("response".into()))
        .collect();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: format!(
                "header does not match sidecar columns {}",
                expected.join(",")
            ),
        });
    }

    let mut rows = Vec::with_capacity(sidecar.n_rows);
    let mut record = csv::StringRecord::new();
    while rdr
        .read_record(&mut record)
        .map_err(|e| Error::csv(path, e))?
    {
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Parse {
            path: path.into(),
            line,
            message: format!("bad {what}"),
        };
        let timestamp: i64 = record[0].parse().map_err(|_| bad("timestamp"))?;
        let asset = *asset_of
            .get(&record[1])
            .ok_or_else(|| bad("asset (not in sidecar)"))?;
        let phi = (0..width)
            .map(|c| {
                record[2 + c]
                    .parse::<f64>()
                    .map_err(|_| bad("trend strength"))
            })
            .collect::<Result<Vec<f64>>>()?;
        let response: f64 = record[2 + width].parse().map_err(|_| bad("response"))?;
        rows.push((timestamp, asset, phi, response));
    }
    if rows.len() != sidecar.n_rows {
        return Err(CoreError::Data(format!(
            "{}: {} rows, sidecar says {}",
            path.display(),
            rows.len(),
            sidecar.n_rows
        ))
        .into());
    }
    Ok(Panel::from_rows(sidecar.meta, sidecar.assets, rows)?)
}

/// Reusable buffer for shortest round-trip float formatting.
#[derive(Default)]
struct FloatBuf(String);

impl FloatBuf {
    fn format(&mut self, v: f64) -> &[u8] {
        use std::fmt::Write as _;
        self.0.clear();
        write!(self.0, "{v}").expect("writing to a String");
        self.0.as_bytes()
    }
}
