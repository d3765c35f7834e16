use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use trendlab_core::series::Observation;
use trendlab_core::{Error as CoreError, Frequency, PriceSeries};

use super::{create, open};
use crate::error::{Error, Result};

/// Reads `timestamp,asset,price` rows, one series per asset in order of
/// first appearance. Each asset's rows must be strictly increasing in time.
pub fn load_price_csv(path: &Path, frequency: Frequency) -> Result<Vec<PriceSeries>> {
    read_prices(open(path)?, path, frequency)
}

/// As [`load_price_csv`] from any reader; `path` only labels errors.
pub fn read_prices<R: Read>(
    reader: R,
    path: &Path,
    frequency: Frequency,
) -> Result<Vec<PriceSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                path: path.into(),
                line: 1,
                message: format!("missing column `{name}`; expected header timestamp,asset,price"),
            })
    };
    let (c_ts, c_asset, c_price) = (column("timestamp")?, column("asset")?, column("price")?);

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<(String, Vec<Observation>)> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr
            .read_record(&mut record)
            .map_err(|e| Error::csv(path, e))?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_err = |message: String| Error::Parse {
            path: path.into(),
            line,
            message,
        };
        let timestamp: i64 = field(c_ts)
            .parse()
            .map_err(|_| parse_err(format!("bad timestamp `{}`", field(c_ts))))?;
        let price: f64 = field(c_price)
            .parse()
            .map_err(|_| parse_err(format!("bad price `{}`", field(c_price))))?;
        let asset = field(c_asset);
        if asset.is_empty() {
            return Err(parse_err("empty asset id".into()));
        }
        if !price.is_finite() || price <= 0.0 {
            return Err(CoreError::Data(format!(
                "{}:{line}: price {price} of {asset} is not positive",
                path.display()
            ))
            .into());
        }
        let slot = *index.entry(asset.to_string()).or_insert_with(|| {
            groups.push((asset.to_string(), Vec::new()));
            groups.len() - 1
        });
        let obs = &mut groups[slot].1;
        if let Some(last) = obs.last() {
            if last.timestamp == timestamp {
                return Err(CoreError::Duplicate(format!(
                    "{}:{line}: second row for {asset} at {timestamp}",
                    path.display()
                ))
                .into());
            }
            if last.timestamp > timestamp {
                return Err(CoreError::Data(format!(
                    "{}:{line}: timestamp {timestamp} of {asset} precedes {}",
                    path.display(),
                    last.timestamp
                ))
                .into());
            }
        }
        obs.push(Observation { timestamp, price });
    }
    if groups.is_empty() {
        return Err(CoreError::Empty("price file has no rows").into());
    }
    groups
        .into_iter()
        .map(|(asset, obs)| PriceSeries::new(asset, frequency, obs).map_err(Error::from))
        .collect()
}

pub fn write_price_csv(path: &Path, series: &[PriceSeries]) -> Result<()> {
    let mut out = create(path)?;
    write_prices(&mut out, series).map_err(|e| Error::csv(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Long format ordered by timestamp, then by position in `series`.
pub fn write_prices<W: Write>(writer: W, series: &[PriceSeries]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["timestamp", "asset", "price"])?;
    let mut cursor = vec![0usize; series.len()];
    loop {
        let next = series
            .iter()
            .enumerate()
            .filter_map(|(a, s)| s.observations().get(cursor[a]).map(|o| (o.timestamp, a)))
            .min();
        let Some((_, a)) = next else { break };
        let o = series[a].observations()[cursor[a]];
        wtr.serialize((o.timestamp, series[a].asset_id(), o.price))?;
        cursor[a] += 1;
    }
    wtr.flush()?;
    Ok(())
}
