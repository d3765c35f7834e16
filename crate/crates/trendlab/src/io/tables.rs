use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use trendlab_core::buckets::BucketStats;
use trendlab_core::regress::{Coefficient, Feature, FitResult, ModelSpec};
use trendlab_core::report::{format_sig, DatasetTag, HorizonCurve};
use trendlab_core::{Frequency, Horizon, NormalizedReturns};

use super::{create, open};
use crate::error::{Error, Result};

fn sig(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format_sig(x)
    }
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

fn finish<W: Write>(path: &Path, wtr: csv::Writer<W>) -> Result<()> {
    wtr.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::json(path, e))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// `timestamp,asset,R,sigma`, one row per emitted normalized return.
pub fn write_returns_csv(path: &Path, returns: &[NormalizedReturns]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    wtr.write_record(["timestamp", "asset", "R", "sigma"])
        .map_err(|e| Error::csv(path, e))?;
    for r in returns {
        for (i, p) in r.values.iter().enumerate() {
            wtr.serialize((p.timestamp, &r.asset_id, p.value, r.sigma.at(i)))
                .map_err(|e| Error::csv(path, e))?;
        }
    }
    finish(path, wtr)
}

/// `k,phi_lo,phi_hi,count,mean_phi,mean_response,stderr`; empty buckets keep
/// their row with blank means.
pub fn write_buckets_csv(path: &Path, stats: &BucketStats) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    wtr.write_record([
        "k",
        "phi_lo",
        "phi_hi",
        "count",
        "mean_phi",
        "mean_response",
        "stderr",
    ])
    .map_err(|e| Error::csv(path, e))?;
    for b in &stats.buckets {
        wtr.write_record([
            b.k.to_string(),
            sig(b.phi_lo),
            sig(b.phi_hi),
            b.count.to_string(),
            sig(b.mean_phi),
            sig(b.mean_response),
            opt_sig(b.stderr),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    finish(path, wtr)
}

/// `sample,<coefficient names>`, one row per non-singular replicate.
pub fn write_bootstrap_csv(path: &Path, spec: &ModelSpec, samples: &[Vec<f64>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["sample".to_string()];
    header.extend(spec.features().iter().map(|f| f.coefficient().to_string()));
    wtr.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (i, beta) in samples.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(beta.iter().map(|v| v.to_string()));
        wtr.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    finish(path, wtr)
}

/// `dataset,T_minutes,coef,value,stderr` in curve order.
pub fn write_curve_csv(path: &Path, curve: &HorizonCurve) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    wtr.write_record(["dataset", "T_minutes", "coef", "value", "stderr"])
        .map_err(|e| Error::csv(path, e))?;
    for p in &curve.points {
        wtr.write_record([
            p.dataset.as_str().to_string(),
            sig(p.t_minutes),
            p.coef.clone(),
            sig(p.value),
            opt_sig(p.stderr),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    finish(path, wtr)
}

/// One whitespace-separated block per `(coefficient, dataset)`, blocks
/// separated by two blank lines so gnuplot can address them with `index`.
pub fn write_curve_gnuplot(path: &Path, curve: &HorizonCurve) -> Result<()> {
    let mut keys: Vec<(String, DatasetTag)> = Vec::new();
    for p in &curve.points {
        if !keys.contains(&(p.coef.clone(), p.dataset)) {
            keys.push((p.coef.clone(), p.dataset));
        }
    }
    keys.sort();
    let mut out = create(path)?;
    let mut text = String::new();
    for (i, (coef, dataset)) in keys.iter().enumerate() {
        if i > 0 {
            text.push_str("\n\n");
        }
        text += &format!(
            "# index {i}: {coef} {dataset}{}\n",
            if curve.rescaled { " (rescaled)" } else { "" }
        );
        text.push_str("# T_minutes value stderr\n");
        for p in curve
            .points
            .iter()
            .filter(|p| &p.coef == coef && p.dataset == *dataset)
        {
            text += &format!(
                "{} {} {}\n",
                sig(p.t_minutes),
                sig(p.value),
                p.stderr.map_or("NaN".into(), sig)
            );
        }
    }
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// A fit together with what it was fitted on, as stored in fit JSON files.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub fit: FitResult,
    pub frequency: Option<Frequency>,
    pub horizon: Option<Horizon>,
    pub dataset: Option<DatasetTag>,
}

impl FitRecord {
    pub fn bare(fit: FitResult) -> Self {
        Self {
            fit,
            frequency: None,
            horizon: None,
            dataset: None,
        }
    }
}

/// `{coefficients:{name:{value,stderr,t}}, r2_bp, r2_adj_bp, n_rows, spec, seed, ...}`.
pub fn fit_to_json(rec: &FitRecord) -> Value {
    let fit = &rec.fit;
    let coefficients: Map<String, Value> = fit
        .coefficients
        .iter()
        .map(|c| {
            (
                c.name().to_string(),
                json!({ "value": c.value, "stderr": c.stderr, "t": c.t }),
            )
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("coefficients".into(), Value::Object(coefficients));
    obj.insert("r2_bp".into(), json!(fit.r2_bp));
    obj.insert("r2_adj_bp".into(), json!(fit.r2_adj_bp));
    obj.insert("n_rows".into(), json!(fit.n_rows));
    obj.insert("n_days".into(), json!(fit.n_days));
    obj.insert("n_bootstrap".into(), json!(fit.n_bootstrap));
    obj.insert("spec".into(), json!(fit.spec.to_string()));
    obj.insert("seed".into(), json!(fit.seed));
    if let Some(f) = rec.frequency {
        obj.insert("frequency".into(), json!(f.as_str()));
    }
    if let Some(h) = rec.horizon {
        obj.insert(
            "horizon".into(),
            json!({ "k": h.k, "intervals": h.intervals }),
        );
    }
    if let Some(d) = rec.dataset {
        obj.insert("dataset".into(), json!(d.as_str()));
    }
    Value::Object(obj)
}

pub fn fit_from_json(v: &Value) -> std::result::Result<FitRecord, String> {
    let field = |k: &str| v.get(k).ok_or_else(|| format!("missing field `{k}`"));
    let num = |k: &str| {
        field(k)?
            .as_f64()
            .ok_or_else(|| format!("field `{k}` is not a number"))
    };
    let count = |k: &str| {
        field(k)?
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| format!("field `{k}` is not a count"))
    };
    let spec = ModelSpec::parse_list(field("spec")?.as_str().ok_or("`spec` is not a string")?)
        .map_err(|e| e.to_string())?;
    let coefs = field("coefficients")?
        .as_object()
        .ok_or("`coefficients` is not an object")?;
    let coefficients = spec
        .features()
        .iter()
        .map(|&feature: &Feature| {
            let c = coefs
                .get(feature.coefficient())
                .ok_or_else(|| format!("coefficient `{}` missing", feature.coefficient()))?;
            Ok(Coefficient {
                feature,
                value: c["value"]
                    .as_f64()
                    .ok_or("coefficient value is not a number")?,
                stderr: c["stderr"].as_f64(),
                t: c["t"].as_f64(),
            })
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    let frequency = match v.get("frequency").and_then(Value::as_str) {
        Some(s) => Some(s.parse::<Frequency>().map_err(|e| e.to_string())?),
        None => None,
    };
    let horizon = match v.get("horizon") {
        Some(h) => Some(Horizon {
            k: h["k"].as_i64().ok_or("horizon k is not an integer")? as i32,
            intervals: h["intervals"]
                .as_f64()
                .ok_or("horizon intervals is not a number")?,
        }),
        None => None,
    };
    let dataset = match v.get("dataset").and_then(Value::as_str) {
        Some(s) => Some(serde_json::from_value::<DatasetTag>(json!(s)).map_err(|e| e.to_string())?),
        None => None,
    };
    Ok(FitRecord {
        fit: FitResult {
            spec,
            coefficients,
            r2_bp: num("r2_bp")?,
            r2_adj_bp: v.get("r2_adj_bp").and_then(Value::as_f64),
            n_rows: count("n_rows")?,
            n_days: v.get("n_days").and_then(Value::as_u64).unwrap_or(0) as usize,
            n_bootstrap: v.get("n_bootstrap").and_then(Value::as_u64).unwrap_or(0) as usize,
            seed: v.get("seed").and_then(Value::as_u64),
        },
        frequency,
        horizon,
        dataset,
    })
}

pub fn read_fit(path: &Path) -> Result<FitRecord> {
    let v: Value = serde_json::from_reader(open(path)?).map_err(|e| Error::json(path, e))?;
    fit_from_json(&v).map_err(|message| Error::Parse {
        path: path.into(),
        line: 0,
        message,
    })
}
