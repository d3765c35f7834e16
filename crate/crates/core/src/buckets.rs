//! Mean next-interval response by trend-strength bucket.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::panel::Panel;

/// One bucket `[phi_lo, phi_hi)`, centred on `k / buckets_per_unit`.
///
/// Statistics are plain i.i.d. sample moments; `stderr` is `None` with fewer
/// than two rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub k: i32,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub count: usize,
    pub mean_phi: f64,
    pub mean_response: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub buckets_per_unit: u32,
    pub k_max: i32,
    /// All `2 k_max + 1` buckets in order of `k`, empty ones included.
    pub buckets: Vec<Bucket>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: i32,
    pub mean_phi: f64,
    pub mean_response: f64,
    pub stderr: Option<f64>,
}

/// Bucket index of `phi`: nearest multiple of `1 / buckets_per_unit`, ties
/// rounded up, clamped to `±k_max`.
pub fn bucket_index(phi: f64, buckets_per_unit: u32, k_max: i32) -> i32 {
    let k = math::floor(phi * buckets_per_unit as f64 + 0.5);
    k.clamp(-k_max as f64, k_max as f64) as i32
}

/// Buckets column `column` of the panel.
pub fn bucketize(
    panel: &Panel,
    column: usize,
    buckets_per_unit: u32,
    k_max: i32,
) -> Result<BucketStats> {
    if !matches!(buckets_per_unit, 3 | 5) {
        return Err(Error::Config(format!(
            "buckets per unit must be 3 or 5, got {buckets_per_unit}"
        )));
    }
    if k_max < 1 {
        return Err(Error::Config(format!(
            "k_max must be at least 1, got {k_max}"
        )));
    }
    if panel.is_empty() {
        return Err(Error::Empty("panel has no rows to bucket"));
    }
    if column >= panel.width() {
        return Err(Error::Config(format!("panel has no column {column}")));
    }
    let values = (0..panel.len()).map(|i| (panel.phi(i)[column], panel.response(i)));
    Ok(bucketize_values(values, buckets_per_unit, k_max))
}

/// Buckets raw `(phi, response)` pairs. Sums run in input order, so results
/// are reproducible; they are permutation invariant up to round-off.
pub fn bucketize_values<I>(values: I, buckets_per_unit: u32, k_max: i32) -> BucketStats
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let n_buckets = (2 * k_max + 1) as usize;
    // (count, sum phi, sum y, sum y^2) with y shifted by the first response
    // to keep the variance numerically sound.
    let mut acc = alloc::vec![(0usize, 0.0f64, 0.0f64, 0.0f64); n_buckets];
    let mut shift = None;
    for (phi, y) in values {
        let s = *shift.get_or_insert(y);
        let slot = &mut acc[(bucket_index(phi, buckets_per_unit, k_max) + k_max) as usize];
        slot.0 += 1;
        slot.1 += phi;
        slot.2 += y - s;
        slot.3 += (y - s) * (y - s);
    }
    let shift = shift.unwrap_or(0.0);
    let width = 1.0 / buckets_per_unit as f64;
    let buckets = acc
        .into_iter()
        .enumerate()
        .map(|(i, (count, sp, sy, syy))| {
            let k = i as i32 - k_max;
            let n = count as f64;
            let stderr = (count >= 2).then(|| {
                let var = ((syy - sy * sy / n) / (n - 1.0)).max(0.0);
                math::sqrt(var / n)
            });
            Bucket {
                k,
                phi_lo: if k == -k_max {
                    f64::NEG_INFINITY
                } else {
                    (k as f64 - 0.5) * width
                },
                phi_hi: if k == k_max {
                    f64::INFINITY
                } else {
                    (k as f64 + 0.5) * width
                },
                count,
                mean_phi: if count > 0 { sp / n } else { f64::NAN },
                mean_response: if count > 0 { shift + sy / n } else { f64::NAN },
                stderr,
            }
        })
        .collect();
    BucketStats {
        buckets_per_unit,
        k_max,
        buckets,
    }
}

/// One point per nonempty bucket, ordered by `k`.
pub fn bucket_curve(stats: &BucketStats) -> Vec<CurvePoint> {
    stats
        .buckets
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| CurvePoint {
            k: b.k,
            mean_phi: b.mean_phi,
            mean_response: b.mean_response,
            stderr: b.stderr,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn indices_follow_closed_left_intervals() {
        assert_eq!(bucket_index(0.0, 3, 7), 0);
        assert_eq!(bucket_index(0.4, 3, 7), 1);
        assert_eq!(bucket_index(1.0 / 6.0, 3, 7), 1);
        assert_eq!(bucket_index(-1.0 / 6.0, 3, 7), 0);
        assert_eq!(bucket_index(3.0, 3, 7), 7);
        assert_eq!(bucket_index(-30.0, 3, 7), -7);
        assert_eq!(bucket_index(0.3, 5, 12), 2);
    }

    #[test]
    fn fifteen_buckets_tile_the_line() {
        let stats = bucketize_values(vec![(0.0, 1.0)], 3, 7);
        assert_eq!(stats.buckets.len(), 15);
        assert_eq!(stats.buckets[0].phi_lo, f64::NEG_INFINITY);
        assert_eq!(stats.buckets[14].phi_hi, f64::INFINITY);
        for w in stats.buckets.windows(2) {
            assert_eq!(w[0].phi_hi, w[1].phi_lo);
        }
    }

    #[test]
    fn constant_response_gives_flat_curve() {
        let data: Vec<(f64, f64)> = (0..300).map(|i| (-2.0 + i as f64 / 75.0, 0.25)).collect();
        let curve = bucket_curve(&bucketize_values(data, 3, 7));
        assert!(curve.len() > 5);
        for p in curve {
            assert_eq!(p.mean_response, 0.25);
            assert_eq!(p.stderr, Some(0.0));
        }
    }

    #[test]
    fn singleton_bucket_has_no_stderr() {
        let stats = bucketize_values(vec![(0.0, 1.0), (0.0, 3.0), (1.0, 2.0)], 3, 7);
        let curve = bucket_curve(&stats);
        assert_eq!(curve.len(), 2);
        assert_eq!(curve[0].mean_response, 2.0);
        assert!((curve[0].stderr.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(curve[1].stderr, None);
    }
}
