use proptest::prelude::*;
use trendlab_core::buckets::{bucket_index, bucketize_values};
use trendlab_core::regress::{
    bootstrap, fit, BootstrapConfig, Feature, FitConfig, FitDataBuilder, Model, ModelSpec,
};
use trendlab_core::report::{horizon_to_minutes, rescale_coefficients};
use trendlab_core::series::{log_returns, normalize, Observation, Sigma};
use trendlab_core::simulate::{simulate_asset, SimConfig};
use trendlab_core::trend::{kernel_weight, trend_values};
use trendlab_core::{Frequency, PriceSeries, ReturnsConfig, VolMode};

fn prices(moves: &[f64]) -> PriceSeries {
    let mut p = 100.0;
    let mut obs = vec![Observation {
        timestamp: 0,
        price: p,
    }];
    for (i, m) in moves.iter().enumerate() {
        p *= m.exp();
        obs.push(Observation {
            timestamp: i as i64 + 1,
            price: p,
        });
    }
    PriceSeries::new("X", Frequency::Daily, obs).unwrap()
}

/// Signed moves with a small alternating term so the variance never vanishes.
fn spread(moves: &[(f64, bool)]) -> Vec<f64> {
    moves
        .iter()
        .enumerate()
        .map(|(i, &(m, up))| if up { m } else { -m } + 0.002 * (i % 3) as f64)
        .collect()
}

proptest! {
    #[test]
    fn kernel_has_unit_square_sum(t in 1.5f64..300.0) {
        let s: f64 = (1..(60.0 * t) as u64 + 100).map(|n| kernel_weight(t, n).powi(2)).sum();
        prop_assert!((s - 1.0).abs() < 1e-10, "T {t}: {s}");
    }

    #[test]
    fn trend_is_linear_in_returns(
        x in prop::collection::vec(-3.0f64..3.0, 1..200),
        alpha in -2.0f64..2.0,
        t in 1.5f64..64.0,
    ) {
        let y: Vec<f64> = x.iter().rev().copied().collect();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + b).collect();
        let (tx, ty, tc) = (trend_values(&x, t), trend_values(&y, t), trend_values(&combo, t));
        for i in 0..x.len() {
            prop_assert!((tc[i] - (alpha * tx[i] + ty[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn current_return_has_no_weight(x in prop::collection::vec(-3.0f64..3.0, 2..100), t in 1.5f64..64.0) {
        let mut bumped = x.clone();
        *bumped.last_mut().unwrap() += 10.0;
        let (a, b) = (trend_values(&x, t), trend_values(&bumped, t));
        prop_assert_eq!(a.last(), b.last());
    }

    #[test]
    fn normalized_returns_are_clipped(
        moves in prop::collection::vec((0.001f64..0.05, any::<bool>()), 30..200),
        clip in 1.0f64..4.0,
    ) {
        let moves = spread(&moves);
        let cfg = ReturnsConfig { clip_sigma: clip, ..ReturnsConfig::default() };
        let raw = log_returns(&prices(&moves));
        let n = normalize(&raw, &cfg).unwrap();
        let s = n.sigma.at(0);
        for p in &n.values {
            prop_assert!(p.value * s >= n.mu - clip * s - 1e-12 && p.value * s <= n.mu + clip * s + 1e-12);
        }
    }

    #[test]
    fn ewma_volatility_ignores_the_future(
        moves in prop::collection::vec((0.001f64..0.05, any::<bool>()), 40..120),
        cut in 20usize..39,
    ) {
        let moves = spread(&moves);
        let cfg = ReturnsConfig { vol_mode: VolMode::Ewma { half_life: 10.0 }, ..ReturnsConfig::default() };
        let mut later = moves.clone();
        for m in &mut later[cut..] {
            *m = -3.0 * *m + 0.01;
        }
        let a = normalize(&log_returns(&prices(&moves)), &cfg).unwrap();
        let b = normalize(&log_returns(&prices(&later)), &cfg).unwrap();
        let (Sigma::Ewma(sa), Sigma::Ewma(sb)) = (&a.sigma, &b.sigma) else { panic!("ewma sigma expected") };
        // sigma[i] belongs to raw return i + 12; the first twelve seed the average.
        for i in 0..cut - 12 {
            prop_assert_eq!(sa[i], sb[i]);
        }
    }

    #[test]
    fn bucket_counts_add_up(pairs in prop::collection::vec((-4.0f64..4.0, -1.0f64..1.0), 0..300), per_unit in prop::sample::select(vec![3u32, 5])) {
        let stats = bucketize_values(pairs.iter().copied(), per_unit, 7);
        prop_assert_eq!(stats.buckets.len(), 15);
        prop_assert_eq!(stats.buckets.iter().map(|b| b.count).sum::<usize>(), pairs.len());
        for &(phi, _) in &pairs {
            let k = bucket_index(phi, per_unit, 7);
            let b = &stats.buckets[(k + 7) as usize];
            prop_assert!(phi >= b.phi_lo - 1e-12 && phi <= b.phi_hi + 1e-12);
        }
    }

    #[test]
    fn ols_ignores_row_order_and_day_split(
        rows in prop::collection::vec((0i64..8, -2.5f64..2.5, -1.0f64..1.0), 12..60),
        seed in any::<u64>(),
    ) {
        let spec = ModelSpec::model(Model::Cubic);
        let mut a = FitDataBuilder::new(&spec);
        rows.iter().for_each(|&(d, x, y)| a.push(d, x, y));
        let mut shuffled = rows.clone();
        let n = shuffled.len();
        for i in 0..n {
            let j = (seed.rotate_left(i as u32) as usize ^ i) % n;
            shuffled.swap(i, j);
        }
        let mut b = FitDataBuilder::new(&spec);
        let (left, right) = shuffled.split_at(n / 2);
        left.iter().for_each(|&(d, x, y)| b.push(d, x, y));
        let mut c = FitDataBuilder::new(&spec);
        right.iter().for_each(|&(d, x, y)| c.push(d, x, y));
        b.merge(c);
        let (fa, fb) = (a.finish().ols(), b.finish().ols());
        match (fa, fb) {
            (Ok(fa), Ok(fb)) => {
                for (x, y) in fa.beta.iter().zip(&fb.beta) {
                    prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
                }
            }
            (Err(_), Err(_)) => {}
            (fa, fb) => prop_assert!(false, "{fa:?} vs {fb:?}"),
        }
    }

    #[test]
    fn rescaling_keeps_t(value in -1.0f64..1.0, stderr in 1e-5f64..1.0, t in 1.0f64..1e7) {
        let spec = ModelSpec::new([Feature::Phi]).unwrap();
        let mut b = FitDataBuilder::new(&spec);
        for i in 0..200 {
            let x = ((i * 37) % 101) as f64 / 20.0 - 2.5;
            b.push(i / 10, x, value * x + ((i * 13) % 7) as f64 * 0.01);
        }
        let mut f = fit(&b.finish(), &FitConfig::default()).unwrap();
        for c in &mut f.coefficients {
            c.stderr = Some(stderr);
            c.t = Some(c.value / stderr);
        }
        for (s, c) in rescale_coefficients(&f, t).iter().zip(&f.coefficients) {
            prop_assert!((s.t().unwrap() - c.t.unwrap()).abs() <= 1e-12 * (1.0 + c.t.unwrap().abs()));
        }
    }
}

#[test]
fn horizon_minutes_are_monotone_and_bridge() {
    for f in [
        Frequency::Minute,
        Frequency::Daily,
        Frequency::Monthly,
        Frequency::Yearly,
    ] {
        let m: Vec<f64> = (1..=10)
            .map(|k| horizon_to_minutes(f, (1u64 << k) as f64))
            .collect();
        assert!(m.windows(2).all(|w| w[0] < w[1]));
    }
    assert_eq!(
        horizon_to_minutes(Frequency::Daily, 1.0),
        horizon_to_minutes(Frequency::Minute, 1024.0)
    );
    assert_eq!(
        horizon_to_minutes(Frequency::Monthly, 12.0),
        horizon_to_minutes(Frequency::Yearly, 1.0)
    );
}

#[test]
fn asset_paths_do_not_depend_on_market_size() {
    let small = SimConfig {
        n_assets: 2,
        n_intervals: 300,
        b: 0.05,
        seed: 9,
        ..SimConfig::default()
    };
    let large = SimConfig {
        n_assets: 7,
        ..small.clone()
    };
    assert_eq!(
        simulate_asset(&small, 1).unwrap(),
        simulate_asset(&large, 1).unwrap()
    );
    assert_ne!(
        simulate_asset(&small, 0).unwrap(),
        simulate_asset(&small, 1).unwrap()
    );
}

#[test]
fn ticked_prices_sit_on_the_grid() {
    let cfg = SimConfig {
        n_intervals: 500,
        tick_size: 0.25,
        return_vol: 0.002,
        ..SimConfig::default()
    };
    let s = simulate_asset(&cfg, 0).unwrap();
    for o in s.observations() {
        let ticks = o.price / 0.25;
        assert!((ticks - ticks.round()).abs() < 1e-9, "{}", o.price);
    }
}

#[test]
fn bootstrap_is_reproducible() {
    let spec = ModelSpec::model(Model::Linear);
    let mut b = FitDataBuilder::new(&spec);
    for i in 0..2000 {
        let x = ((i * 7919) % 1000) as f64 / 200.0 - 2.5;
        let noise = (((i * 104_729) % 997) as f64 / 997.0) - 0.5;
        b.push(i / 20, x, 0.1 * x + noise);
    }
    let data = b.finish();
    let cfg = BootstrapConfig {
        n_samples: 100,
        seed: 3,
    };
    let (x, y) = (
        bootstrap(&data, &cfg).unwrap(),
        bootstrap(&data, &cfg).unwrap(),
    );
    assert_eq!(x, y);
    let z = bootstrap(&data, &BootstrapConfig { seed: 4, ..cfg }).unwrap();
    assert_ne!(x.samples, z.samples);
}
