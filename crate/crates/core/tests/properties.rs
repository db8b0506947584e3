mod common;

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use proptest::prelude::*;

use popdyn::analysis::ols::interaction_design;
use popdyn::analysis::{apply_filters, least_squares, ols_interaction_fit, DailyRanks};
use popdyn::ingest::{
    parse_mirrors, parse_trades, performance_series, reconstruct_popularity, rolling_performance, write_mirrors,
    write_trades, BusinessDayRange, PopularitySeries,
};
use popdyn::pipeline::observations;
use popdyn::simulator::trader_id;
use popdyn::{Condition, MirrorEvent, TradeRecord, TraderId, UserDayPoint};

use common::rel_close;

fn day(offset: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2012, 1, 2).unwrap() + Days::new(offset)
}

fn arb_trade() -> impl Strategy<Value = TradeRecord> {
    (0u32..4, 0u64..30, -50.0f64..50.0).prop_map(|(t, d, r)| TradeRecord {
        trader_id: trader_id(t),
        close_date: day(d),
        daily_return: r,
    })
}

fn arb_mirror() -> impl Strategy<Value = MirrorEvent> {
    (0u32..100, 0u32..4, 0u64..40, proptest::option::of(0u64..20)).prop_map(|(c, t, s, len)| MirrorEvent {
        copier_id: format!("c{c}"),
        target_id: trader_id(t),
        start_date: day(s),
        end_date: len.map(|l| day(s + l)),
    })
}

fn range() -> BusinessDayRange {
    BusinessDayRange::spanning(day(0), day(45))
}

fn add(
    a: &BTreeMap<TraderId, PopularitySeries>,
    b: &BTreeMap<TraderId, PopularitySeries>,
    len: usize,
) -> Vec<Vec<u32>> {
    (0..4)
        .map(|t| {
            let id = trader_id(t);
            let get = |m: &BTreeMap<TraderId, PopularitySeries>| m.get(&id).map_or(vec![0; len], |s| s.counts.clone());
            get(a).iter().zip(get(b)).map(|(x, y)| x + y).collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rolling_performance_ignores_input_order(
        trades in proptest::collection::vec(arb_trade(), 1..40),
        seed in any::<u64>(),
        d in 0u64..35,
        window in 1usize..8,
    ) {
        let mut shuffled = trades.clone();
        // deterministic shuffle
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        for t in 0..4 {
            let mine: Vec<_> = trades.iter().filter(|r| r.trader_id == trader_id(t)).cloned().collect();
            let theirs: Vec<_> = shuffled.iter().filter(|r| r.trader_id == trader_id(t)).cloned().collect();
            let a = rolling_performance(&mine, day(d), window);
            let b = rolling_performance(&theirs, day(d), window);
            prop_assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
        }
    }

    #[test]
    fn popularity_is_order_free_and_additive(
        first in proptest::collection::vec(arb_mirror(), 0..30),
        second in proptest::collection::vec(arb_mirror(), 0..30),
    ) {
        let r = range();
        let roster: Vec<TraderId> = (0..4).map(trader_id).collect();
        let mut all = first.clone();
        all.extend(second.iter().cloned());
        let whole = reconstruct_popularity(&all, &r, Some(&roster));
        let mut reversed = all.clone();
        reversed.reverse();
        prop_assert_eq!(&whole, &reconstruct_popularity(&reversed, &r, Some(&roster)));

        let a = reconstruct_popularity(&first, &r, None);
        let b = reconstruct_popularity(&second, &r, None);
        let summed = add(&a, &b, r.len());
        for t in 0..4u32 {
            prop_assert_eq!(&whole[&trader_id(t)].counts, &summed[t as usize]);
        }
    }

    #[test]
    fn logs_round_trip_through_csv(
        trades in proptest::collection::vec(arb_trade(), 0..30),
        mirrors in proptest::collection::vec(arb_mirror(), 0..30),
    ) {
        let mut buf = Vec::new();
        write_trades(&mut buf, &trades).unwrap();
        prop_assert_eq!(parse_trades(buf.as_slice()).unwrap(), trades);
        let mut buf = Vec::new();
        write_mirrors(&mut buf, &mirrors).unwrap();
        prop_assert_eq!(parse_mirrors(buf.as_slice()).unwrap(), mirrors);
    }

    #[test]
    fn filters_are_sound(
        mirrors in proptest::collection::vec(arb_mirror(), 1..60),
        trades in proptest::collection::vec(arb_trade(), 1..40),
        cutoff in 1u32..4,
    ) {
        let (points, ranks) = observations(&trades, &mirrors, 3).unwrap();
        let zero_one = apply_filters(&points, &Condition::PopZeroOne, &ranks);
        prop_assert!(zero_one.iter().all(|p| p.popularity <= 1 && p.delta >= 0));
        let cond = Condition::not_top(cutoff).unwrap();
        let not_top = apply_filters(&points, &cond, &ranks);
        for p in &not_top {
            prop_assert!(p.popularity > 0 && p.delta >= 0);
            prop_assert!(ranks.rank(&p.trader_id, p.day).unwrap() > cutoff);
        }
        // every excluded point fails some clause
        for p in &points {
            let kept = not_top.iter().any(|k| k.trader_id == p.trader_id && k.day == p.day);
            let rank = ranks.rank(&p.trader_id, p.day).unwrap();
            prop_assert_eq!(kept, p.popularity > 0 && p.delta >= 0 && rank > cutoff);
        }
    }
}

fn synthetic_points(n: usize) -> Vec<UserDayPoint> {
    (0..n)
        .map(|i| {
            let pop = (i % 7) as u32;
            let perf = ((i * 37) % 23) as f64 - 11.0 + (i % 3) as f64 * 0.25;
            let noise = ((i * 7919) % 13) as i64 - 6;
            UserDayPoint {
                trader_id: trader_id(i as u32 % 11),
                day: day(i as u64),
                popularity: pop,
                performance: perf,
                delta: 1
                    + i64::from(pop)
                    + (0.4 * perf).round() as i64
                    + (0.2 * f64::from(pop) * perf).round() as i64
                    + noise,
            }
        })
        .collect()
}

#[test]
fn performance_scaling_rescales_its_coefficients_only() {
    let points = synthetic_points(300);
    let base = ols_interaction_fit(&points).unwrap();
    for c in [0.01, 3.0, 100.0] {
        let scaled: Vec<UserDayPoint> = points
            .iter()
            .map(|p| UserDayPoint {
                performance: p.performance * c,
                ..p.clone()
            })
            .collect();
        let fit = ols_interaction_fit(&scaled).unwrap();
        assert!(rel_close(fit.coefficients[0], base.coefficients[0], 1e-9));
        assert!(rel_close(fit.coefficients[1], base.coefficients[1], 1e-9));
        assert!(rel_close(fit.coefficients[2], base.coefficients[2] / c, 1e-9));
        assert!(rel_close(fit.coefficients[3], base.coefficients[3] / c, 1e-9));
        for j in 0..4 {
            assert!(rel_close(fit.t_stats[j], base.t_stats[j], 1e-9), "t[{j}] at c={c}");
            assert!(rel_close(fit.p_values[j], base.p_values[j], 1e-9), "p[{j}] at c={c}");
        }
    }
}

#[test]
fn residuals_are_orthogonal_to_design() {
    let mut points = synthetic_points(250);
    points.sort_by(|a, b| (&a.trader_id, a.day).cmp(&(&b.trader_id, b.day)));
    let (columns, y) = interaction_design(&points);
    let fit = least_squares(&columns, &["intercept", "popularity", "performance", "interaction"], &y).unwrap();
    for col in &columns {
        let dot: f64 = col.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
        let scale: f64 = col.iter().map(|a| a * a).sum::<f64>().sqrt() * fit.rss.sqrt();
        assert!(dot.abs() <= 1e-9 * scale, "dot {dot}");
    }
}

#[test]
fn simulated_performance_matches_ingested_performance() {
    let mut cfg = popdyn::MarketConfig::reference();
    cfg.num_traders = 40;
    cfg.params.horizon = 30;
    cfg.params.inactive_day_prob = 0.4;
    cfg.params.window_len = 4;
    let truth = popdyn::simulate_market(&cfg).unwrap();
    let (trades, _) = popdyn::emit_logs(&truth);
    let range = BusinessDayRange::new(cfg.date_start, 31);
    let roster: Vec<TraderId> = truth.traders.iter().map(|t| t.trajectory.trader_id.clone()).collect();
    let perf = performance_series(&trades, &range, 4, Some(&roster));
    for t in &truth.traders {
        let got: Vec<Option<u64>> = perf[&t.trajectory.trader_id]
            .values
            .iter()
            .map(|v| v.map(f64::to_bits))
            .collect();
        let want: Vec<Option<u64>> = t.trajectory.performance.iter().map(|v| v.map(f64::to_bits)).collect();
        assert_eq!(got, want, "{}", t.trajectory.trader_id);
    }
}

#[test]
fn ranks_follow_competition_ranking() {
    let r = BusinessDayRange::new(day(0), 2);
    let mut pop = BTreeMap::new();
    for (t, c) in [(0u32, 5u32), (1, 3), (2, 3), (3, 1)] {
        pop.insert(
            trader_id(t),
            PopularitySeries {
                trader_id: trader_id(t),
                counts: vec![c, c],
            },
        );
    }
    let ranks = DailyRanks::compute(&pop, &r);
    let got: Vec<u32> = (0..4).map(|t| ranks.rank(&trader_id(t), day(0)).unwrap()).collect();
    assert_eq!(got, vec![1, 2, 2, 4]);
}
