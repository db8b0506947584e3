//! Monte Carlo simulation of trader popularity under probability matching,
//! and emission of synthetic transaction logs.
//!
//! Day `t` of a trajectory runs as follows:
//!
//! 1. the trader closes one trade (unless thinned out) whose return is drawn
//!    from the signal model for its latent quality;
//! 2. rolling performance through `t` is computed with the same rule the
//!    ingest path uses;
//! 3. `f` is evaluated on that performance (`f = 1` when it is undefined) and
//!    combined with `popularity[t]` into the adoption probability
//!    `posterior[t]`;
//! 4. each of the `N` potential copiers independently adopts with that
//!    probability, giving `popularity[t + 1] ~ Binomial(N, posterior[t])`.

use std::io::Write;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::{mean_of_active_days, BusinessDayRange, IngestError, MirrorEvent, TradeRecord, TraderId};
use crate::model::{evaluate_f, posterior_step, FSpec, ModelError, ModelParams, SignalModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Good,
    Bad,
}

impl Quality {
    pub fn is_good(self) -> bool {
        self == Quality::Good
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub trader_id: TraderId,
    pub dates: Vec<NaiveDate>,
    /// The day's closed-trade return; `None` on thinned-out days.
    pub raw_returns: Vec<Option<f64>>,
    pub performance: Vec<Option<f64>>,
    /// Adoption probability computed at the end of each day.
    pub posterior: Vec<f64>,
    pub popularity: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub num_traders: u32,
    pub fraction_good: f64,
    /// Template shared by every trader; `seed` is replaced per trader.
    pub params: ModelParams,
    pub date_start: NaiveDate,
    pub master_seed: u64,
}

impl MarketConfig {
    /// The market used for the end-to-end recovery run: 2,000 traders over
    /// 100 business days, each with 200 potential copiers.
    pub fn reference() -> Self {
        MarketConfig {
            num_traders: 2_000,
            fraction_good: 0.5,
            params: ModelParams {
                population_size: 200,
                alpha: 1.0,
                f_spec: FSpec::Linear {
                    c0: 1.0,
                    c1: 0.25,
                    clamp_min: 0.0,
                    clamp_max: 10.0,
                },
                signal_model: SignalModel {
                    mu_good: 0.15,
                    mu_bad: -0.25,
                    sigma: 3.0,
                },
                horizon: 99,
                initial_popularity: 1,
                seed: 0,
                window_len: 5,
                inactive_day_prob: 0.0,
            },
            date_start: NaiveDate::from_ymd_opt(2011, 9, 12).expect("valid date"),
            master_seed: 20_110_912,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.num_traders == 0 {
            return Err(ModelError::InvalidParam {
                field: "num_traders",
                reason: "must be >= 1".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.fraction_good) {
            return Err(ModelError::InvalidParam {
                field: "fraction_good",
                reason: format!("must lie in [0, 1], got {}", self.fraction_good),
            });
        }
        self.params.validate()
    }

    pub fn num_good(&self) -> u32 {
        (self.fraction_good * f64::from(self.num_traders)).round() as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraderTruth {
    pub quality: Quality,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub population_size: u32,
    pub traders: Vec<TraderTruth>,
}

pub fn trader_id(index: u32) -> TraderId {
    TraderId(format!("t{index:05}"))
}

/// Random stream for trader `index`: a ChaCha8 generator keyed by the master
/// seed, using the trader index as its stream number.
pub fn trader_rng(master_seed: u64, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(u64::from(index));
    rng
}

pub fn simulate_trajectory<R: Rng + ?Sized>(
    trader_id: TraderId,
    params: &ModelParams,
    quality: Quality,
    date_start: NaiveDate,
    rng: &mut R,
) -> Result<Trajectory, ModelError> {
    params.validate()?;
    let days = params.horizon as usize + 1;
    let dates = BusinessDayRange::new(date_start, days).days().to_vec();
    let signal = Normal::new(params.signal_model.mean(quality.is_good()), params.signal_model.sigma).map_err(|e| {
        ModelError::InvalidParam {
            field: "signal_model",
            reason: e.to_string(),
        }
    })?;

    let mut raw_returns = Vec::with_capacity(days);
    let mut performance = Vec::with_capacity(days);
    let mut posterior = Vec::with_capacity(days);
    let mut popularity = Vec::with_capacity(days);
    popularity.push(params.initial_popularity);

    for t in 0..days {
        let active = params.inactive_day_prob == 0.0 || rng.random::<f64>() >= params.inactive_day_prob;
        raw_returns.push(active.then(|| signal.sample(rng)));

        let lo = (t + 1).saturating_sub(params.window_len);
        let perf = mean_of_active_days(raw_returns[lo..=t].iter().copied());
        performance.push(perf);

        let n = popularity[t];
        let f = match perf {
            Some(q) => evaluate_f(q, n, params)?,
            None => 1.0,
        };
        let p = posterior_step(n, params, f)?;
        posterior.push(p);

        if t + 1 < days {
            let draw = Binomial::new(u64::from(params.population_size), p).map_err(|e| ModelError::InvalidParam {
                field: "posterior",
                reason: e.to_string(),
            })?;
            popularity.push(draw.sample(rng) as u32);
        }
    }

    Ok(Trajectory {
        trader_id,
        dates,
        raw_returns,
        performance,
        posterior,
        popularity,
    })
}

/// Simulates every trader. Trader `i` is good iff `i < round(fraction_good *
/// num_traders)` and draws from `trader_rng(master_seed, i)`, so the result
/// does not depend on scheduling.
pub fn simulate_market(config: &MarketConfig) -> Result<GroundTruth, ModelError> {
    config.validate()?;
    let num_good = config.num_good();
    let traders = (0..config.num_traders)
        .into_par_iter()
        .map(|i| {
            let quality = if i < num_good { Quality::Good } else { Quality::Bad };
            let mut params = config.params;
            params.seed = config.master_seed;
            let mut rng = trader_rng(config.master_seed, i);
            simulate_trajectory(trader_id(i), &params, quality, config.date_start, &mut rng)
                .map(|trajectory| TraderTruth { quality, trajectory })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroundTruth {
        population_size: config.params.population_size,
        traders,
    })
}

/// Synthetic logs whose reconstruction reproduces every popularity series.
///
/// Each active day yields one trade. Popularity gains open fresh mirrors on
/// that day; losses close the most recently opened ones, with the day of the
/// loss as the (exclusive) end date.
pub fn emit_logs(truth: &GroundTruth) -> (Vec<TradeRecord>, Vec<MirrorEvent>) {
    let mut trades = Vec::new();
    let mut mirrors = Vec::new();
    for trader in &truth.traders {
        let traj = &trader.trajectory;
        for (date, ret) in traj.dates.iter().zip(&traj.raw_returns) {
            if let Some(r) = ret {
                trades.push(TradeRecord {
                    trader_id: traj.trader_id.clone(),
                    close_date: *date,
                    daily_return: *r,
                });
            }
        }

        let first = mirrors.len();
        let mut open: Vec<usize> = Vec::new();
        let mut prev = 0u32;
        for (date, &count) in traj.dates.iter().zip(&traj.popularity) {
            if count > prev {
                for _ in prev..count {
                    open.push(mirrors.len());
                    mirrors.push(MirrorEvent {
                        copier_id: format!("{}-c{}", traj.trader_id, mirrors.len() - first),
                        target_id: traj.trader_id.clone(),
                        start_date: *date,
                        end_date: None,
                    });
                }
            } else {
                for _ in count..prev {
                    let idx = open.pop().expect("open mirror for every counted copier");
                    mirrors[idx].end_date = Some(*date);
                }
            }
            prev = count;
        }
    }
    (trades, mirrors)
}

pub const GROUND_TRUTH_HEADER: [&str; 5] = ["trader_id", "quality_bit", "day", "popularity", "performance"];

pub fn write_ground_truth(output: impl Write, truth: &GroundTruth) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(GROUND_TRUTH_HEADER)?;
    for trader in &truth.traders {
        let traj = &trader.trajectory;
        let bit = if trader.quality.is_good() { "1" } else { "0" };
        for ((date, pop), perf) in traj.dates.iter().zip(&traj.popularity).zip(&traj.performance) {
            w.write_record([
                traj.trader_id.as_str(),
                bit,
                &date.to_string(),
                &pop.to_string(),
                &perf.map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
