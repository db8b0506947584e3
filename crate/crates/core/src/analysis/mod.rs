//! User-day observations, subset conditions, the interaction regression and
//! binned plot summaries.
//!
//! An observation for trader `u` on day `d` pairs rolling performance through
//! `d` and the end-of-day copier count with the change to the next day's
//! count. Only user-days on which the trader has defined performance (some
//! trading activity in the window) become observations.

pub mod bins;
pub mod ols;
pub mod report;
pub mod student_t;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{BusinessDayRange, PerformanceSeries, PopularitySeries, TraderId};

pub use bins::{bin_summaries, group_fit_lines, round_to_multiple, BinMode, BinnedCell, GroupLine, Z_95};
pub use ols::{least_squares, ols_interaction_fit, LeastSquaresFit, RegressionResult, INTERACTION_TERMS};
pub use student_t::{regularized_incomplete_beta, student_t_sf};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("singular design: column `{column}` is linearly dependent on earlier columns")]
    Singular { column: String },
    #[error("singular design in popularity group {pop_bin}: column `{column}` is degenerate")]
    SingularGroup { pop_bin: u32, column: String },
    #[error("need at least {min} observations, got {n_obs}")]
    TooFewObservations { n_obs: usize, min: usize },
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },
    #[error("{0}")]
    Contract(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserDayPoint {
    pub trader_id: TraderId,
    pub day: NaiveDate,
    pub popularity: u32,
    pub performance: f64,
    /// Next day's count minus this day's.
    pub delta: i64,
}

pub(crate) fn sorted_by_key(points: &[UserDayPoint]) -> Vec<&UserDayPoint> {
    let mut v: Vec<&UserDayPoint> = points.iter().collect();
    v.sort_by(|a, b| (&a.trader_id, a.day).cmp(&(&b.trader_id, b.day)));
    v
}

pub const DEFAULT_TOP_CUTOFF: u32 = 100;

/// Subsets that sidestep ranking-page position bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    /// Zero or one copiers.
    PopZeroOne,
    /// At least one copier and outside the day's `cutoff` most popular.
    PopPositiveNotTop100 { cutoff: u32 },
}

impl Condition {
    pub fn not_top(cutoff: u32) -> Result<Self, AnalysisError> {
        if cutoff == 0 {
            return Err(AnalysisError::Contract("rank cutoff must be >= 1".into()));
        }
        Ok(Condition::PopPositiveNotTop100 { cutoff })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Condition::PopZeroOne => "zero-one",
            Condition::PopPositiveNotTop100 { .. } => "not-top100",
        }
    }
}

/// Per-day competition ranks by popularity, descending: a trader's rank is one
/// plus the number of traders strictly more popular that day, so ties share
/// the best rank of their group.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyRanks {
    days: Vec<NaiveDate>,
    ranks: BTreeMap<TraderId, Vec<u32>>,
}

impl DailyRanks {
    pub fn compute(popularity: &BTreeMap<TraderId, PopularitySeries>, range: &BusinessDayRange) -> Self {
        let len = range.len();
        let mut ranks: BTreeMap<TraderId, Vec<u32>> = popularity.keys().map(|id| (id.clone(), vec![0; len])).collect();
        let mut day_counts: Vec<u32> = Vec::with_capacity(popularity.len());
        for i in 0..len {
            day_counts.clear();
            day_counts.extend(popularity.values().map(|s| s.counts[i]));
            day_counts.sort_unstable_by(|a, b| b.cmp(a));
            for (id, series) in popularity {
                let n = series.counts[i];
                let greater = day_counts.partition_point(|&c| c > n);
                ranks.get_mut(id).expect("rank row per trader")[i] = greater as u32 + 1;
            }
        }
        DailyRanks {
            days: range.days().to_vec(),
            ranks,
        }
    }

    pub fn rank(&self, trader: &TraderId, day: NaiveDate) -> Option<u32> {
        let i = self.days.binary_search(&day).ok()?;
        self.ranks.get(trader).map(|r| r[i])
    }
}

/// One observation per trader-day with defined performance and a following
/// day in range. The last day of the range yields no observations.
///
/// Traders with performance but no popularity series are treated as having
/// zero copiers throughout.
pub fn build_points(
    popularity: &BTreeMap<TraderId, PopularitySeries>,
    performance: &BTreeMap<TraderId, PerformanceSeries>,
    range: &BusinessDayRange,
) -> Vec<UserDayPoint> {
    let len = range.len();
    let zeros = vec![0u32; len];
    let mut out = Vec::new();
    for (id, perf) in performance {
        let counts = popularity.get(id).map_or(&zeros, |s| &s.counts);
        for i in 0..len.saturating_sub(1) {
            if let Some(q) = perf.values[i] {
                out.push(UserDayPoint {
                    trader_id: id.clone(),
                    day: range.days()[i],
                    popularity: counts[i],
                    performance: q,
                    delta: i64::from(counts[i + 1]) - i64::from(counts[i]),
                });
            }
        }
    }
    out
}

/// Whether a single point satisfies `condition` (including the no-loss rule).
pub fn satisfies(point: &UserDayPoint, condition: &Condition, ranks: &DailyRanks) -> bool {
    if point.delta < 0 {
        return false;
    }
    match *condition {
        Condition::PopZeroOne => point.popularity <= 1,
        Condition::PopPositiveNotTop100 { cutoff } => {
            point.popularity > 0 && ranks.rank(&point.trader_id, point.day).is_some_and(|r| r > cutoff)
        }
    }
}

/// Keeps points that did not lose copiers and meet `condition`. Under the
/// not-top condition, a trader tied with the cutoff-th most popular value is
/// excluded.
pub fn apply_filters(points: &[UserDayPoint], condition: &Condition, ranks: &DailyRanks) -> Vec<UserDayPoint> {
    points
        .iter()
        .filter(|p| satisfies(p, condition, ranks))
        .cloned()
        .collect()
}
