//! Transaction-log ingestion.
//!
//! Two CSV files make up a log:
//!
//! * trades: `trader_id,close_date,daily_return`
//! * mirrors: `copier_id,target_id,start_date,end_date` (empty `end_date`
//!   means the mirror is still open)
//!
//! From those we rebuild each trader's end-of-day copier count and the rolling
//! performance metric: the mean, over the active days of the trailing window,
//! of each day's mean closed-trade return.

pub mod calendar;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calendar::{is_business_day, next_business_day, prev_business_day, window_ending, BusinessDayRange};

pub const TRADES_HEADER: [&str; 3] = ["trader_id", "close_date", "daily_return"];
pub const MIRRORS_HEADER: [&str; 4] = ["copier_id", "target_id", "start_date", "end_date"];
pub const DEFAULT_WINDOW_LEN: usize = 5;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("bad header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TraderId(pub String);

impl TraderId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TraderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TraderId {
    fn from(s: &str) -> Self {
        TraderId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeRecord {
    pub trader_id: TraderId,
    pub close_date: NaiveDate,
    /// Percent.
    pub daily_return: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorEvent {
    pub copier_id: String,
    pub target_id: TraderId,
    pub start_date: NaiveDate,
    /// Exclusive: the mirror is not counted at the end of this day.
    pub end_date: Option<NaiveDate>,
}

/// End-of-day copier counts, aligned to a [`BusinessDayRange`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopularitySeries {
    pub trader_id: TraderId,
    pub counts: Vec<u32>,
}

/// Rolling performance per business day, aligned to a [`BusinessDayRange`].
/// `None` where the trader closed no trades in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceSeries {
    pub trader_id: TraderId,
    pub values: Vec<Option<f64>>,
}

fn row_err(line: u64, message: impl Into<String>) -> IngestError {
    IngestError::Row {
        line,
        message: message.into(),
    }
}

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<(), IngestError> {
    let headers = reader.headers()?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(IngestError::Header {
            expected: expected.join(","),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn parse_date(field: &str, line: u64, name: &str) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d").map_err(|e| row_err(line, format!("invalid {name} `{field}`: {e}")))
}

fn csv_reader(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(input)
}

pub fn parse_trades(input: impl Read) -> Result<Vec<TradeRecord>, IngestError> {
    let mut reader = csv_reader(input);
    check_header(&mut reader, &TRADES_HEADER)?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let trader = &row[0];
        if trader.is_empty() {
            return Err(row_err(line, "empty trader_id"));
        }
        let close_date = parse_date(&row[1], line, "close_date")?;
        let daily_return: f64 = row[2]
            .trim()
            .parse()
            .map_err(|e| row_err(line, format!("invalid daily_return `{}`: {e}", &row[2])))?;
        if !daily_return.is_finite() {
            return Err(row_err(line, format!("non-finite daily_return `{}`", &row[2])));
        }
        out.push(TradeRecord {
            trader_id: trader.into(),
            close_date,
            daily_return,
        });
    }
    Ok(out)
}

pub fn parse_mirrors(input: impl Read) -> Result<Vec<MirrorEvent>, IngestError> {
    let mut reader = csv_reader(input);
    check_header(&mut reader, &MIRRORS_HEADER)?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row[0].is_empty() || row[1].is_empty() {
            return Err(row_err(line, "empty copier_id or target_id"));
        }
        let start_date = parse_date(&row[2], line, "start_date")?;
        let end_date = match &row[3] {
            "" => None,
            s => Some(parse_date(s, line, "end_date")?),
        };
        if let Some(end) = end_date {
            if end < start_date {
                return Err(row_err(
                    line,
                    format!("end_date {end} precedes start_date {start_date}"),
                ));
            }
        }
        out.push(MirrorEvent {
            copier_id: row[0].to_owned(),
            target_id: row[1].into(),
            start_date,
            end_date,
        });
    }
    Ok(out)
}

pub fn write_trades(output: impl Write, trades: &[TradeRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(TRADES_HEADER)?;
    for t in trades {
        w.write_record([
            t.trader_id.as_str(),
            &t.close_date.to_string(),
            &t.daily_return.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mirrors(output: impl Write, mirrors: &[MirrorEvent]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(MIRRORS_HEADER)?;
    for m in mirrors {
        let end = m.end_date.map(|d| d.to_string()).unwrap_or_default();
        w.write_record([
            m.copier_id.as_str(),
            m.target_id.as_str(),
            &m.start_date.to_string(),
            &end,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Business days covering every date mentioned in the logs.
pub fn log_range(trades: &[TradeRecord], mirrors: &[MirrorEvent]) -> Option<BusinessDayRange> {
    let dates = trades.iter().map(|t| t.close_date).chain(
        mirrors
            .iter()
            .flat_map(|m| std::iter::once(m.start_date).chain(m.end_date)),
    );
    let (lo, hi) = dates.fold(None, |acc: Option<(NaiveDate, NaiveDate)>, d| match acc {
        None => Some((d, d)),
        Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
    })?;
    let range = BusinessDayRange::spanning(lo, hi);
    (!range.is_empty()).then_some(range)
}

/// Every trader appearing in either log, sorted.
pub fn roster(trades: &[TradeRecord], mirrors: &[MirrorEvent]) -> Vec<TraderId> {
    let mut ids: Vec<TraderId> = trades
        .iter()
        .map(|t| t.trader_id.clone())
        .chain(mirrors.iter().map(|m| m.target_id.clone()))
        .collect();
    ids.sort();
    ids.dedup();
    ids
}

/// End-of-day copier counts per target. A mirror counts on day `d` when
/// `start_date <= d` and it is open or `end_date > d`.
///
/// Targets with no mirror overlapping the range are omitted unless listed in
/// `roster`, in which case they get an all-zero series.
pub fn reconstruct_popularity(
    events: &[MirrorEvent],
    range: &BusinessDayRange,
    roster: Option<&[TraderId]>,
) -> BTreeMap<TraderId, PopularitySeries> {
    let len = range.len();
    let mut diffs: BTreeMap<&TraderId, Vec<i64>> = BTreeMap::new();
    for ev in events {
        let from = range.first_index_on_or_after(ev.start_date);
        let to = ev.end_date.map_or(len, |e| range.first_index_on_or_after(e));
        if from >= to {
            continue;
        }
        let d = diffs.entry(&ev.target_id).or_insert_with(|| vec![0; len + 1]);
        d[from] += 1;
        d[to] -= 1;
    }
    let mut out: BTreeMap<TraderId, PopularitySeries> = diffs
        .into_iter()
        .map(|(id, d)| {
            let mut running = 0i64;
            let counts = d[..len]
                .iter()
                .map(|delta| {
                    running += delta;
                    running as u32
                })
                .collect();
            (
                id.clone(),
                PopularitySeries {
                    trader_id: id.clone(),
                    counts,
                },
            )
        })
        .collect();
    for id in roster.unwrap_or_default() {
        out.entry(id.clone()).or_insert_with(|| PopularitySeries {
            trader_id: id.clone(),
            counts: vec![0; len],
        });
    }
    out
}

/// Mean of one day's trade returns. Values are summed in sorted order so the
/// result does not depend on input order.
pub fn day_mean(returns: &mut [f64]) -> Option<f64> {
    if returns.is_empty() {
        return None;
    }
    returns.sort_by(f64::total_cmp);
    Some(returns.iter().sum::<f64>() / returns.len() as f64)
}

/// Mean of the defined per-day means, taken in the given order. `None` when no
/// day is active.
pub fn mean_of_active_days(day_means: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, count) = day_means
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn daily_means<'a>(trades: impl IntoIterator<Item = &'a TradeRecord>) -> BTreeMap<NaiveDate, f64> {
    let mut by_day: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for t in trades {
        by_day.entry(t.close_date).or_default().push(t.daily_return);
    }
    by_day
        .into_iter()
        .filter_map(|(d, mut v)| day_mean(&mut v).map(|m| (d, m)))
        .collect()
}

/// Rolling performance of `trades` (one trader's) on `day`, over the
/// `window_len` business days ending at `day`.
pub fn rolling_performance(trades: &[TradeRecord], day: NaiveDate, window_len: usize) -> Option<f64> {
    let means = daily_means(trades);
    mean_of_active_days(
        window_ending(day, window_len)
            .into_iter()
            .map(|d| means.get(&d).copied()),
    )
}

/// Rolling performance for every trader with trades (plus `roster`) on every
/// day of `range`.
pub fn performance_series(
    trades: &[TradeRecord],
    range: &BusinessDayRange,
    window_len: usize,
    roster: Option<&[TraderId]>,
) -> BTreeMap<TraderId, PerformanceSeries> {
    let mut per_trader: BTreeMap<&TraderId, Vec<&TradeRecord>> = BTreeMap::new();
    for t in trades {
        per_trader.entry(&t.trader_id).or_default().push(t);
    }
    let windows: Vec<Vec<NaiveDate>> = range.days().iter().map(|d| window_ending(*d, window_len)).collect();
    let mut out: BTreeMap<TraderId, PerformanceSeries> = per_trader
        .into_iter()
        .map(|(id, ts)| {
            let means = daily_means(ts);
            let values = windows
                .iter()
                .map(|w| mean_of_active_days(w.iter().map(|d| means.get(d).copied())))
                .collect();
            (
                id.clone(),
                PerformanceSeries {
                    trader_id: id.clone(),
                    values,
                },
            )
        })
        .collect();
    for id in roster.unwrap_or_default() {
        out.entry(id.clone()).or_insert_with(|| PerformanceSeries {
            trader_id: id.clone(),
            values: vec![None; range.len()],
        });
    }
    out
}
