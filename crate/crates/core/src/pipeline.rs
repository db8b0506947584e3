//! End-to-end analysis of a transaction log: reconstruction, observations,
//! the two subset regressions and the plot summaries.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    apply_filters, bin_summaries, build_points, group_fit_lines, ols_interaction_fit, AnalysisError, BinMode,
    BinnedCell, Condition, DailyRanks, GroupLine, RegressionResult, UserDayPoint, DEFAULT_TOP_CUTOFF,
};
use crate::ingest::{
    log_range, performance_series, reconstruct_popularity, roster, MirrorEvent, TradeRecord, DEFAULT_WINDOW_LEN,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub window_len: usize,
    pub conditions: Vec<Condition>,
    pub bin_modes: Vec<BinMode>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            window_len: DEFAULT_WINDOW_LEN,
            conditions: vec![
                Condition::PopZeroOne,
                Condition::PopPositiveNotTop100 {
                    cutoff: DEFAULT_TOP_CUTOFF,
                },
            ],
            bin_modes: vec![BinMode::Left, BinMode::Right],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub n_points: usize,
    pub regressions: Vec<(Condition, RegressionResult)>,
    pub bins: Vec<(BinMode, Vec<BinnedCell>)>,
    /// Per-popularity lines for the zero/one subset; empty unless left-mode
    /// bins were requested.
    pub lines: Vec<GroupLine>,
}

/// Condition whose subset feeds each plot.
fn subset_for(mode: BinMode, conditions: &[Condition]) -> Condition {
    match mode {
        BinMode::Left => Condition::PopZeroOne,
        BinMode::Right => conditions
            .iter()
            .copied()
            .find(|c| matches!(c, Condition::PopPositiveNotTop100 { .. }))
            .unwrap_or(Condition::PopPositiveNotTop100 {
                cutoff: DEFAULT_TOP_CUTOFF,
            }),
    }
}

/// All observations in the logs together with the ranks needed to filter them.
pub fn observations(
    trades: &[TradeRecord],
    mirrors: &[MirrorEvent],
    window_len: usize,
) -> Result<(Vec<UserDayPoint>, DailyRanks), AnalysisError> {
    if window_len == 0 {
        return Err(AnalysisError::Contract("window length must be >= 1".into()));
    }
    let range = log_range(trades, mirrors).ok_or_else(|| AnalysisError::Contract("logs contain no dates".into()))?;
    let ids = roster(trades, mirrors);
    let popularity = reconstruct_popularity(mirrors, &range, Some(&ids));
    let performance = performance_series(trades, &range, window_len, Some(&ids));
    let ranks = DailyRanks::compute(&popularity, &range);
    Ok((build_points(&popularity, &performance, &range), ranks))
}

pub fn analyze_logs(
    trades: &[TradeRecord],
    mirrors: &[MirrorEvent],
    options: &AnalysisOptions,
) -> Result<AnalysisReport, AnalysisError> {
    let (points, ranks) = observations(trades, mirrors, options.window_len)?;

    let mut regressions = Vec::new();
    for condition in &options.conditions {
        let subset = apply_filters(&points, condition, &ranks);
        regressions.push((*condition, ols_interaction_fit(&subset)?));
    }

    let mut bins = Vec::new();
    let mut lines = Vec::new();
    for &mode in &options.bin_modes {
        let subset = apply_filters(&points, &subset_for(mode, &options.conditions), &ranks);
        bins.push((mode, bin_summaries(&subset, mode)?));
        if mode == BinMode::Left {
            lines = group_fit_lines(&subset, mode)?;
        }
    }

    Ok(AnalysisReport {
        n_points: points.len(),
        regressions,
        bins,
        lines,
    })
}
