//! Binned summaries of popularity change for plotting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ols::least_squares;
use super::{sorted_by_key, AnalysisError, UserDayPoint};

/// z value for a two-sided 95% Gaussian interval.
pub const Z_95: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinMode {
    /// Popularity 0 or 1; performance to the nearest 25, capped at +-50.
    Left,
    /// Popularity capped at 5; performance to the nearest 10, capped at +-40.
    Right,
}

impl BinMode {
    pub fn name(self) -> &'static str {
        match self {
            BinMode::Left => "left",
            BinMode::Right => "right",
        }
    }

    fn step(self) -> f64 {
        match self {
            BinMode::Left => 25.0,
            BinMode::Right => 10.0,
        }
    }

    /// Largest |bin index|.
    fn max_index(self) -> i64 {
        match self {
            BinMode::Left => 2,
            BinMode::Right => 4,
        }
    }

    pub fn pop_bin(self, popularity: u32) -> Result<u32, AnalysisError> {
        match self {
            BinMode::Left if popularity > 1 => Err(AnalysisError::Contract(format!(
                "left-plot binning needs popularity 0 or 1, got {popularity}"
            ))),
            BinMode::Left => Ok(popularity),
            BinMode::Right => Ok(popularity.min(5)),
        }
    }

    fn perf_index(self, performance: f64) -> i64 {
        let idx = (performance / self.step()).round() as i64;
        idx.clamp(-self.max_index(), self.max_index())
    }

    pub fn perf_bin(self, performance: f64) -> f64 {
        self.perf_index(performance) as f64 * self.step() + 0.0
    }
}

/// Rounds to the nearest multiple of `step`, halves away from zero.
pub fn round_to_multiple(x: f64, step: f64) -> f64 {
    (x / step).round() * step + 0.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCell {
    pub pop_bin: u32,
    pub perf_bin: f64,
    pub mean_delta: f64,
    pub count: usize,
    /// `Z_95 * sd / sqrt(count)`, zero for singleton cells.
    pub ci_half_width: f64,
}

/// Mean change per (popularity bin, performance bin) cell, ordered by
/// popularity bin then performance bin.
pub fn bin_summaries(points: &[UserDayPoint], mode: BinMode) -> Result<Vec<BinnedCell>, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::Contract("cannot bin an empty point set".into()));
    }
    let mut cells: BTreeMap<(u32, i64), Vec<f64>> = BTreeMap::new();
    for p in sorted_by_key(points) {
        let key = (mode.pop_bin(p.popularity)?, mode.perf_index(p.performance));
        cells.entry(key).or_default().push(p.delta as f64);
    }
    Ok(cells
        .into_iter()
        .map(|((pop_bin, idx), deltas)| {
            let count = deltas.len();
            let mean = deltas.iter().sum::<f64>() / count as f64;
            let sd = if count > 1 {
                (deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (count - 1) as f64).sqrt()
            } else {
                0.0
            };
            BinnedCell {
                pop_bin,
                perf_bin: idx as f64 * mode.step() + 0.0,
                mean_delta: mean,
                count,
                ci_half_width: Z_95 * sd / (count as f64).sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupLine {
    pub pop_bin: u32,
    pub slope: f64,
    pub intercept: f64,
}

/// Straight line of change on raw performance, fitted separately within each
/// popularity bin.
pub fn group_fit_lines(points: &[UserDayPoint], mode: BinMode) -> Result<Vec<GroupLine>, AnalysisError> {
    let mut groups: BTreeMap<u32, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for p in sorted_by_key(points) {
        let g = groups.entry(mode.pop_bin(p.popularity)?).or_default();
        g.0.push(p.performance);
        g.1.push(p.delta as f64);
    }
    groups
        .into_iter()
        .map(|(pop_bin, (x, y))| {
            let fit =
                least_squares(&[vec![1.0; x.len()], x], &["intercept", "performance"], &y).map_err(|e| match e {
                    AnalysisError::Singular { column } | AnalysisError::SingularGroup { column, .. } => {
                        AnalysisError::SingularGroup { pop_bin, column }
                    }
                    AnalysisError::TooFewObservations { .. } => AnalysisError::SingularGroup {
                        pop_bin,
                        column: "performance".into(),
                    },
                    other => other,
                })?;
            Ok(GroupLine {
                pop_bin,
                intercept: fit.coefficients[0],
                slope: fit.coefficients[1],
            })
        })
        .collect()
}
