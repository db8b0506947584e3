//! Run configuration: a JSON file (or a previous manifest) plus flag overrides.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use popdyn::analysis::DEFAULT_TOP_CUTOFF;
use popdyn::{AnalysisOptions, BinMode, Condition, MarketConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionSel {
    ZeroOne,
    #[value(name = "not-top100")]
    #[serde(rename = "not-top100")]
    NotTop100,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BinModeSel {
    Left,
    Right,
    Both,
}

/// Everything a run depends on. The seed is `market.master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketConfig,
    /// Directory holding `trades.csv` and `mirrors.csv` for `analyze`;
    /// defaults to `out`.
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub condition: ConditionSel,
    pub bin_mode: BinModeSel,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            market: MarketConfig::reference(),
            input: None,
            out: PathBuf::from("out"),
            condition: ConditionSel::Both,
            bin_mode: BinModeSel::Both,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub condition: Option<ConditionSel>,
    pub window: Option<usize>,
    pub bin_mode: Option<BinModeSel>,
}

impl RunConfig {
    /// Reads a config file. A manifest written by an earlier run is accepted
    /// too, in which case its `config` entry is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if value.get("manifest_version").is_some() {
            value = value
                .get_mut("config")
                .map(serde_json::Value::take)
                .ok_or_else(|| CliError::Config(format!("{}: manifest has no `config` entry", path.display())))?;
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(mut self, o: Overrides) -> Self {
        if let Some(seed) = o.seed {
            self.market.master_seed = seed;
        }
        if let Some(out) = o.out {
            self.out = out;
        }
        if o.input.is_some() {
            self.input = o.input;
        }
        if let Some(c) = o.condition {
            self.condition = c;
        }
        if let Some(w) = o.window {
            self.market.params.window_len = w;
        }
        if let Some(b) = o.bin_mode {
            self.bin_mode = b;
        }
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.market.params.window_len == 0 {
            return Err(CliError::Config("invalid parameter `window_len`: must be >= 1".into()));
        }
        self.market.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn input_dir(&self) -> &Path {
        self.input.as_deref().unwrap_or(&self.out)
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        let not_top = Condition::PopPositiveNotTop100 {
            cutoff: DEFAULT_TOP_CUTOFF,
        };
        let conditions = match self.condition {
            ConditionSel::ZeroOne => vec![Condition::PopZeroOne],
            ConditionSel::NotTop100 => vec![not_top],
            ConditionSel::Both => vec![Condition::PopZeroOne, not_top],
        };
        let bin_modes = match self.bin_mode {
            BinModeSel::Left => vec![BinMode::Left],
            BinModeSel::Right => vec![BinMode::Right],
            BinModeSel::Both => vec![BinMode::Left, BinMode::Right],
        };
        AnalysisOptions {
            window_len: self.market.params.window_len,
            conditions,
            bin_modes,
        }
    }
}
