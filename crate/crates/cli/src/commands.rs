use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use popdyn::analysis::report::{write_bins_csv, write_lines_csv, write_regression_csv};
use popdyn::ingest::{parse_mirrors, parse_trades, write_mirrors, write_trades};
use popdyn::simulator::write_ground_truth;
use popdyn::{analyze_logs, emit_logs, simulate_market, IngestError};

use crate::config::RunConfig;
use crate::error::CliError;

pub const TRADES: &str = "trades.csv";
pub const MIRRORS: &str = "mirrors.csv";
pub const GROUND_TRUTH: &str = "ground_truth.csv";
pub const REGRESSION: &str = "regression.csv";
pub const BINS: &str = "bins.csv";
pub const LINES: &str = "lines.csv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    command: &'a str,
    tool_version: &'static str,
    library_version: &'static str,
    config: &'a RunConfig,
    /// sha256 of each file read, keyed by path as given.
    inputs: BTreeMap<String, String>,
    /// sha256 of each file written, keyed by file name.
    outputs: BTreeMap<String, String>,
}

/// Files written so far in this run, with their digests.
#[derive(Default)]
struct Written(BTreeMap<String, String>);

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Written {
    /// Renders into memory, then writes the file and records its digest.
    fn emit(
        &mut self,
        dir: &Path,
        name: &str,
        render: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = dir.join(name);
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| CliError::io(&path, e))?;
        let mut file = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
        file.write_all(&buf)
            .and_then(|()| file.flush())
            .map_err(|e| CliError::io(&path, e))?;
        self.0.insert(name.to_owned(), sha256_hex(&buf));
        Ok(())
    }
}

fn ingest_io(e: IngestError) -> std::io::Error {
    match e {
        IngestError::Io(e) => e,
        other => std::io::Error::other(other),
    }
}

fn prepare_out(config: &RunConfig) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
    Ok(config.out.clone())
}

fn write_manifest(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    inputs: BTreeMap<String, String>,
    outputs: Written,
) -> Result<(), CliError> {
    let manifest = Manifest {
        manifest_version: 1,
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        library_version: popdyn::VERSION,
        config,
        inputs,
        outputs: outputs.0,
    };
    let path = dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::io(&path, e.into()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

fn simulate_into(config: &RunConfig, dir: &Path, written: &mut Written) -> Result<(), CliError> {
    let truth = simulate_market(&config.market).map_err(|e| CliError::Config(e.to_string()))?;
    let (trades, mirrors) = emit_logs(&truth);
    written.emit(dir, TRADES, |w| write_trades(w, &trades).map_err(ingest_io))?;
    written.emit(dir, MIRRORS, |w| write_mirrors(w, &mirrors).map_err(ingest_io))?;
    written.emit(dir, GROUND_TRUTH, |w| write_ground_truth(w, &truth).map_err(ingest_io))?;
    Ok(())
}

fn read_input(path: &Path, inputs: &mut BTreeMap<String, String>) -> Result<Vec<u8>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    inputs.insert(path.display().to_string(), sha256_hex(&bytes));
    Ok(bytes)
}

fn analyze_into(
    config: &RunConfig,
    input_dir: &Path,
    dir: &Path,
    inputs: &mut BTreeMap<String, String>,
    written: &mut Written,
) -> Result<(), CliError> {
    let trades_path = input_dir.join(TRADES);
    let mirrors_path = input_dir.join(MIRRORS);
    let trades_bytes = read_input(&trades_path, inputs)?;
    let mirrors_bytes = read_input(&mirrors_path, inputs)?;
    let trades = parse_trades(trades_bytes.as_slice()).map_err(|e| CliError::input(&trades_path, e))?;
    let mirrors = parse_mirrors(mirrors_bytes.as_slice()).map_err(|e| CliError::input(&mirrors_path, e))?;

    let report = analyze_logs(&trades, &mirrors, &config.analysis_options())?;
    written.emit(dir, REGRESSION, |w| Ok(write_regression_csv(w, &report.regressions)?))?;
    written.emit(dir, BINS, |w| Ok(write_bins_csv(w, &report.bins)?))?;
    written.emit(dir, LINES, |w| Ok(write_lines_csv(w, &report.lines)?))?;
    Ok(())
}

pub fn simulate(config: &RunConfig) -> Result<(), CliError> {
    config.validate()?;
    let dir = prepare_out(config)?;
    let mut written = Written::default();
    simulate_into(config, &dir, &mut written)?;
    write_manifest(&dir, "simulate", config, BTreeMap::new(), written)
}

pub fn analyze(config: &RunConfig) -> Result<(), CliError> {
    if config.market.params.window_len == 0 {
        return Err(CliError::Config("invalid parameter `window_len`: must be >= 1".into()));
    }
    let dir = prepare_out(config)?;
    let mut inputs = BTreeMap::new();
    let mut written = Written::default();
    analyze_into(config, config.input_dir(), &dir, &mut inputs, &mut written)?;
    write_manifest(&dir, "analyze", config, inputs, written)
}

pub fn pipeline(config: &RunConfig) -> Result<(), CliError> {
    config.validate()?;
    let dir = prepare_out(config)?;
    let mut written = Written::default();
    simulate_into(config, &dir, &mut written)?;
    // inputs are this run's own outputs and are already hashed there
    analyze_into(config, &dir, &dir, &mut BTreeMap::new(), &mut written)?;
    write_manifest(&dir, "pipeline", config, BTreeMap::new(), written)
}
