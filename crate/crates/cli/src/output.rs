//! Report envelopes and atomic file writes.

use crate::commands::{Outcome, Status};
use crate::config::RunConfig;
use crate::error::CliError;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: &str = "1";

/// The deterministic report: no timestamps, host data or paths.
pub fn report(cfg: &RunConfig, outcome: &Outcome) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "status": outcome.status,
        "config": cfg,
        "result": outcome.result,
    })
}

pub fn metadata(elapsed_seconds: f64, threads: usize, status: Status) -> Value {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "dimmax",
        "version": env!("CARGO_PKG_VERSION"),
        "unix_timestamp": timestamp,
        "elapsed_seconds": elapsed_seconds,
        "threads": threads,
        "status": status,
    })
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// Writes `body` to a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, body: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(body.as_bytes())
        .map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Writes the artifacts selected by the format and returns their paths.
pub fn write_all(
    cfg: &RunConfig,
    outcome: &Outcome,
    meta: &Value,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| io_error(&cfg.out_dir, e))?;
    let name = serde_json::to_value(cfg.command)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .expect("command names are strings");
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    if cfg.format.json() {
        files.push((
            cfg.out_dir.join(format!("{name}.json")),
            pretty(&report(cfg, outcome)),
        ));
        files.push((cfg.out_dir.join(format!("{name}.meta.json")), pretty(meta)));
    }
    if cfg.format.csv() {
        if let Some(csv) = &outcome.weights_csv {
            files.push((cfg.out_dir.join(format!("{name}_weights.csv")), csv.clone()));
        }
    }
    if cfg.format.tsv() {
        if let Some(tsv) = &outcome.tail_tsv {
            files.push((cfg.out_dir.join(format!("{name}_tail.tsv")), tsv.clone()));
        }
    }
    for (path, body) in &files {
        write_atomic(path, body)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
