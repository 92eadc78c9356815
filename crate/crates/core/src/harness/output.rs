use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::metrics::MetricsSummary;
use super::run::{ExperimentOutput, RunRecord};
use crate::error::{Error, Result};

/// Column order of the per-step CSV.
pub const RECORD_COLUMNS: [&str; 9] = [
    "run_id",
    "step",
    "tau",
    "action",
    "reward",
    "discounted_return",
    "legal_eat",
    "cluster_count",
    "alpha",
];

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.display().to_string(),
            line: 0,
            msg: format!("{other:?}"),
        },
    }
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    write_rows(records, path)
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != RECORD_COLUMNS {
        return Err(Error::Format {
            path: path.display().to_string(),
            line: 1,
            msg: format!("header {header:?}, expected {RECORD_COLUMNS:?}"),
        });
    }
    read_rows(path)
}

/// Per-replicate totals, one row per run.
pub fn emit_summary_csv(summary: &MetricsSummary, path: &Path) -> Result<()> {
    write_rows(&summary.runs, path)
}

#[derive(Serialize)]
struct CurveRow {
    step: usize,
    cumulative_return: f64,
    exploitation_rate: Option<f64>,
}

/// Writes `curves.csv` (per-step curves) and `summary.json` into `dir`.
pub fn emit_plot_data(summary: &MetricsSummary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows: Vec<CurveRow> = summary
        .cumulative_return
        .iter()
        .zip(&summary.exploitation)
        .enumerate()
        .map(|(step, (&c, &e))| CurveRow {
            step,
            cumulative_return: c,
            exploitation_rate: e,
        })
        .collect();
    write_rows(&rows, &dir.join("curves.csv"))?;
    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(summary).map_err(|e| Error::Format {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    write_text(&path, &json)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Writes every artifact of a run into `dir`: `runs.csv`, `worlds.csv`,
/// `per_run.csv`, `curves.csv`, `summary.json` and the resolved
/// `config.toml`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    emit_csv(&out.records, &dir.join("runs.csv"))?;
    write_rows(&out.worlds, &dir.join("worlds.csv"))?;
    emit_summary_csv(&out.summary, &dir.join("per_run.csv"))?;
    emit_plot_data(&out.summary, dir)?;
    write_text(&dir.join("config.toml"), &out.config.to_toml())
}
