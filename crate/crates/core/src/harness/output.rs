use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::compare::{ResultRow, RowStatus};
use crate::error::{Error, Result};
use crate::io::round_sig;

const CSV_DIGITS: usize = 6;
const JSON_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Serialize)]
struct Rounded<'a> {
    scenario: &'a str,
    strategy: &'a str,
    status: RowStatus,
    g0: f64,
    g_attack: Option<f64>,
    delta_g: Option<f64>,
    agreement_fraction: Option<f64>,
    wall_time_ms: Option<f64>,
    leader_evals: u64,
    follower_candidates: u64,
    config: &'a str,
}

fn rounded(row: &ResultRow, digits: usize) -> Rounded<'_> {
    let r = |x: f64| round_sig(x, digits);
    Rounded {
        scenario: &row.scenario,
        strategy: &row.strategy,
        status: row.status,
        g0: r(row.g0),
        g_attack: row.g_attack.map(r),
        delta_g: row.delta_g.map(r),
        agreement_fraction: row.agreement_fraction.map(r),
        wall_time_ms: row.wall_time_ms.map(r),
        leader_evals: row.leader_evals,
        follower_candidates: row.follower_candidates,
        config: &row.config,
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(rounded(row, CSV_DIGITS))?;
    }
    if rows.is_empty() {
        w.write_record([
            "scenario",
            "strategy",
            "status",
            "g0",
            "g_attack",
            "delta_g",
            "agreement_fraction",
            "wall_time_ms",
            "leader_evals",
            "follower_candidates",
            "config",
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_to_json(rows: &[ResultRow]) -> String {
    let list: Vec<Rounded<'_>> = rows.iter().map(|r| rounded(r, JSON_DIGITS)).collect();
    serde_json::to_string_pretty(&list).expect("serializable") + "\n"
}

/// Writes `<stem>.csv` and/or `<stem>.json` into `dir`.
pub fn write_rows(rows: &[ResultRow], dir: &Path, stem: &str, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for &f in formats {
        let (path, body) = match f {
            OutputFormat::Csv => (dir.join(format!("{stem}.csv")), rows_to_csv(rows)?),
            OutputFormat::Json => (dir.join(format!("{stem}.json")), rows_to_json(rows)),
        };
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
