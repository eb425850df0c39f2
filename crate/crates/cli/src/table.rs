//! CSV result tables, one per (noise, frame length).

use std::cmp::Ordering;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::harness::SerReport;

pub const HEADER: [&str; 7] = [
    "snr_db",
    "algorithm",
    "detector",
    "mean_ser",
    "stderr",
    "failed_runs",
    "mean_iterations",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub algorithm: String,
    pub detector: String,
    /// Empty in the file when no run was scored.
    pub mean_ser: Option<f64>,
    pub stderr: Option<f64>,
    pub failed_runs: usize,
    pub mean_iterations: Option<f64>,
}

impl CsvRow {
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.snr_db
            .total_cmp(&other.snr_db)
            .then_with(|| self.algorithm.cmp(&other.algorithm))
            .then_with(|| self.detector.cmp(&other.detector))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SerTable {
    pub noise: String,
    pub symbols: usize,
    pub rows: Vec<CsvRow>,
}

impl SerTable {
    pub fn file_stem(&self) -> String {
        format!("ser_{}_M{}", self.noise, self.symbols)
    }
}

/// Split a report into per-(noise, M) tables with sorted rows.
pub fn tables(report: &SerReport) -> Vec<SerTable> {
    let mut out: Vec<SerTable> = Vec::new();
    for r in &report.records {
        let noise = r.key.noise.name();
        let idx = match out
            .iter()
            .position(|t| t.noise == noise && t.symbols == r.key.symbols)
        {
            Some(i) => i,
            None => {
                out.push(SerTable {
                    noise: noise.to_string(),
                    symbols: r.key.symbols,
                    rows: Vec::new(),
                });
                out.len() - 1
            }
        };
        out[idx].rows.push(CsvRow {
            snr_db: r.key.snr_db,
            algorithm: r.algorithm_name().to_string(),
            detector: r.detector.name().to_string(),
            mean_ser: r.mean_ser,
            stderr: r.ser_stderr,
            failed_runs: r.failed_runs,
            mean_iterations: r.mean_iterations,
        });
    }
    for t in &mut out {
        t.rows.sort_by(CsvRow::canonical_cmp);
    }
    out.sort_by(|a, b| a.noise.cmp(&b.noise).then(a.symbols.cmp(&b.symbols)));
    out
}

fn field(v: Option<f64>) -> String {
    // `{}` on f64 is the shortest text that parses back to the same value.
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv_string(table: &SerTable) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.snr_db.to_string(),
            r.algorithm.clone(),
            r.detector.clone(),
            field(r.mean_ser),
            field(r.stderr),
            r.failed_runs.to_string(),
            field(r.mean_iterations),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

fn with_path(path: &Path, e: impl std::fmt::Display) -> io::Error {
    io::Error::other(format!("{}: {e}", path.display()))
}

pub fn write_tables(tables: &[SerTable], dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| with_path(dir, e))?;
    let mut written = Vec::new();
    for t in tables {
        let path = dir.join(format!("{}.csv", t.file_stem()));
        fs::write(&path, to_csv_string(t)?).map_err(|e| with_path(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_csv(report: &SerReport, dir: &Path) -> io::Result<Vec<PathBuf>> {
    write_tables(&tables(report), dir)
}

fn parse_opt(path: &Path, s: &str) -> io::Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| with_path(path, format!("bad number `{s}`: {e}")))
}

/// Parse one table; noise and M come from the file name.
pub fn read_table(path: &Path) -> io::Result<SerTable> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| with_path(path, "not a result table"))?;
    let (noise, symbols) = stem
        .strip_prefix("ser_")
        .and_then(|s| s.rsplit_once("_M"))
        .and_then(|(n, m)| m.parse::<usize>().ok().map(|m| (n.to_string(), m)))
        .ok_or_else(|| with_path(path, "file name is not ser_<noise>_M<M>.csv"))?;

    let mut reader = csv::Reader::from_path(path).map_err(|e| with_path(path, e))?;
    let header = reader.headers().map_err(|e| with_path(path, e))?;
    if header.iter().ne(HEADER) {
        return Err(with_path(path, "unexpected header"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record.map_err(|e| with_path(path, e))?;
        if rec.len() != HEADER.len() {
            return Err(with_path(path, "wrong field count"));
        }
        rows.push(CsvRow {
            snr_db: parse_opt(path, &rec[0])?.ok_or_else(|| with_path(path, "missing snr_db"))?,
            algorithm: rec[1].to_string(),
            detector: rec[2].to_string(),
            mean_ser: parse_opt(path, &rec[3])?,
            stderr: parse_opt(path, &rec[4])?,
            failed_runs: rec[5]
                .parse()
                .map_err(|e| with_path(path, format!("bad failed_runs: {e}")))?,
            mean_iterations: parse_opt(path, &rec[6])?,
        });
    }
    rows.sort_by(CsvRow::canonical_cmp);
    Ok(SerTable { noise, symbols, rows })
}

/// All `ser_*.csv` tables in `dir`, in canonical order.
pub fn read_tables(dir: &Path) -> io::Result<Vec<SerTable>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| with_path(dir, e))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if name.starts_with("ser_") && name.ends_with(".csv") {
            out.push(read_table(&path)?);
        }
    }
    out.sort_by(|a, b| a.noise.cmp(&b.noise).then(a.symbols.cmp(&b.symbols)));
    Ok(out)
}
