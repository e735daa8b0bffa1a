//! CSV ingestion and tabular output.
//!
//! Accepted layouts (header row required, columns matched by name):
//!
//! * `case_id, forecast, obs`
//! * `case_id, forecast_A, forecast_B, obs`
//! * `case_id, obs, m1, ..., mk`

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::crps::EnsembleCase;
use crate::error::{Error, Result};
use crate::scoring::ForecastCase;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

struct Table {
    source: String,
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::parse(format!("{source}:1"), e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::parse(format!("{source}:{line}"), e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        if rows.is_empty() {
            return Err(Error::validation(format!("no cases in {source}")));
        }
        Ok(Table {
            source: source.to_string(),
            headers,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                Error::parse(
                    format!("{}:1", self.source),
                    format!(
                        "missing column '{name}' (found: {})",
                        self.headers.join(", ")
                    ),
                )
            })
    }

    fn text(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<String> {
        match rec.get(col) {
            Some(v) if !v.is_empty() => Ok(v.to_string()),
            _ => Err(Error::parse(
                format!("{}:{line}", self.source),
                format!("empty field '{}'", self.headers[col]),
            )),
        }
    }

    fn number(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<f64> {
        let raw = self.text(line, rec, col)?;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::parse(
                format!("{}:{line}", self.source),
                format!(
                    "field '{}' is not a finite number: '{raw}'",
                    self.headers[col]
                ),
            )),
        }
    }
}

pub fn read_cases_from<R: Read>(reader: R, source: &str) -> Result<Vec<ForecastCase>> {
    let t = Table::read(reader, source)?;
    let (id, fc, obs) = (
        t.column("case_id")?,
        t.column("forecast")?,
        t.column("obs")?,
    );
    t.rows
        .iter()
        .map(|(line, rec)| {
            Ok(ForecastCase {
                case_id: t.text(*line, rec, id)?,
                forecast: t.number(*line, rec, fc)?,
                observation: t.number(*line, rec, obs)?,
            })
        })
        .collect()
}

/// Reads `case_id, forecast, obs`.
pub fn read_cases(path: &Path) -> Result<Vec<ForecastCase>> {
    read_cases_from(open(path)?, &path.display().to_string())
}

pub fn read_paired_from<R: Read>(
    reader: R,
    source: &str,
) -> Result<(Vec<ForecastCase>, Vec<ForecastCase>)> {
    let t = Table::read(reader, source)?;
    let id = t.column("case_id")?;
    let (fa, fb) = (t.column("forecast_A")?, t.column("forecast_B")?);
    let obs = t.column("obs")?;
    let mut a = Vec::with_capacity(t.rows.len());
    let mut b = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let case_id = t.text(*line, rec, id)?;
        let y = t.number(*line, rec, obs)?;
        a.push(ForecastCase::new(
            case_id.clone(),
            t.number(*line, rec, fa)?,
            y,
        ));
        b.push(ForecastCase::new(case_id, t.number(*line, rec, fb)?, y));
    }
    Ok((a, b))
}

/// Reads `case_id, forecast_A, forecast_B, obs`.
pub fn read_paired(path: &Path) -> Result<(Vec<ForecastCase>, Vec<ForecastCase>)> {
    read_paired_from(open(path)?, &path.display().to_string())
}

pub fn read_ensembles_from<R: Read>(reader: R, source: &str) -> Result<Vec<EnsembleCase>> {
    let t = Table::read(reader, source)?;
    let (id, obs) = (t.column("case_id")?, t.column("obs")?);
    let members: Vec<usize> = (0..t.headers.len())
        .filter(|&k| {
            let h = &t.headers[k];
            h.len() > 1
                && (h.starts_with('m') || h.starts_with('M'))
                && h[1..].chars().all(|c| c.is_ascii_digit())
        })
        .collect();
    if members.is_empty() {
        return Err(Error::parse(
            format!("{source}:1"),
            "no member columns m1..mk",
        ));
    }
    t.rows
        .iter()
        .map(|(line, rec)| {
            Ok(EnsembleCase {
                case_id: t.text(*line, rec, id)?,
                observation: t.number(*line, rec, obs)?,
                members: members
                    .iter()
                    .map(|&k| t.number(*line, rec, k))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Reads `case_id, obs, m1, ..., mk`.
pub fn read_ensembles(path: &Path) -> Result<Vec<EnsembleCase>> {
    read_ensembles_from(open(path)?, &path.display().to_string())
}

/// Writes a header and rows of already formatted fields.
pub fn write_table<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::validation(format!("writing CSV: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "csv output".into(),
        source: e,
    })
}

pub fn write_table_file(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    write_table(f, header, rows)
}
