//! CSV and metadata files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use specden_core::TimeSeries;

use crate::error::{HarnessError, Result};
use crate::experiment::{ErrorRecord, Metadata};

pub const CSV_HEADER: &str = "trial,k,s,empirical_error,expected_bound,highprob_threshold";

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

/// Write records with the fixed header. An empty slice gives a header-only
/// file.
pub fn write_csv<W: Write>(records: &[ErrorRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

pub fn emit_csv(records: &[ErrorRecord], path: &Path) -> Result<()> {
    write_csv(records, create(path)?)
}

pub fn load_csv(path: &Path) -> Result<Vec<ErrorRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{CSV_HEADER}`"),
        });
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row.map_err(|e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line());
            HarnessError::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            }
        })?);
    }
    Ok(out)
}

/// Load a numeric CSV, one sample per row and one column per component.
/// A leading non-numeric row is taken as a header; lines starting with `#`
/// are skipped.
pub fn load_series(path: &Path) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let parse_err = |line: u64, message: String| HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut data = Vec::new();
    let mut dim = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if i == 0 && rec.iter().all(|f| f.parse::<f64>().is_err()) => continue,
            Err(e) => {
                let field = rec.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or_default();
                return Err(parse_err(line, format!("`{field}` is not a number ({e})")));
            }
        };
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(parse_err(line, format!("non-finite value {bad}")));
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(parse_err(line, format!("expected {d} columns, found {}", row.len())));
            }
            _ => {}
        }
        data.extend(row);
    }
    let dim = dim.ok_or_else(|| parse_err(0, "no data rows".to_string()))?;
    Ok(TimeSeries::from_flat(data, dim)?)
}

pub fn write_metadata(meta: &Metadata, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, meta)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| HarnessError::io(path, e))
}
