//! Dataset CSV: header `x1,x2,label`, one point per row, labels 0 or 1.

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use lukmlp_core::num::Sig17;
use lukmlp_core::training::EpochRecord;
use lukmlp_core::Dataset;

pub const HEADER: [&str; 3] = ["x1", "x2", "label"];

#[derive(Debug)]
pub enum CsvError {
    Io(io::Error),
    /// `line` is 1-based and counts the header.
    Row { line: u64, message: String },
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsvError::Io(e) => write!(f, "{e}"),
            CsvError::Row { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for CsvError {}

impl From<io::Error> for CsvError {
    fn from(e: io::Error) -> Self {
        CsvError::Io(e)
    }
}

fn row_error(line: u64, message: impl Into<String>) -> CsvError {
    CsvError::Row {
        line,
        message: message.into(),
    }
}

fn from_csv(e: csv::Error, fallback_line: u64) -> CsvError {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    match e.into_kind() {
        csv::ErrorKind::Io(e) => CsvError::Io(e),
        csv::ErrorKind::UnequalLengths { len, .. } => row_error(line, format!("expected 3 fields, found {len}")),
        csv::ErrorKind::Utf8 { .. } => row_error(line, "invalid UTF-8"),
        other => row_error(line, format!("{other:?}")),
    }
}

pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = rdr.records();
    match records.next() {
        None => return Err(row_error(1, "missing header")),
        Some(header) => {
            let header = header.map_err(|e| from_csv(e, 1))?;
            if header.iter().map(str::trim).ne(HEADER) {
                return Err(row_error(1, format!("expected header {}", HEADER.join(","))));
            }
        }
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (k, record) in records.enumerate() {
        let fallback = k as u64 + 2;
        let record = record.map_err(|e| from_csv(e, fallback))?;
        let line = record.position().map(|p| p.line()).unwrap_or(fallback);
        let coord = |i: usize| -> Result<f64, CsvError> {
            let field = record[i].trim();
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(row_error(line, format!("{} is not a finite number: {field:?}", HEADER[i]))),
            }
        };
        let x1 = coord(0)?;
        let x2 = coord(1)?;
        let label = match record[2].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(row_error(line, format!("label must be 0 or 1, found {other:?}"))),
        };
        features.push([x1, x2]);
        labels.push(label);
    }
    Ok(Dataset { features, labels })
}

pub fn write_dataset<W: Write>(writer: W, ds: &Dataset) -> Result<(), CsvError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(HEADER).map_err(|e| from_csv(e, 1))?;
    for (p, l) in ds.features.iter().zip(&ds.labels) {
        w.write_record([Sig17(p[0]).to_string(), Sig17(p[1]).to_string(), l.to_string()])
            .map_err(|e| from_csv(e, 0))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Dataset, CsvError> {
    read_dataset(BufReader::new(File::open(path)?))
}

pub fn write_csv(ds: &Dataset, path: &Path) -> Result<(), CsvError> {
    write_dataset(BufWriter::new(File::create(path)?), ds)
}

pub const HISTORY_HEADER: [&str; 3] = ["epoch", "mean_loss", "train_accuracy"];

/// One row per epoch; losses and accuracies in 17 significant digits.
pub fn write_history_to<W: Write>(writer: W, history: &[EpochRecord]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HISTORY_HEADER).map_err(|e| from_csv(e, 1))?;
    for h in history {
        w.write_record([
            h.epoch.to_string(),
            Sig17(h.mean_loss).to_string(),
            Sig17(h.train_accuracy).to_string(),
        ])
        .map_err(|e| from_csv(e, 0))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_history(history: &[EpochRecord], path: &Path) -> Result<(), CsvError> {
    write_history_to(BufWriter::new(File::create(path)?), history)
}
