//! CSV reading and writing for sweep records.

use std::io::{Read, Write};

use dense_coding::experiments::ExperimentRecord;

pub const HEADER: [&str; 6] = ["p", "q", "fidelity", "qd", "eof", "capacity"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_records<W: Write>(writer: W, records: &[ExperimentRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([r.p, r.q, r.fidelity, r.qd, r.eof, r.capacity].map(format_value))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug)]
pub enum ReadError {
    Csv(csv::Error),
    Header(Vec<String>),
}

impl std::fmt::Display for ReadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReadError::Csv(e) => write!(f, "{e}"),
            ReadError::Header(found) => write!(
                f,
                "expected header {:?}, found {:?}",
                HEADER.join(","),
                found.join(",")
            ),
        }
    }
}

impl std::error::Error for ReadError {}

impl From<csv::Error> for ReadError {
    fn from(e: csv::Error) -> Self {
        ReadError::Csv(e)
    }
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>, ReadError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(ReadError::Header(header));
    }
    r.deserialize().map(|row| row.map_err(ReadError::from)).collect()
}
