//! Table persistence and run manifests.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for TableFormat {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            _ => Err(crate::Error::param(format!("unknown table format {s:?}"))),
        }
    }
}

/// A flat row type with a fixed column order.
pub trait TableRow: Serialize + DeserializeOwned {
    /// Column names in serialization order.
    const COLUMNS: &'static [&'static str];
}

/// CSV with a header row even for empty tables, or a JSON array of row
/// objects.
pub fn write_rows<T: TableRow, W: Write>(rows: &[T], format: TableFormat, w: W) -> Result<()> {
    match format {
        TableFormat::Csv => {
            let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            out.write_record(T::COLUMNS)?;
            for row in rows {
                out.serialize(row)?;
            }
            out.flush()?;
        }
        TableFormat::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn read_rows<T: TableRow, R: Read>(r: R, format: TableFormat) -> Result<Vec<T>> {
    match format {
        TableFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(r);
            rdr.deserialize().map(|row| row.map_err(Into::into)).collect()
        }
        TableFormat::Json => Ok(serde_json::from_reader(r)?),
    }
}

pub fn write_table<T: TableRow>(rows: &[T], path: &Path, format: TableFormat) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_rows(rows, format, file)
}

pub fn read_table<T: TableRow>(path: &Path, format: TableFormat) -> Result<Vec<T>> {
    read_rows(BufReader::new(File::open(path)?), format)
}

/// Echo of a run written next to its tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest<C> {
    pub config: C,
    pub version: String,
    pub started_unix_seconds: u64,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

impl<C: Serialize> RunManifest<C> {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
