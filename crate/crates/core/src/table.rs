//! Tabular output: CSV with the producing configuration echoed on the first line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const CONFIG_PREFIX: &str = "# config: ";

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Data(format!("{other:?}")),
    }
}

/// Writes `# config: {config_json}`, a header and one row per item.
pub fn write_csv<T: Serialize>(path: &Path, config_json: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{CONFIG_PREFIX}{config_json}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
