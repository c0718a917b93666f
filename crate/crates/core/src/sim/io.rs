//! Trace batch files.
//!
//! CSV layout: an optional `# config: {json}` first line, then the header
//! `trial,cycle,sample_index,current` and one row per sample. The binary
//! variant holds the same columns: magic `QNDT`, `u32` version, `u64` config
//! length and UTF-8 config, `u64` row count, then the four columns
//! (`u64`, `u32`, `u32`, `f64`), all little-endian.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RunRecord, Trace};
use crate::error::{Error, Result};
use crate::hmm::QubitState;
use crate::table::{csv_err, write_csv, CONFIG_PREFIX};

const MAGIC: &[u8; 4] = b"QNDT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SampleRow {
    trial: u64,
    cycle: u32,
    sample_index: u32,
    current: f64,
}

/// Ground-truth row of `<stem>.truth.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRow {
    pub trial: u64,
    pub prepared_state: QubitState,
    pub cycle: u32,
    pub hidden_state: QubitState,
    pub ancilla_bit: QubitState,
}

/// One trace of a batch file.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchTrace {
    pub trial: u64,
    pub cycle: u32,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceBatch {
    /// Embedded configuration JSON, if present.
    pub config: Option<String>,
    pub traces: Vec<BatchTrace>,
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// Path of the ground-truth file next to a trace batch.
pub fn truth_path(trace_path: &Path) -> std::path::PathBuf {
    let stem = trace_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    trace_path.with_file_name(format!("{stem}.truth.csv"))
}

/// Writes `(trial, run)` pairs; `.bin` selects the binary layout.
pub fn write_traces(path: &Path, config_json: &str, runs: &[(u64, RunRecord)]) -> Result<()> {
    let rows = runs.iter().flat_map(|(trial, run)| {
        run.traces.iter().enumerate().flat_map(move |(cycle, trace)| {
            trace.samples.iter().enumerate().map(move |(i, &current)| SampleRow {
                trial: *trial,
                cycle: cycle as u32,
                sample_index: i as u32,
                current,
            })
        })
    });
    if is_binary(path) {
        write_binary(path, config_json, rows.collect())
    } else {
        write_csv(path, config_json, rows)
    }
}

pub fn write_truth(path: &Path, config_json: &str, runs: &[(u64, RunRecord)]) -> Result<()> {
    let rows = runs.iter().flat_map(|(trial, run)| {
        run.hidden_states
            .iter()
            .zip(&run.ancilla_bits)
            .enumerate()
            .map(move |(cycle, (&h, &a))| TruthRow {
                trial: *trial,
                prepared_state: run.x0,
                cycle: cycle as u32,
                hidden_state: h,
                ancilla_bit: a,
            })
    });
    write_csv(path, config_json, rows)
}

fn read_config_line(path: &Path) -> Result<Option<String>> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok(first.strip_prefix(CONFIG_PREFIX).map(|s| s.trim_end().to_string()))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(File::open(path)?))
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthRow>> {
    csv_reader(path)?
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

/// Reads a batch written by [`write_traces`]; rows must be grouped by trace
/// with consecutive sample indices.
pub fn read_traces(path: &Path) -> Result<TraceBatch> {
    let (config, rows) = if is_binary(path) {
        read_binary(path)?
    } else {
        let config = read_config_line(path)?;
        let rows = csv_reader(path)?
            .deserialize()
            .map(|r| r.map_err(csv_err))
            .collect::<Result<Vec<SampleRow>>>()?;
        (config, rows)
    };
    let mut traces: Vec<BatchTrace> = Vec::new();
    for row in rows {
        if !row.current.is_finite() {
            return Err(Error::Data(format!("non-finite current in trial {} cycle {}", row.trial, row.cycle)));
        }
        match traces.last_mut() {
            Some(t) if t.trial == row.trial && t.cycle == row.cycle => {
                if row.sample_index as usize != t.samples.len() {
                    return Err(Error::Data(format!(
                        "trial {} cycle {}: expected sample {}, found {}",
                        row.trial,
                        row.cycle,
                        t.samples.len(),
                        row.sample_index
                    )));
                }
                t.samples.push(row.current);
            }
            _ => {
                if row.sample_index != 0 {
                    return Err(Error::Data(format!(
                        "trial {} cycle {} does not start at sample 0",
                        row.trial, row.cycle
                    )));
                }
                traces.push(BatchTrace {
                    trial: row.trial,
                    cycle: row.cycle,
                    samples: vec![row.current],
                });
            }
        }
    }
    Ok(TraceBatch { config, traces })
}

fn write_binary(path: &Path, config_json: &str, rows: Vec<SampleRow>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(config_json.len() as u64).to_le_bytes())?;
    out.write_all(config_json.as_bytes())?;
    out.write_all(&(rows.len() as u64).to_le_bytes())?;
    for r in &rows {
        out.write_all(&r.trial.to_le_bytes())?;
    }
    for r in &rows {
        out.write_all(&r.cycle.to_le_bytes())?;
    }
    for r in &rows {
        out.write_all(&r.sample_index.to_le_bytes())?;
    }
    for r in &rows {
        out.write_all(&r.current.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_array<const N: usize>(input: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_binary(path: &Path) -> Result<(Option<String>, Vec<SampleRow>)> {
    let mut input = BufReader::new(File::open(path)?);
    if &read_array::<4>(&mut input)? != MAGIC {
        return Err(Error::Data("not a trace batch file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(Error::Data(format!("unsupported trace batch version {version}")));
    }
    let config_len = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let mut config = vec![0u8; config_len];
    input.read_exact(&mut config)?;
    let config = String::from_utf8(config).map_err(|e| Error::Data(e.to_string()))?;
    let n = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let mut rows = vec![
        SampleRow {
            trial: 0,
            cycle: 0,
            sample_index: 0,
            current: 0.0
        };
        n
    ];
    for r in rows.iter_mut() {
        r.trial = u64::from_le_bytes(read_array(&mut input)?);
    }
    for r in rows.iter_mut() {
        r.cycle = u32::from_le_bytes(read_array(&mut input)?);
    }
    for r in rows.iter_mut() {
        r.sample_index = u32::from_le_bytes(read_array(&mut input)?);
    }
    for r in rows.iter_mut() {
        r.current = f64::from_le_bytes(read_array(&mut input)?);
    }
    Ok(((!config.is_empty()).then_some(config), rows))
}

impl BatchTrace {
    pub fn to_trace(&self, dt_sample: f64) -> Trace {
        Trace {
            samples: self.samples.clone(),
            dt_sample,
        }
    }
}
