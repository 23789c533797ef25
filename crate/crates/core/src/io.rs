//! Signal files, numeric CSV output and the JSON run report.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::signal::Signal;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: cannot parse {text:?} as a number")]
    Parse { line: usize, text: String },
    #[error("f64le input length {0} is not a multiple of 8")]
    Truncated(usize),
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("input contains no samples")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SignalFormat {
    Csv,
    F64le,
}

/// One value per line. A first line that does not parse is a header and is
/// skipped; blank lines are ignored.
pub fn parse_csv_signal(text: &str) -> Result<Vec<f64>, IoError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if idx == 0 => continue,
            Err(_) => {
                return Err(IoError::Parse {
                    line: idx + 1,
                    text: line.to_string(),
                })
            }
        }
    }
    Ok(out)
}

pub fn parse_f64le(bytes: &[u8]) -> Result<Vec<f64>, IoError> {
    if !bytes.len().is_multiple_of(8) {
        return Err(IoError::Truncated(bytes.len()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn signal_from_bytes(bytes: &[u8], format: SignalFormat) -> Result<Signal, IoError> {
    let values = match format {
        SignalFormat::Csv => {
            let text = String::from_utf8_lossy(bytes);
            parse_csv_signal(&text)?
        }
        SignalFormat::F64le => parse_f64le(bytes)?,
    };
    if values.is_empty() {
        return Err(IoError::Empty);
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(IoError::NonFinite { index });
    }
    Ok(Signal::new(values).expect("validated above"))
}

pub fn read_signal(path: &Path, format: SignalFormat) -> Result<Signal, IoError> {
    let bytes = read_bytes(path)?;
    signal_from_bytes(&bytes, format)
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>, IoError> {
    fs::read(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest round-trip decimal form of each value, one per line.
pub fn format_series(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20);
    for v in values {
        out.push_str(&format!("{v:?}\n"));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_series(path: &Path, values: &[f64]) -> Result<(), IoError> {
    write_text(path, &format_series(values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub path: String,
    pub n: usize,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImfEntry {
    pub index: usize,
    pub file: String,
    pub mask_length: usize,
    pub iterations_used: usize,
    pub final_sd: f64,
    pub max_abs_norm: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub read_seconds: f64,
    pub decompose_seconds: f64,
    pub write_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub format: SignalFormat,
    pub filter: String,
    pub mask_strategy: String,
    pub nu: f64,
    pub delta: f64,
    pub max_inner_iter: usize,
    pub max_imfs: usize,
    pub eta: f64,
    pub mode: String,
    pub gamma: Option<f64>,
}

/// Machine-readable summary written as `report.json`. Every key is always
/// present; a failed run has an empty IMF list and a non-null `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: InputDescriptor,
    pub imf_count: usize,
    pub significant_count: usize,
    pub imfs: Vec<ImfEntry>,
    pub trend_file: Option<String>,
    pub termination: Option<String>,
    pub error: Option<String>,
    pub timings: Timings,
    pub config: ConfigEcho,
}
