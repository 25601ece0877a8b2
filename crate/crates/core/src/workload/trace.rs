//! Line-delimited trace files: one JSON object per line with fields
//! `hash`, `gas_used`, `tip`, `reads`, `writes`. Files ending in `.gz` are
//! gzip-compressed.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use super::WorkloadError;

/// Gas used by a plain value transfer.
pub const TRANSFER_GAS: u64 = 21_000;

/// One transaction as extracted from an execution trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub hash: String,
    pub gas_used: u64,
    /// Priority fee per gas unit.
    pub tip: u64,
    #[serde(default)]
    pub reads: Vec<String>,
    #[serde(default)]
    pub writes: Vec<String>,
}

impl TraceRecord {
    /// Lowercases keys and removes repeats, keeping first appearances.
    fn normalize(&mut self) {
        for keys in [&mut self.reads, &mut self.writes] {
            let mut seen = HashSet::new();
            keys.retain_mut(|k| {
                k.make_ascii_lowercase();
                seen.insert(k.clone())
            });
        }
    }

    fn keys(&self) -> impl Iterator<Item = &str> {
        self.reads.iter().chain(&self.writes).map(String::as_str)
    }
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"))
}

/// Reads a trace file; gzip is detected by the `.gz` extension.
pub fn ingest(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>, WorkloadError> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if is_gz(path) {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    ingest_reader(BufReader::new(reader))
}

/// Parses records from any line-oriented source. Blank lines are skipped.
pub fn ingest_reader(reader: impl BufRead) -> Result<Vec<TraceRecord>, WorkloadError> {
    let mut records = Vec::new();
    let mut hashes = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: TraceRecord =
            serde_json::from_str(&line).map_err(|e| WorkloadError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        record.normalize();
        if record.gas_used == 0 {
            return Err(WorkloadError::ZeroGas { line: line_no });
        }
        if record.reads.is_empty() && record.writes.is_empty() {
            return Err(WorkloadError::NoAccess { line: line_no });
        }
        if !hashes.insert(record.hash.clone()) {
            return Err(WorkloadError::DuplicateHash {
                line: line_no,
                hash: record.hash,
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Writes records in the format [`ingest`] reads.
pub fn export_records(records: &[TraceRecord], path: impl AsRef<Path>) -> Result<(), WorkloadError> {
    let path = path.as_ref();
    let file = File::create(path)?;
    if is_gz(path) {
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::default());
        write_records(records, &mut enc)?;
        enc.finish()?.flush()?;
    } else {
        let mut out = BufWriter::new(file);
        write_records(records, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

pub fn write_records(records: &[TraceRecord], out: &mut impl Write) -> Result<(), WorkloadError> {
    for r in records {
        serde_json::to_writer(&mut *out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Plain transfers: exactly [`TRANSFER_GAS`], only account keys (no
/// `address:slot`), and at most two distinct accounts.
pub fn filter_homogeneous(records: &[TraceRecord]) -> Vec<TraceRecord> {
    records
        .iter()
        .filter(|r| {
            if r.gas_used != TRANSFER_GAS || r.keys().any(|k| k.contains(':')) {
                return false;
            }
            r.keys().collect::<HashSet<_>>().len() <= 2
        })
        .cloned()
        .collect()
}
