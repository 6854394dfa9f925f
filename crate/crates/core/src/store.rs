//! Line-oriented snapshot files.
//!
//! The first line is a JSON header with the dataset metadata. Every further
//! line is one snapshot, `kind,hex(A upper triangle),hex(b)`. Bit strings
//! are packed LSB first within each byte; the upper triangle of `A` is taken
//! row by row with the diagonal included. Diagonal snapshots leave the
//! middle field empty.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bitlin::BitVec;
use crate::ensemble::{NoiseModel, PhaseCircuit, Snapshot, SnapshotKind};
use crate::error::{Error, Result};
use crate::shadow::{DatasetMeta, ShadowDataset};

pub const FORMAT: &str = "phase-shadow-snapshots";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    n: usize,
    noise: NoiseModel,
    seed: u64,
    prep: String,
}

fn store_err(line: usize, message: impl Into<String>) -> Error {
    Error::Store {
        line,
        message: message.into(),
    }
}

pub fn format_snapshot(s: &Snapshot) -> String {
    let a = s
        .circuit()
        .map(|c| hex::encode(c.upper_bits().to_bytes()))
        .unwrap_or_default();
    format!("{},{},{}", s.kind().as_str(), a, hex::encode(s.outcome().to_bytes()))
}

fn decode_bits(len: usize, text: &str, line: usize, what: &str) -> Result<BitVec> {
    let bytes = hex::decode(text).map_err(|e| store_err(line, format!("{what}: {e}")))?;
    BitVec::from_bytes(len, &bytes)
        .ok_or_else(|| store_err(line, format!("{what}: expected {len} bits with clear padding")))
}

/// Parses one record line of an `n`-qubit store. `line` is only used in
/// error messages.
pub fn parse_snapshot(text: &str, n: usize, line: usize) -> Result<Snapshot> {
    let fields: Vec<&str> = text.trim().split(',').collect();
    let [kind, a, b] = fields[..] else {
        return Err(store_err(line, format!("expected 3 fields, found {}", fields.len())));
    };
    let outcome = decode_bits(n, b, line, "outcome")?;
    match kind {
        k if k == SnapshotKind::Offdiag.as_str() => {
            let bits = decode_bits(PhaseCircuit::free_bits(n), a, line, "circuit")?;
            Snapshot::offdiag(PhaseCircuit::from_upper_bits(n, &bits)?, outcome)
        }
        k if k == SnapshotKind::Diag.as_str() => {
            if !a.is_empty() {
                return Err(store_err(line, "diag record carries a circuit"));
            }
            Ok(Snapshot::diag(outcome))
        }
        other => Err(store_err(line, format!("unknown kind {other:?}"))),
    }
}

/// Writes the header and every snapshot, off-diagonal ones first.
pub fn write_dataset<W: Write>(ds: &ShadowDataset, mut out: W) -> Result<()> {
    let meta = ds.meta();
    let header = Header {
        format: FORMAT.to_string(),
        version: VERSION,
        n: meta.n,
        noise: meta.noise.clone(),
        seed: meta.seed,
        prep: meta.prep.clone(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for s in ds.offdiag().iter().chain(ds.diag()) {
        writeln!(out, "{}", format_snapshot(s))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<ShadowDataset> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| store_err(1, "missing header"))??;
    let header: Header = serde_json::from_str(&first).map_err(|e| store_err(1, e.to_string()))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(store_err(
            1,
            format!("unsupported format {} version {}", header.format, header.version),
        ));
    }
    header.noise.validate(header.n)?;
    let mut snaps = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        snaps.push(parse_snapshot(&line, header.n, i + 2)?);
    }
    let meta = DatasetMeta {
        n: header.n,
        noise: header.noise,
        seed: header.seed,
        prep: header.prep,
    };
    ShadowDataset::from_snapshots(meta, snaps)
}
