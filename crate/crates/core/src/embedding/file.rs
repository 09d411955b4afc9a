//! Vector file format.
//!
//! Binary variant:
//!
//! ```text
//! TAPVEC/1 <kind> <dim> <count>\n
//! count × { u32 LE id length, id bytes (UTF-8), dim × f32 LE }
//! ```
//!
//! Text variant (for debugging), same header magic with a `-TEXT` suffix:
//!
//! ```text
//! TAPVEC-TEXT/1 <kind> <dim> <count>\n
//! <id> <v1> <v2> ... <v_dim>\n
//! ```
//!
//! Floats in the text variant use the shortest representation that parses
//! back to the same f32, so both variants round-trip losslessly.

use std::io::{BufRead, Read, Write};

use super::{EmbeddingVector, IMPORT_NORM_TOLERANCE};
use super::index::{EmbeddingRecord, IndexError, VectorIndex};
use crate::catalog::{Catalog, FunctionKind};

pub const VECTOR_MAGIC: &str = "TAPVEC/1";
pub const VECTOR_TEXT_MAGIC: &str = "TAPVEC-TEXT/1";

const MAX_ID_LEN: u32 = 4096;

fn header(magic: &str, index: &VectorIndex) -> String {
    format!("{magic} {} {} {}\n", index.kind(), index.dim(), index.len())
}

pub fn export_vectors(index: &VectorIndex, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(header(VECTOR_MAGIC, index).as_bytes())?;
    for r in index.records() {
        let id = r.entry_id.as_bytes();
        out.write_all(&(id.len() as u32).to_le_bytes())?;
        out.write_all(id)?;
        for v in r.vector.as_slice() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()
}

pub fn export_vectors_text(index: &VectorIndex, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(header(VECTOR_TEXT_MAGIC, index).as_bytes())?;
    for r in index.records() {
        write!(out, "{}", r.entry_id)?;
        for v in r.vector.as_slice() {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Reads either variant. When `catalog` is given, every record must name an
/// entry of the file's kind and every such entry must have a record.
pub fn import_vectors(
    mut input: impl BufRead,
    catalog: Option<&Catalog>,
) -> Result<VectorIndex, IndexError> {
    let mut line = Vec::new();
    input.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(IndexError::Corrupt("missing header line".into()));
    }
    let line = String::from_utf8(line)
        .map_err(|_| IndexError::Corrupt("header is not UTF-8".into()))?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    let [magic, kind, dim, count] = parts[..] else {
        return Err(IndexError::Corrupt(format!("bad header `{}`", line.trim_end())));
    };
    let kind: FunctionKind = kind.parse().map_err(IndexError::Corrupt)?;
    let dim: usize = dim
        .parse()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| IndexError::Corrupt(format!("bad dimension `{dim}`")))?;
    let count: usize = count
        .parse()
        .map_err(|_| IndexError::Corrupt(format!("bad count `{count}`")))?;

    let records = match magic {
        VECTOR_MAGIC => read_binary(&mut input, dim, count)?,
        VECTOR_TEXT_MAGIC => read_text(&mut input, dim, count)?,
        other => return Err(IndexError::Corrupt(format!("unknown magic `{other}`"))),
    };
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if rest.iter().any(|b| !b.is_ascii_whitespace()) {
        return Err(IndexError::Corrupt("trailing data after last record".into()));
    }

    let index = VectorIndex::new(kind, dim, records)?;
    if let Some(catalog) = catalog {
        index.check_against(catalog)?;
    }
    Ok(index)
}

fn truncated(what: &str) -> IndexError {
    IndexError::Corrupt(format!("truncated file while reading {what}"))
}

fn read_binary(input: &mut impl Read, dim: usize, count: usize) -> Result<Vec<EmbeddingRecord>, IndexError> {
    let mut records = Vec::with_capacity(count.min(1 << 16));
    let mut floats = vec![0u8; dim * 4];
    for n in 0..count {
        let mut len = [0u8; 4];
        input.read_exact(&mut len).map_err(|_| truncated("record id length"))?;
        let len = u32::from_le_bytes(len);
        if len == 0 || len > MAX_ID_LEN {
            return Err(IndexError::Corrupt(format!("record {n}: id length {len}")));
        }
        let mut id = vec![0u8; len as usize];
        input.read_exact(&mut id).map_err(|_| truncated("record id"))?;
        let entry_id = String::from_utf8(id)
            .map_err(|_| IndexError::Corrupt(format!("record {n}: id is not UTF-8")))?;
        input.read_exact(&mut floats).map_err(|_| truncated("vector values"))?;
        let values = floats
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        records.push(record(entry_id, values)?);
    }
    Ok(records)
}

fn read_text(input: &mut impl BufRead, dim: usize, count: usize) -> Result<Vec<EmbeddingRecord>, IndexError> {
    let mut records = Vec::with_capacity(count.min(1 << 16));
    let mut line = String::new();
    for n in 0..count {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Err(truncated("text record"));
        }
        let mut parts = line.split_whitespace();
        let entry_id = parts
            .next()
            .ok_or_else(|| IndexError::Corrupt(format!("record {n}: empty line")))?
            .to_string();
        let values: Vec<f32> = parts
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| IndexError::Corrupt(format!("record {n}: {e}")))?;
        if values.len() != dim {
            return Err(IndexError::DimMismatch {
                expected: dim,
                found: values.len(),
            });
        }
        records.push(record(entry_id, values)?);
    }
    Ok(records)
}

fn record(entry_id: String, values: Vec<f32>) -> Result<EmbeddingRecord, IndexError> {
    let vector = EmbeddingVector::from_unit(values, IMPORT_NORM_TOLERANCE)
        .map_err(|e| IndexError::Corrupt(format!("record `{entry_id}`: {e}")))?;
    Ok(EmbeddingRecord { entry_id, vector })
}
