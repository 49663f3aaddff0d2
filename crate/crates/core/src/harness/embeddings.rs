//! Dense embedding tables and the `UFEB` binary container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size        field
//! 0       4           magic "UFEB"
//! 4       2           version u16 = 1
//! 6       1           dtype u8 = 0 (IEEE-754 binary32)
//! 7       1           reserved u8 = 0
//! 8       8           rows u64
//! 16      8           dim u64
//! 24      8           ids_len u64
//! 32      ids_len     UTF-8 JSON array of `rows` id strings
//! ...     rows*dim*4  binary32 values, row-major
//! ```

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};

pub const MAGIC: [u8; 4] = *b"UFEB";
pub const VERSION: u16 = 1;
pub const DTYPE_F32: u8 = 0;
const HEADER_LEN: usize = 32;

/// Row-major `f32` matrix with one string id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingJson {
    ids: Vec<String>,
    dim: usize,
    vectors: Vec<Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(ids: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if ids.is_empty() {
            return Err(FormatError::EmptyTable.into());
        }
        if dim == 0 {
            return Err(FormatError::ZeroDimension.into());
        }
        if data.len() != ids.len() * dim {
            return Err(Error::InvalidInput(format!(
                "{} values do not fill {} rows of dimension {dim}",
                data.len(),
                ids.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(FormatError::NonFinite {
                row: i / dim,
                col: i % dim,
            }
            .into());
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId {
                    id: id.clone(),
                    line: None,
                });
            }
        }
        Ok(Self { ids, dim, data })
    }

    pub fn from_rows(ids: Vec<String>, rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::InvalidInput(format!(
                "row {r} has length {}, expected {dim}",
                rows[r].len()
            )));
        }
        Self::new(ids, dim, rows.concat())
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

/// Serializes a table into the `UFEB` byte layout.
pub fn encode_embeddings(table: &EmbeddingTable) -> Vec<u8> {
    let ids = serde_json::to_vec(&table.ids).expect("string array serializes");
    let mut out = Vec::with_capacity(HEADER_LEN + ids.len() + table.data.len() * 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(DTYPE_F32);
    out.push(0);
    out.extend_from_slice(&(table.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(table.dim as u64).to_le_bytes());
    out.extend_from_slice(&(ids.len() as u64).to_le_bytes());
    out.extend_from_slice(&ids);
    for v in &table.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingTable> {
    let truncated = |expected: u64| FormatError::Truncated {
        expected,
        actual: bytes.len() as u64,
    };
    if bytes.len() < 4 {
        return Err(truncated(HEADER_LEN as u64).into());
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic).into());
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN as u64).into());
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version).into());
    }
    if bytes[6] != DTYPE_F32 {
        return Err(FormatError::UnsupportedDtype(bytes[6]).into());
    }
    if bytes[7] != 0 {
        return Err(FormatError::Reserved(bytes[7]).into());
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (rows, dim, ids_len) = (read_u64(8), read_u64(16), read_u64(24));
    if rows == 0 {
        return Err(FormatError::EmptyTable.into());
    }
    if dim == 0 {
        return Err(FormatError::ZeroDimension.into());
    }

    let payload_len = rows
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or(FormatError::Overflow)?;
    let total = (HEADER_LEN as u64)
        .checked_add(ids_len)
        .and_then(|n| n.checked_add(payload_len))
        .ok_or(FormatError::Overflow)?;
    if (bytes.len() as u64) < total {
        return Err(truncated(total).into());
    }
    if (bytes.len() as u64) > total {
        return Err(FormatError::TrailingBytes(bytes.len() as u64 - total).into());
    }
    let (rows, dim, ids_len) = (rows as usize, dim as usize, ids_len as usize);

    let ids_end = HEADER_LEN + ids_len;
    let ids: Vec<String> = serde_json::from_slice(&bytes[HEADER_LEN..ids_end])
        .map_err(|e| FormatError::BadIds(e.to_string()))?;
    if ids.len() != rows {
        return Err(FormatError::IdCountMismatch {
            ids: ids.len(),
            rows,
        }
        .into());
    }
    let data: Vec<f32> = bytes[ids_end..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    EmbeddingTable::new(ids, dim, data)
}

pub fn write_embeddings(table: &EmbeddingTable, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode_embeddings(table))
        .and_then(|_| file.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_embeddings(&bytes)
}

/// JSON interchange form: `{"ids": [...], "dim": d, "vectors": [[...], ...]}`.
pub fn load_embeddings_json(path: &Path) -> Result<EmbeddingTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let json: EmbeddingJson = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if let Some(r) = json.vectors.iter().position(|v| v.len() != json.dim) {
        return Err(Error::InvalidInput(format!(
            "row {r} has length {}, expected {}",
            json.vectors[r].len(),
            json.dim
        )));
    }
    EmbeddingTable::new(json.ids, json.dim, json.vectors.concat())
}

pub fn write_embeddings_json(table: &EmbeddingTable, path: &Path) -> Result<()> {
    let json = EmbeddingJson {
        ids: table.ids.clone(),
        dim: table.dim,
        vectors: table.data.chunks(table.dim).map(<[f32]>::to_vec).collect(),
    };
    let text = serde_json::to_string(&json).map_err(|e| Error::Internal(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
