use rayon::prelude::*;

use super::embeddings::EmbeddingTable;
use crate::error::{Error, Result};

/// Dense query x gallery similarity matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("similarity matrix is empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} values do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite similarity at ({}, {})",
                i / cols,
                i % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Reads a precomputed matrix stored as an embedding table: one row per
    /// query, one column per gallery item.
    pub fn from_table(table: &EmbeddingTable) -> Result<Self> {
        let data = table.as_slice().iter().map(|&v| f64::from(v)).collect();
        Self::new(table.rows(), table.dim(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

fn norms(table: &EmbeddingTable, name: &'static str) -> Result<Vec<f64>> {
    (0..table.rows())
        .map(|i| {
            let n = table
                .row(i)
                .iter()
                .map(|&v| f64::from(v) * f64::from(v))
                .sum::<f64>()
                .sqrt();
            if n > 0.0 {
                Ok(n)
            } else {
                Err(Error::ZeroNorm {
                    table: name,
                    row: i,
                })
            }
        })
        .collect()
}

/// Cosine similarity of every query row against every gallery row,
/// accumulated in `f64`.
pub fn compute_similarity_matrix(
    queries: &EmbeddingTable,
    gallery: &EmbeddingTable,
) -> Result<SimilarityMatrix> {
    if queries.dim() != gallery.dim() {
        return Err(Error::DimensionMismatch {
            query: queries.dim(),
            gallery: gallery.dim(),
        });
    }
    let q_norms = norms(queries, "query")?;
    let g_norms = norms(gallery, "gallery")?;
    let cols = gallery.rows();
    let mut data = vec![0.0; queries.rows() * cols];
    data.par_chunks_mut(cols).enumerate().for_each(|(i, out)| {
        let q = queries.row(i);
        for (j, slot) in out.iter_mut().enumerate() {
            let dot: f64 = q
                .iter()
                .zip(gallery.row(j))
                .map(|(&a, &b)| f64::from(a) * f64::from(b))
                .sum();
            // + 0.0 folds -0.0 into 0.0 so ordering never sees signed zeros.
            *slot = (dot / (q_norms[i] * g_norms[j])).clamp(-1.0, 1.0) + 0.0;
        }
    });
    Ok(SimilarityMatrix {
        rows: queries.rows(),
        cols,
        data,
    })
}
