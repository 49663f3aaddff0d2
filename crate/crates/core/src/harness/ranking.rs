use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use super::similarity::SimilarityMatrix;
use crate::error::{Error, Result};
use crate::metrics::RankedList;

/// Gallery indices ordered by descending similarity; ties keep ascending
/// gallery index.
pub fn rank_order(sims: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sims.len()).collect();
    order.sort_by(|&a, &b| match sims[b].partial_cmp(&sims[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    });
    order
}

/// Ranked list for one similarity row, flagging gallery items whose label
/// equals `query_label`.
pub fn rank_row<L: PartialEq>(
    sims: &[f64],
    query_label: &L,
    gallery_labels: &[L],
) -> Result<RankedList> {
    let order = rank_order(sims);
    let ranked_sims = order.iter().map(|&j| sims[j]).collect();
    let matched = order
        .iter()
        .map(|&j| gallery_labels[j] == *query_label)
        .collect();
    RankedList::new(ranked_sims, matched)
}

/// Resolves each id to its person label, failing on the first unknown id.
pub fn resolve_labels<'a>(
    ids: &[String],
    labels: &'a HashMap<String, String>,
) -> Result<Vec<&'a str>> {
    ids.iter()
        .map(|id| {
            labels
                .get(id)
                .map(String::as_str)
                .ok_or_else(|| Error::UnknownId(id.clone()))
        })
        .collect()
}

/// One ranked list per query row. `query_ids`/`gallery_ids` are aligned to
/// the matrix rows/columns and looked up in the respective label maps.
pub fn build_rank_lists(
    sim: &SimilarityMatrix,
    query_ids: &[String],
    gallery_ids: &[String],
    query_labels: &HashMap<String, String>,
    gallery_labels: &HashMap<String, String>,
) -> Result<Vec<RankedList>> {
    check_shape(sim, query_ids.len(), gallery_ids.len())?;
    let q = resolve_labels(query_ids, query_labels)?;
    let g = resolve_labels(gallery_ids, gallery_labels)?;
    (0..sim.rows())
        .into_par_iter()
        .map(|i| rank_row(sim.row(i), &q[i], &g))
        .collect()
}

pub(crate) fn check_shape(sim: &SimilarityMatrix, queries: usize, gallery: usize) -> Result<()> {
    if sim.rows() != queries || sim.cols() != gallery {
        return Err(Error::InvalidInput(format!(
            "similarity matrix is {}x{} but there are {queries} queries and {gallery} gallery items",
            sim.rows(),
            sim.cols()
        )));
    }
    Ok(())
}
