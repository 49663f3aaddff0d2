//! Standard text-to-image evaluation: every caption of every test image is a
//! query, the gallery is the set of test images, and a gallery image matches
//! a query when both carry the same person id.
//!
//! Query ids follow `<image_id>#<caption_index>` (see
//! [`caption_id`](super::annotations::caption_id)); gallery ids are image ids.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::annotations::{parse_caption_id, AnnotationRecord, Split};
use super::embeddings::EmbeddingTable;
use super::ranking::{check_shape, rank_row};
use super::similarity::{compute_similarity_matrix, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::metrics::{compute_sd, summarize, MetricConfig, QueryMetrics};

/// Unit over which the aggregate means are taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Every caption query weighs the same.
    #[default]
    Caption,
    /// Metrics are first averaged over the captions of each image, then
    /// over images.
    Image,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub metrics: MetricConfig,
    pub averaging: Averaging,
    pub per_query: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

pub enum SimilaritySource<'a> {
    Embeddings {
        queries: &'a EmbeddingTable,
        gallery: &'a EmbeddingTable,
    },
    Precomputed {
        matrix: &'a SimilarityMatrix,
        query_ids: &'a [String],
        gallery_ids: &'a [String],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    #[serde(flatten)]
    pub metrics: QueryMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rank_k: BTreeMap<usize, f64>,
    pub map: f64,
    pub msd: f64,
    pub num_queries: usize,
    pub num_gallery: usize,
    pub scored_queries: usize,
    pub skipped_queries: usize,
    pub averaging: Averaging,
    pub config: MetricConfig,
    /// Input name -> SHA-256 hex digest of the file it was read from.
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_query: Option<Vec<QueryRecord>>,
}

struct Labels<'a> {
    /// test image id -> person id
    images: HashMap<&'a str, &'a str>,
    /// test image id -> caption count
    captions: HashMap<&'a str, usize>,
}

impl<'a> Labels<'a> {
    fn new(annotations: &'a [AnnotationRecord]) -> Self {
        let test = annotations.iter().filter(|r| r.split == Split::Test);
        let mut images = HashMap::new();
        let mut captions = HashMap::new();
        for r in test {
            images.insert(r.image_id.as_str(), r.person_id.as_str());
            captions.insert(r.image_id.as_str(), r.captions.len());
        }
        Self { images, captions }
    }

    fn gallery_person(&self, id: &str) -> Result<&'a str> {
        self.images
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Person id and source image of a caption query.
    fn query_person(&self, id: &str) -> Result<(&'a str, &'a str)> {
        let unknown = || Error::UnknownId(id.to_string());
        let (image, index) = parse_caption_id(id).ok_or_else(unknown)?;
        let (&image, &person) = self.images.get_key_value(image).ok_or_else(unknown)?;
        if index >= self.captions[image] {
            return Err(unknown());
        }
        Ok((person, image))
    }
}

/// Ids of the test-split images in annotation order.
pub fn test_gallery_ids(annotations: &[AnnotationRecord]) -> Vec<String> {
    annotations
        .iter()
        .filter(|r| r.split == Split::Test)
        .map(|r| r.image_id.clone())
        .collect()
}

/// Caption query ids of the test split in annotation order.
pub fn test_query_ids(annotations: &[AnnotationRecord]) -> Vec<String> {
    annotations
        .iter()
        .filter(|r| r.split == Split::Test)
        .flat_map(|r| (0..r.captions.len()).map(|i| r.caption_id(i)))
        .collect()
}

pub fn run_evaluation(
    annotations: &[AnnotationRecord],
    source: SimilaritySource<'_>,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    opts.metrics.validate()?;
    match opts.workers {
        None => evaluate(annotations, source, opts),
        Some(0) => Err(Error::InvalidInput("worker count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            pool.install(|| evaluate(annotations, source, opts))
        }
    }
}

fn evaluate(
    annotations: &[AnnotationRecord],
    source: SimilaritySource<'_>,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let labels = Labels::new(annotations);
    let computed;
    let (matrix, query_ids, gallery_ids) = match source {
        SimilaritySource::Embeddings { queries, gallery } => {
            computed = compute_similarity_matrix(queries, gallery)?;
            (&computed, queries.ids(), gallery.ids())
        }
        SimilaritySource::Precomputed {
            matrix,
            query_ids,
            gallery_ids,
        } => {
            check_shape(matrix, query_ids.len(), gallery_ids.len())?;
            (matrix, query_ids, gallery_ids)
        }
    };

    let gallery_persons = gallery_ids
        .iter()
        .map(|id| labels.gallery_person(id))
        .collect::<Result<Vec<_>>>()?;
    let queries = query_ids
        .iter()
        .map(|id| labels.query_person(id))
        .collect::<Result<Vec<_>>>()?;

    let cfg = &opts.metrics;
    let per_query: Vec<Option<QueryMetrics>> = (0..matrix.rows())
        .into_par_iter()
        .map(|i| {
            let list = rank_row(matrix.row(i), &queries[i].0, &gallery_persons)?;
            Ok(compute_sd(&list, cfg).ok())
        })
        .collect::<Result<_>>()?;

    let summary = match opts.averaging {
        Averaging::Caption => summarize(&per_query, &cfg.rank_cutoffs)?,
        Averaging::Image => {
            let images: Vec<&str> = queries.iter().map(|&(_, image)| image).collect();
            summarize_by_group(&per_query, &images, &cfg.rank_cutoffs)?
        }
    };

    let per_query = opts.per_query.then(|| {
        query_ids
            .iter()
            .zip(&per_query)
            .filter_map(|(id, m)| {
                m.map(|metrics| QueryRecord {
                    query_id: id.clone(),
                    metrics,
                })
            })
            .collect()
    });

    Ok(EvalReport {
        rank_k: summary.rank_k,
        map: summary.map,
        msd: summary.msd,
        num_queries: query_ids.len(),
        num_gallery: gallery_ids.len(),
        scored_queries: summary.scored,
        skipped_queries: summary.skipped,
        averaging: opts.averaging,
        config: cfg.clone(),
        provenance: BTreeMap::new(),
        per_query,
    })
}

/// Means over groups (in order of first appearance) of the per-group means of
/// the scorable queries. Groups with no scorable query are dropped.
fn summarize_by_group(
    per_query: &[Option<QueryMetrics>],
    groups: &[&str],
    cutoffs: &std::collections::BTreeSet<usize>,
) -> Result<crate::metrics::Summary> {
    let mut order: Vec<&str> = Vec::new();
    let mut members: HashMap<&str, Vec<&QueryMetrics>> = HashMap::new();
    for (m, &g) in per_query.iter().zip(groups) {
        let entry = members.entry(g).or_insert_with(|| {
            order.push(g);
            Vec::new()
        });
        if let Some(m) = m {
            entry.push(m);
        }
    }

    let (mut ap, mut sd, mut n_groups) = (0.0, 0.0, 0usize);
    let mut hits: BTreeMap<usize, f64> = cutoffs.iter().map(|&k| (k, 0.0)).collect();
    for g in &order {
        let ms = &members[g];
        if ms.is_empty() {
            continue;
        }
        let n = ms.len() as f64;
        n_groups += 1;
        ap += ms.iter().map(|m| m.ap).sum::<f64>() / n;
        sd += ms.iter().map(|m| m.sd).sum::<f64>() / n;
        for (&k, total) in hits.iter_mut() {
            let h = ms
                .iter()
                .filter(|m| m.first_hit_rank.is_some_and(|r| r <= k))
                .count();
            *total += h as f64 / n;
        }
    }
    if n_groups == 0 {
        return Err(Error::InvalidInput("no scorable queries".into()));
    }
    let n = n_groups as f64;
    let scored = per_query.iter().flatten().count();
    Ok(crate::metrics::Summary {
        rank_k: hits.into_iter().map(|(k, h)| (k, h / n)).collect(),
        map: ap / n,
        msd: sd / n,
        scored,
        skipped: per_query.len() - scored,
    })
}
