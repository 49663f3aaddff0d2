//! Test-only oracles and synthetic data. Nothing here calls into the metric
//! implementation under test.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tpr_eval::harness::{AnnotationRecord, EmbeddingTable, Split};
use tpr_eval::metrics::RankedList;

/// Direct transcription of the metric definitions, written for clarity.
pub mod oracle {
    /// Min-max normalization over the whole list; constant lists map to 0.5.
    pub fn normalize(sims: &[f64]) -> Vec<f64> {
        let max = sims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = sims.iter().cloned().fold(f64::INFINITY, f64::min);
        if max == min {
            return vec![0.5; sims.len()];
        }
        sims.iter().map(|s| (s - min) / (max - min)).collect()
    }

    pub fn pnr(sims: &[f64], matched: &[bool], k: f64, eps: f64) -> Option<f64> {
        let s = normalize(sims);
        let pos: Vec<f64> = (0..s.len()).filter(|&i| matched[i]).map(|i| s[i]).collect();
        let neg: Vec<f64> = (0..s.len())
            .filter(|&i| !matched[i])
            .map(|i| s[i])
            .collect();
        if pos.is_empty() {
            return None;
        }
        let pos_mean = pos.iter().sum::<f64>() / pos.len() as f64;
        let neg_mean = if neg.is_empty() {
            eps
        } else {
            (neg.iter().sum::<f64>() / neg.len() as f64).max(eps)
        };
        let x = pos_mean / neg_mean;
        Some(1.0 - (-k * x).exp())
    }

    pub fn asp(sims: &[f64], matched: &[bool]) -> Option<f64> {
        let s = normalize(sims);
        let ranks: Vec<usize> = (1..=s.len()).filter(|&r| matched[r - 1]).collect();
        if ranks.is_empty() {
            return None;
        }
        let mut total = 0.0;
        for &j in &ranks {
            let num: f64 = (0..j).filter(|&i| matched[i]).map(|i| s[i]).sum();
            let den: f64 = (0..j).map(|i| s[i]).sum();
            total += if den == 0.0 { 1.0 } else { num / den };
        }
        Some(total / ranks.len() as f64)
    }

    pub fn sd(sims: &[f64], matched: &[bool], k: f64, eps: f64) -> Option<f64> {
        Some(pnr(sims, matched, k, eps)? * asp(sims, matched)?)
    }

    /// Mean of precision@j over the hit ranks j.
    pub fn ap(matched: &[bool]) -> Option<f64> {
        let ranks: Vec<usize> = (1..=matched.len()).filter(|&r| matched[r - 1]).collect();
        if ranks.is_empty() {
            return None;
        }
        let precisions: f64 = ranks
            .iter()
            .map(|&j| matched[..j].iter().filter(|&&m| m).count() as f64 / j as f64)
            .sum();
        Some(precisions / ranks.len() as f64)
    }

    pub fn first_hit(matched: &[bool]) -> Option<usize> {
        (1..=matched.len()).find(|&r| matched[r - 1])
    }

    fn mean(v: &[f64]) -> Option<f64> {
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn msd(lists: &[(Vec<f64>, Vec<bool>)], k: f64, eps: f64) -> Option<f64> {
        let v: Vec<f64> = lists.iter().filter_map(|(s, m)| sd(s, m, k, eps)).collect();
        mean(&v)
    }

    pub fn map(lists: &[(Vec<f64>, Vec<bool>)]) -> Option<f64> {
        let v: Vec<f64> = lists.iter().filter_map(|(_, m)| ap(m)).collect();
        mean(&v)
    }

    pub fn cmc(lists: &[(Vec<f64>, Vec<bool>)], cutoff: usize) -> Option<f64> {
        let hits: Vec<usize> = lists.iter().filter_map(|(_, m)| first_hit(m)).collect();
        (!hits.is_empty())
            .then(|| hits.iter().filter(|&&r| r <= cutoff).count() as f64 / hits.len() as f64)
    }

    /// Exhaustive ranking: repeatedly pick the highest remaining similarity,
    /// lowest index on ties.
    pub fn rank_by_selection(sims: &[f64]) -> Vec<usize> {
        let mut left: Vec<usize> = (0..sims.len()).collect();
        let mut out = Vec::new();
        while !left.is_empty() {
            let mut best = 0;
            for p in 1..left.len() {
                if sims[left[p]] > sims[left[best]] {
                    best = p;
                }
            }
            out.push(left.remove(best));
        }
        out
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random descending similarities in [-1, 1] with occasional ties and a
/// random match pattern. `force_match` guarantees at least one hit.
pub fn random_list(rng: &mut impl Rng, max_len: usize, force_match: bool) -> (Vec<f64>, Vec<bool>) {
    let n = rng.gen_range(1..=max_len);
    let quantize = rng.gen_bool(0.3);
    let mut sims: Vec<f64> = (0..n)
        .map(|_| {
            let s: f64 = rng.gen_range(-1.0..1.0);
            if quantize {
                (s * 4.0).round() / 4.0
            } else {
                s
            }
        })
        .collect();
    sims.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let p = rng.gen_range(0.05..0.6);
    let mut matched: Vec<bool> = (0..n).map(|_| rng.gen_bool(p)).collect();
    if force_match && !matched.iter().any(|&m| m) {
        let i = rng.gen_range(0..n);
        matched[i] = true;
    }
    (sims, matched)
}

pub fn to_ranked(list: &(Vec<f64>, Vec<bool>)) -> RankedList {
    RankedList::new(list.0.clone(), list.1.clone()).unwrap()
}

pub struct Synthetic {
    pub annotations: Vec<AnnotationRecord>,
    pub queries: EmbeddingTable,
    pub gallery: EmbeddingTable,
}

fn unit(rng: &mut impl Rng, dim: usize) -> Vec<f32> {
    let v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Identities with a random centroid each; images and captions are the
/// centroid plus isotropic noise of amplitude `noise`. Every image gets two
/// captions, and the query table holds the first `max_queries` caption ids.
pub fn clustered(
    seed: u64,
    identities: usize,
    images_per_id: usize,
    dim: usize,
    noise: f32,
    max_queries: usize,
) -> Synthetic {
    let mut rng = rng(seed);
    let centroids: Vec<Vec<f32>> = (0..identities).map(|_| unit(&mut rng, dim)).collect();
    let mut annotations = Vec::new();
    let mut g_ids = Vec::new();
    let mut g_rows = Vec::new();
    let mut q_ids = Vec::new();
    let mut q_rows = Vec::new();
    let jitter = |rng: &mut ChaCha8Rng, c: &[f32]| -> Vec<f32> {
        c.iter()
            .map(|&x| x + noise * rng.gen_range(-1.0f32..1.0))
            .collect()
    };
    for (p, c) in centroids.iter().enumerate() {
        for i in 0..images_per_id {
            let image_id = format!("p{p:05}_img{i}");
            g_ids.push(image_id.clone());
            g_rows.push(jitter(&mut rng, c));
            for cap in 0..2 {
                if q_ids.len() < max_queries {
                    q_ids.push(format!("{image_id}#{cap}"));
                    q_rows.push(jitter(&mut rng, c));
                }
            }
            annotations.push(AnnotationRecord {
                image_id,
                person_id: format!("p{p:05}"),
                split: Split::Test,
                captions: vec![
                    format!("person {p} view {i}"),
                    format!("a person, number {p}"),
                ],
                source: None,
            });
        }
    }
    Synthetic {
        annotations,
        queries: EmbeddingTable::from_rows(q_ids, &q_rows).unwrap(),
        gallery: EmbeddingTable::from_rows(g_ids, &g_rows).unwrap(),
    }
}

/// The same annotations with person ids permuted across images.
pub fn shuffle_labels(annotations: &[AnnotationRecord], seed: u64) -> Vec<AnnotationRecord> {
    let mut persons: Vec<String> = annotations.iter().map(|r| r.person_id.clone()).collect();
    persons.shuffle(&mut rng(seed));
    annotations
        .iter()
        .zip(persons)
        .map(|(r, p)| AnnotationRecord {
            person_id: p,
            ..r.clone()
        })
        .collect()
}
