//! Ranked-list metrics: rank-k (CMC), AP/mAP and the similarity-distribution
//! family (PNR, ASP, SD, mSD).
//!
//! | Metric | Range | Sensitive to |
//! |--------|-------|--------------|
//! | R@k    | [0, 1] | position of the first hit |
//! | AP     | [0, 1] | positions of all hits |
//! | PNR    | [0, 1) | matched vs unmatched mean similarity |
//! | ASP    | [0, 1] | matched similarity mass in each prefix ending at a hit |
//! | SD     | [0, 1) | `PNR * ASP` |
//!
//! SD is computed on a per-list min-max normalization of the raw
//! similarities, so two lists with identical match positions (and identical
//! AP) generally receive different SD values.
//!
//! ```text
//! x   = mean(matched s') / max(mean(unmatched s'), eps)
//! PNR = 1 - exp(-k x)
//! ASP = (1/n+) Σ_k  Σ_{i<=j_k} s'_i [matched] / Σ_{i<=j_k} s'_i
//! ```
//!
//! Every aggregate is reduced sequentially in ascending query order, so
//! results do not depend on how per-query work was scheduled.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One query's gallery ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    sims: Vec<f64>,
    matched: Vec<bool>,
}

impl RankedList {
    /// Builds a list from similarities already sorted in descending order.
    pub fn new(sims: Vec<f64>, matched: Vec<bool>) -> Result<Self> {
        if sims.is_empty() {
            return Err(Error::InvalidInput("ranked list is empty".into()));
        }
        if sims.len() != matched.len() {
            return Err(Error::InvalidInput(format!(
                "ranked list has {} similarities but {} match flags",
                sims.len(),
                matched.len()
            )));
        }
        if let Some(i) = sims.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite similarity at rank {}",
                i + 1
            )));
        }
        if let Some(i) = sims.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput(format!(
                "similarities increase between ranks {} and {}",
                i + 1,
                i + 2
            )));
        }
        Ok(Self { sims, matched })
    }

    pub fn sims(&self) -> &[f64] {
        &self.sims
    }

    pub fn matched(&self) -> &[bool] {
        &self.matched
    }

    pub fn len(&self) -> usize {
        self.sims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sims.is_empty()
    }

    pub fn num_matched(&self) -> usize {
        self.matched.iter().filter(|&&m| m).count()
    }

    /// 1-based rank of the first matched entry.
    pub fn first_hit_rank(&self) -> Option<usize> {
        self.matched.iter().position(|&m| m).map(|i| i + 1)
    }

    pub fn is_scorable(&self) -> bool {
        self.matched.iter().any(|&m| m)
    }
}

/// A ranked list whose scores were min-max normalized into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRankedList {
    sims: Vec<f64>,
    matched: Vec<bool>,
}

impl NormalizedRankedList {
    pub fn sims(&self) -> &[f64] {
        &self.sims
    }

    pub fn matched(&self) -> &[bool] {
        &self.matched
    }
}

/// Per-query metric values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub ap: f64,
    pub sd: f64,
    pub pnr: f64,
    pub asp: f64,
    pub first_hit_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Rate `k` of the saturating PNR transform.
    pub msd_k: f64,
    pub rank_cutoffs: BTreeSet<usize>,
    /// Floor on the unmatched-mean denominator of PNR.
    pub epsilon: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            msd_k: 1.0,
            rank_cutoffs: [1, 5, 10].into_iter().collect(),
            epsilon: 1e-6,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.msd_k.is_finite() && self.msd_k > 0.0) {
            return Err(Error::InvalidInput(format!(
                "msd_k must be a positive finite number, got {}",
                self.msd_k
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be a positive finite number, got {}",
                self.epsilon
            )));
        }
        if self.rank_cutoffs.is_empty() {
            return Err(Error::InvalidInput("rank_cutoffs is empty".into()));
        }
        if self.rank_cutoffs.contains(&0) {
            return Err(Error::InvalidInput("rank cutoffs must be positive".into()));
        }
        Ok(())
    }
}

/// Min-max normalizes the list into `[0, 1]`. A constant list maps every
/// score to 0.5.
pub fn normalize_ranklist(list: &RankedList) -> NormalizedRankedList {
    NormalizedRankedList {
        sims: normalized_sims(&list.sims),
        matched: list.matched.clone(),
    }
}

fn normalized_sims(sims: &[f64]) -> Vec<f64> {
    // Sorted descending, so the extremes sit at the ends.
    let max = sims[0];
    let min = sims[sims.len() - 1];
    let range = max - min;
    if range > 0.0 {
        sims.iter().map(|&s| (s - min) / range).collect()
    } else {
        vec![0.5; sims.len()]
    }
}

/// Positive-to-negative ratio score: `1 - exp(-k x)` where `x` is the ratio
/// of the matched mean to the (floored) unmatched mean.
pub fn compute_pnr(list: &NormalizedRankedList, cfg: &MetricConfig) -> Result<f64> {
    pnr_of(&list.sims, &list.matched, cfg)
}

fn pnr_of(sims: &[f64], matched: &[bool], cfg: &MetricConfig) -> Result<f64> {
    let (mut pos_sum, mut pos_n, mut neg_sum, mut neg_n) = (0.0, 0usize, 0.0, 0usize);
    for (&s, &m) in sims.iter().zip(matched) {
        if m {
            pos_sum += s;
            pos_n += 1;
        } else {
            neg_sum += s;
            neg_n += 1;
        }
    }
    if pos_n == 0 {
        return Err(Error::Unscorable);
    }
    let pos_mean = pos_sum / pos_n as f64;
    let neg_mean = if neg_n == 0 {
        cfg.epsilon
    } else {
        (neg_sum / neg_n as f64).max(cfg.epsilon)
    };
    Ok(pnr_from_ratio(pos_mean / neg_mean, cfg.msd_k))
}

/// `1 - exp(-k x)`.
pub fn pnr_from_ratio(x: f64, k: f64) -> f64 {
    -(-k * x).exp_m1()
}

/// Average similarity precision over the prefixes ending at each hit.
pub fn compute_asp(list: &NormalizedRankedList) -> Result<f64> {
    asp_of(&list.sims, &list.matched)
}

fn asp_of(sims: &[f64], matched: &[bool]) -> Result<f64> {
    let mut prefix_all = 0.0;
    let mut prefix_pos = 0.0;
    let mut ratio_sum = 0.0;
    let mut hits = 0usize;
    for (&s, &m) in sims.iter().zip(matched) {
        prefix_all += s;
        if m {
            prefix_pos += s;
            hits += 1;
            ratio_sum += if prefix_all > 0.0 {
                prefix_pos / prefix_all
            } else {
                // An all-zero prefix also has zero matched mass.
                1.0
            };
        }
    }
    if hits == 0 {
        return Err(Error::Unscorable);
    }
    Ok(ratio_sum / hits as f64)
}

/// Non-interpolated average precision.
pub fn compute_ap(list: &RankedList) -> Result<f64> {
    ap_of(&list.matched)
}

fn ap_of(matched: &[bool]) -> Result<f64> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, _) in matched.iter().enumerate().filter(|(_, &m)| m) {
        hits += 1;
        sum += hits as f64 / (i + 1) as f64;
    }
    if hits == 0 {
        return Err(Error::Unscorable);
    }
    Ok(sum / hits as f64)
}

/// All per-query metrics for one list: normalization, PNR, ASP, SD and AP.
pub fn compute_sd(list: &RankedList, cfg: &MetricConfig) -> Result<QueryMetrics> {
    let first_hit_rank = list.first_hit_rank().ok_or(Error::Unscorable)?;
    let norm = normalized_sims(&list.sims);
    let pnr = pnr_of(&norm, &list.matched, cfg)?;
    let asp = asp_of(&norm, &list.matched)?;
    let ap = ap_of(&list.matched)?;
    Ok(QueryMetrics {
        ap,
        sd: pnr * asp,
        pnr,
        asp,
        first_hit_rank: Some(first_hit_rank),
    })
}

/// Scores every query, leaving `None` for queries with no matched entry.
pub fn score_queries(queries: &[RankedList], cfg: &MetricConfig) -> Vec<Option<QueryMetrics>> {
    queries.iter().map(|q| compute_sd(q, cfg).ok()).collect()
}

/// Aggregate metrics over a query set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rank_k: BTreeMap<usize, f64>,
    pub map: f64,
    pub msd: f64,
    pub scored: usize,
    pub skipped: usize,
}

/// Reduces per-query results (in the given order) into aggregates. `None`
/// entries are unscorable queries: excluded from every mean and counted.
pub fn summarize(per_query: &[Option<QueryMetrics>], cutoffs: &BTreeSet<usize>) -> Result<Summary> {
    let scored: Vec<&QueryMetrics> = per_query.iter().flatten().collect();
    if scored.is_empty() {
        return Err(Error::InvalidInput("no scorable queries".into()));
    }
    let n = scored.len() as f64;
    let mut ap_sum = 0.0;
    let mut sd_sum = 0.0;
    for m in &scored {
        ap_sum += m.ap;
        sd_sum += m.sd;
    }
    let rank_k = cutoffs
        .iter()
        .map(|&k| {
            let hits = scored
                .iter()
                .filter(|m| m.first_hit_rank.is_some_and(|r| r <= k))
                .count();
            (k, hits as f64 / n)
        })
        .collect();
    Ok(Summary {
        rank_k,
        map: ap_sum / n,
        msd: sd_sum / n,
        scored: scored.len(),
        skipped: per_query.len() - scored.len(),
    })
}

/// Mean SD over the scorable queries.
pub fn compute_msd(queries: &[RankedList], cfg: &MetricConfig) -> Result<f64> {
    summarize(&score_queries(queries, cfg), &cfg.rank_cutoffs).map(|s| s.msd)
}

/// Mean AP over the scorable queries.
pub fn compute_map(queries: &[RankedList]) -> Result<f64> {
    let aps: Vec<f64> = queries.iter().filter_map(|q| compute_ap(q).ok()).collect();
    if aps.is_empty() {
        return Err(Error::InvalidInput("no scorable queries".into()));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

/// Cumulative match characteristic: for each cutoff `k`, the fraction of
/// scorable queries whose first hit is within the top `k`.
pub fn compute_cmc(
    queries: &[RankedList],
    cutoffs: &BTreeSet<usize>,
) -> Result<BTreeMap<usize, f64>> {
    if cutoffs.contains(&0) {
        return Err(Error::InvalidInput("rank cutoffs must be positive".into()));
    }
    let first_hits: Vec<usize> = queries
        .iter()
        .filter_map(RankedList::first_hit_rank)
        .collect();
    if first_hits.is_empty() {
        return Err(Error::InvalidInput("no scorable queries".into()));
    }
    let n = first_hits.len() as f64;
    Ok(cutoffs
        .iter()
        .map(|&k| (k, first_hits.iter().filter(|&&r| r <= k).count() as f64 / n))
        .collect())
}
