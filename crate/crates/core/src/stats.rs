//! Caption corpus statistics: word counts, vocabulary size and Shannon
//! entropy (in bits) with each word treated as an event.
//!
//! Tokenization is deliberately plain: lowercase, split on Unicode
//! whitespace, trim leading/trailing non-alphanumeric characters, drop empty
//! tokens.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Histogram = BTreeMap<usize, usize>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCountStats {
    pub captions: usize,
    pub total_words: usize,
    pub max_words: usize,
    pub min_words: usize,
    pub avg_words: f64,
    pub unique_words: usize,
    /// word count -> number of captions with that count
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub captions: usize,
    pub total_words: usize,
    pub max_words: usize,
    pub min_words: usize,
    pub avg_words: f64,
    pub unique_words: usize,
    pub max_ent: f64,
    pub min_ent: f64,
    pub avg_ent: f64,
    pub all_ent: f64,
    pub histogram: Histogram,
}

pub fn tokenize_caption(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn word_count_stats<S: AsRef<str>>(corpus: &[S]) -> Result<WordCountStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut vocab = HashSet::new();
    let mut histogram = Histogram::new();
    let mut total = 0usize;
    let mut max_words = 0usize;
    let mut min_words = usize::MAX;
    for caption in corpus {
        let tokens = tokenize_caption(caption.as_ref());
        let n = tokens.len();
        total += n;
        max_words = max_words.max(n);
        min_words = min_words.min(n);
        *histogram.entry(n).or_default() += 1;
        vocab.extend(tokens);
    }
    Ok(WordCountStats {
        captions: corpus.len(),
        total_words: total,
        max_words,
        min_words,
        avg_words: total as f64 / corpus.len() as f64,
        unique_words: vocab.len(),
        histogram,
    })
}

/// Shannon entropy in bits of a frequency table, `Σ (c/N) log2(N/c)`.
///
/// Words sharing a count are folded into one term (`m` words with count `c`
/// contribute `(m c / N) log2(N / c)`), so a uniform distribution over `V`
/// words yields exactly `log2 V`.
fn entropy_bits(mut counts: Vec<usize>) -> f64 {
    counts.retain(|&c| c > 0);
    counts.sort_unstable();
    let total: usize = counts.iter().sum();
    let n = total as f64;
    let mut h = 0.0;
    for group in counts.chunk_by(|a, b| a == b) {
        let c = group[0];
        let mass = (group.len() * c) as f64 / n;
        h += mass * (n / c as f64).log2();
    }
    h
}

fn frequencies<'a, I: IntoIterator<Item = &'a String>>(tokens: I) -> HashMap<&'a str, usize> {
    let mut freq = HashMap::new();
    for t in tokens {
        *freq.entry(t.as_str()).or_insert(0usize) += 1;
    }
    freq
}

fn counts(freq: HashMap<&str, usize>) -> Vec<usize> {
    freq.into_values().collect()
}

pub fn text_entropy(caption: &str) -> Result<f64> {
    let tokens = tokenize_caption(caption);
    if tokens.is_empty() {
        return Err(Error::NoTokens);
    }
    Ok(entropy_bits(counts(frequencies(&tokens))))
}

/// Entropy of the word distribution pooled over every caption.
pub fn corpus_entropy<S: AsRef<str>>(corpus: &[S]) -> Result<f64> {
    let tokens: Vec<String> = corpus
        .iter()
        .flat_map(|c| tokenize_caption(c.as_ref()))
        .collect();
    if tokens.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(entropy_bits(counts(frequencies(&tokens))))
}

/// Word-count and entropy statistics. Every caption must contain at least
/// one token.
pub fn corpus_stats<S: AsRef<str>>(corpus: &[S]) -> Result<CorpusStats> {
    let words = word_count_stats(corpus)?;
    let mut max_ent = f64::NEG_INFINITY;
    let mut min_ent = f64::INFINITY;
    let mut sum_ent = 0.0;
    for (i, caption) in corpus.iter().enumerate() {
        let h = text_entropy(caption.as_ref()).map_err(|_| {
            Error::InvalidInput(format!("caption {i} has no tokens after tokenization"))
        })?;
        max_ent = max_ent.max(h);
        min_ent = min_ent.min(h);
        sum_ent += h;
    }
    Ok(CorpusStats {
        captions: words.captions,
        total_words: words.total_words,
        max_words: words.max_words,
        min_words: words.min_words,
        avg_words: words.avg_words,
        unique_words: words.unique_words,
        max_ent,
        min_ent,
        avg_ent: sum_ent / corpus.len() as f64,
        all_ent: corpus_entropy(corpus)?,
        histogram: words.histogram,
    })
}

const HISTOGRAM_HEADER: &str = "word_count,frequency";

pub fn write_histogram<W: Write>(histogram: &Histogram, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HISTOGRAM_HEADER}")?;
    for (count, freq) in histogram {
        writeln!(out, "{count},{freq}")?;
    }
    out.flush()
}

/// Writes the histogram as `word_count,frequency` CSV, ascending by count.
pub fn histogram_export(histogram: &Histogram, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_histogram(histogram, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn read_histogram(path: &Path) -> Result<Histogram> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut histogram = Histogram::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if i == 0 {
            if line.trim() != HISTOGRAM_HEADER {
                return Err(parse_err(format!("expected header `{HISTOGRAM_HEADER}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (count, freq) = line
            .split_once(',')
            .ok_or_else(|| parse_err("expected two comma-separated fields".into()))?;
        let count = count
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("word_count: {e}")))?;
        let freq = freq
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("frequency: {e}")))?;
        histogram.insert(count, freq);
    }
    Ok(histogram)
}
