//! Skip-gram negative-sampling training and the word2vec text format.
//!
//! The trainer is single-threaded and fully deterministic for a fixed seed:
//! documents are visited in order, the dynamic window and negative draws come
//! from one seeded stream, and the vocabulary is sorted by count (ties
//! lexicographic) so nothing depends on hash-map iteration order.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::TokenizedCorpus;

/// Learning rate never decays below this floor.
const LR_FLOOR: f64 = 1e-4;

/// Subsampling threshold applied when frequent-word subsampling is enabled.
pub const SUBSAMPLE_THRESHOLD: f64 = 1e-4;

/// Exponent of the unigram distribution used for negative sampling.
const NEGATIVE_SAMPLING_POWER: f64 = 0.75;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vocabulary too small after min_count filtering: {0} word(s), need at least 2")]
    VocabularyTooSmall(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("embedding table is empty")]
    EmptyTable,
    #[error("duplicate word `{0}`")]
    DuplicateWord(String),
    #[error("invalid word `{0}`: words must be non-empty and contain no whitespace")]
    InvalidWord(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in vector for `{0}`")]
    NonFiniteValue(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// A vocabulary-indexed table of dense vectors, shape `[vocabulary size,
/// embedding size]`; row `i` is the vector of `vocab()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    dim: usize,
}

impl EmbeddingTable {
    /// Builds a table from parallel word/row lists, validating that words are
    /// unique and whitespace-free and that every row has the same number of
    /// finite entries.
    pub fn from_rows(words: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, EmbeddingError> {
        if words.len() != rows.len() {
            return Err(EmbeddingError::InvalidConfig(format!(
                "{} words but {} rows",
                words.len(),
                rows.len()
            )));
        }
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut index = HashMap::with_capacity(words.len());
        let mut data = Vec::with_capacity(words.len() * dim);
        for (i, (word, row)) in words.iter().zip(&rows).enumerate() {
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(EmbeddingError::InvalidWord(word.clone()));
            }
            if index.insert(word.clone(), i).is_some() {
                return Err(EmbeddingError::DuplicateWord(word.clone()));
            }
            if row.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(EmbeddingError::NonFiniteValue(word.clone()));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            vocab: words,
            index,
            data,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// The vector for `word`, if present.
    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.word_index(word).map(|i| self.row(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), self.row(i)))
    }
}

/// Hyperparameters for the skip-gram trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub initial_lr: f64,
    /// Frequent-word subsampling threshold; disabled when `None`.
    pub subsample: Option<f64>,
    pub rng_seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            negatives: 5,
            min_count: 5,
            epochs: 5,
            initial_lr: 0.025,
            subsample: None,
            rng_seed: 1,
        }
    }
}

impl SgnsConfig {
    fn validate(&self) -> Result<(), EmbeddingError> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(EmbeddingError::InvalidConfig(format!(
                    "{name} must be positive"
                )));
            }
        }
        if self.dim < 2 {
            return Err(EmbeddingError::InvalidConfig("dim must be at least 2".into()));
        }
        if self.min_count == 0 {
            return Err(EmbeddingError::InvalidConfig(
                "min_count must be positive".into(),
            ));
        }
        if self.initial_lr.is_nan() || self.initial_lr <= 0.0 {
            return Err(EmbeddingError::InvalidConfig(
                "initial_lr must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity; zero if either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot(a, b) / (na * nb)
}

/// Trains skip-gram-with-negative-sampling embeddings and returns the input
/// vector table. For every center/context pair within the (dynamically
/// shrunk) window the standard SGNS objective is optimized by SGD:
/// `log sigma(u_c . v_w) + sum_k log sigma(-u_{n_k} . v_w)`, negatives drawn
/// from the unigram^(3/4) distribution. Deterministic for a fixed seed.
#[allow(clippy::needless_range_loop)]
pub fn train_sgns(
    corpus: &TokenizedCorpus,
    cfg: &SgnsConfig,
) -> Result<EmbeddingTable, EmbeddingError> {
    cfg.validate()?;

    let mut counts: HashMap<&str, u64> = HashMap::new();
    for token in corpus.iter_tokens() {
        *counts.entry(token).or_insert(0) += 1;
    }
    let mut vocab: Vec<(&str, u64)> = counts
        .iter()
        .filter(|(_, &c)| c >= cfg.min_count)
        .map(|(&w, &c)| (w, c))
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if vocab.len() < 2 {
        return Err(EmbeddingError::VocabularyTooSmall(vocab.len()));
    }
    let index: HashMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, &(w, _))| (w, i))
        .collect();

    let docs: Vec<Vec<usize>> = corpus
        .documents()
        .iter()
        .map(|doc| {
            doc.iter()
                .filter_map(|t| index.get(t.as_str()).copied())
                .collect()
        })
        .collect();
    let kept_tokens: u64 = vocab.iter().map(|&(_, c)| c).sum();

    // Cumulative unigram^(3/4) distribution for negative sampling.
    let weights: Vec<f64> = vocab
        .iter()
        .map(|&(_, c)| (c as f64).powf(NEGATIVE_SAMPLING_POWER))
        .collect();
    let weight_total: f64 = weights.iter().sum();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w / weight_total;
        cumulative.push(acc);
    }

    let dim = cfg.dim;
    let vocab_size = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut input: Vec<f64> = (0..vocab_size * dim)
        .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output: Vec<f64> = vec![0.0; vocab_size * dim];

    let total_tokens = (kept_tokens * cfg.epochs as u64).max(1);
    let mut processed: u64 = 0;
    let mut grad = vec![0.0; dim];

    for _epoch in 0..cfg.epochs {
        for doc in &docs {
            let lr = (cfg.initial_lr * (1.0 - processed as f64 / total_tokens as f64))
                .max(LR_FLOOR);
            processed += doc.len() as u64;

            let sentence: Vec<usize> = match cfg.subsample {
                None => doc.clone(),
                Some(t) => doc
                    .iter()
                    .copied()
                    .filter(|&w| {
                        let f = vocab[w].1 as f64;
                        let k = t * kept_tokens as f64;
                        let keep = ((f / k).sqrt() + 1.0) * k / f;
                        rng.random::<f64>() < keep
                    })
                    .collect(),
            };

            for (pos, &center) in sentence.iter().enumerate() {
                let radius = rng.random_range(1..=cfg.window);
                let start = pos.saturating_sub(radius);
                let stop = (pos + radius + 1).min(sentence.len());
                for ctx_pos in start..stop {
                    if ctx_pos == pos {
                        continue;
                    }
                    let context = sentence[ctx_pos];
                    grad.fill(0.0);
                    let v = center * dim;

                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let r: f64 = rng.random();
                            let mut t = cumulative.partition_point(|&c| c < r);
                            if t >= vocab_size {
                                t = vocab_size - 1;
                            }
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let u = target * dim;
                        let score = dot(&input[v..v + dim], &output[u..u + dim]);
                        let g = (label - sigmoid(score)) * lr;
                        for d in 0..dim {
                            grad[d] += g * output[u + d];
                            output[u + d] += g * input[v + d];
                        }
                    }
                    for d in 0..dim {
                        input[v + d] += grad[d];
                    }
                }
            }
        }
    }

    let words: Vec<String> = vocab.iter().map(|&(w, _)| w.to_string()).collect();
    let rows: Vec<Vec<f64>> = (0..vocab_size)
        .map(|i| input[i * dim..(i + 1) * dim].to_vec())
        .collect();
    EmbeddingTable::from_rows(words, rows)
}

/// Writes the word2vec text format: a `<vocab_size> <dim>` header line, then
/// one `<word> <v1> ... <v_dim>` line per word. Floats use the shortest
/// decimal form that round-trips, so save -> load -> save is byte-stable.
pub fn save_word2vec_text<W: Write>(
    table: &EmbeddingTable,
    mut sink: W,
) -> Result<(), EmbeddingError> {
    if table.is_empty() {
        return Err(EmbeddingError::EmptyTable);
    }
    writeln!(sink, "{} {}", table.len(), table.dim())?;
    for (word, row) in table.iter() {
        write!(sink, "{word}")?;
        for value in row {
            write!(sink, " {value}")?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

/// Reads the word2vec text format written by [`save_word2vec_text`].
/// Vocabulary order is preserved from the file; the header dimension is
/// enforced on every row.
pub fn load_word2vec_text<R: BufRead>(source: R) -> Result<EmbeddingTable, EmbeddingError> {
    let mut lines = source.lines();
    let header = lines
        .next()
        .ok_or_else(|| EmbeddingError::Parse {
            line: 1,
            message: "empty file".into(),
        })?
        .map_err(EmbeddingError::Io)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(EmbeddingError::Parse {
            line: 1,
            message: format!("expected `<vocab_size> <dim>` header, got `{header}`"),
        });
    }
    let vocab_size: usize = fields[0].parse().map_err(|_| EmbeddingError::Parse {
        line: 1,
        message: format!("bad vocabulary size `{}`", fields[0]),
    })?;
    let dim: usize = fields[1].parse().map_err(|_| EmbeddingError::Parse {
        line: 1,
        message: format!("bad dimension `{}`", fields[1]),
    })?;

    let mut words = Vec::with_capacity(vocab_size);
    let mut rows = Vec::with_capacity(vocab_size);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line.map_err(EmbeddingError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or("").to_string();
        let mut row = Vec::with_capacity(dim);
        for field in parts {
            let value: f64 = field.parse().map_err(|_| EmbeddingError::Parse {
                line: lineno,
                message: format!("bad float `{field}`"),
            })?;
            row.push(value);
        }
        if row.len() != dim {
            return Err(EmbeddingError::Parse {
                line: lineno,
                message: format!("expected {dim} values for `{word}`, got {}", row.len()),
            });
        }
        words.push(word);
        rows.push(row);
    }
    if words.len() != vocab_size {
        return Err(EmbeddingError::Parse {
            line: words.len() + 1,
            message: format!("header declares {vocab_size} words, found {}", words.len()),
        });
    }
    EmbeddingTable::from_rows(words, rows)
}
