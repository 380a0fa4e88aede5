//! Orthogonal-transform training that concentrates sentiment on one axis.
//!
//! A square matrix `Q` with orthonormal rows is learned so that its first row
//! `q` separates positive from negative seed words when embeddings are
//! projected onto it. Same-polarity seed pairs are pulled together and
//! cross-polarity pairs pushed apart through the combined objective
//! `Loss = (1 - alpha) * SLoss + alpha * DLoss`, where `SLoss` is the mean of
//! `|q . (e_w - e_v)|` over same-polarity pairs and `DLoss` the negated mean
//! over cross-polarity pairs. Only row `q` receives subgradient updates; the
//! full matrix is repeatedly snapped back to the nearest orthogonal matrix
//! via SVD.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::embedding::{dot, EmbeddingTable};
use crate::textio;

/// Tag of the persisted transform container.
pub const TRANSFORM_TAG: &str = "densifier-q";

/// Maximum allowed `max |Q^T Q - I|` for a valid transform.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum DensifierError {
    #[error("`{0}` appears in both the positive and negative seed lists")]
    OverlappingSeeds(String),
    #[error("the {0} seed list is empty")]
    EmptySeedList(&'static str),
    #[error("holdout fraction {0} must be in [0, 1)")]
    InvalidHoldoutFraction(f64),
    #[error("need at least 2 train seed words per polarity after the holdout split")]
    TooFewTrainSeeds,
    #[error("seed size {requested} exceeds the {available} available {polarity} seeds")]
    SeedSizeTooLarge {
        requested: usize,
        available: usize,
        polarity: &'static str,
    },
    #[error("no usable training pairs: {same} same-polarity, {diff} cross-polarity")]
    NoTrainingPairs { same: usize, diff: usize },
    #[error("seed words missing from vocabulary: {0}")]
    MissingSeedWords(String),
    #[error("word `{0}` not present in embedding table")]
    UnknownWord(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("matrix must be square and non-empty")]
    NotSquare,
    #[error("matrix is rank-deficient; the nearest orthogonal matrix is not unique")]
    RankDeficient,
    #[error("rows are not orthonormal within {ORTHONORMALITY_TOLERANCE}")]
    NotOrthonormal,
    #[error("all train seed embeddings are identical; the sentiment axis is undefined")]
    DegenerateSeeds,
    #[error("positive and negative train seeds score identically; orientation is undefined")]
    UndefinedOrientation,
    #[error("training diverged (non-finite loss) at epoch {0}; try a smaller learning rate")]
    Diverged(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<textio::TextError> for DensifierError {
    fn from(e: textio::TextError) -> Self {
        DensifierError::Parse {
            line: e.line,
            message: e.message,
        }
    }
}

/// Labeled positive/negative seed words with an optional train/holdout split.
///
/// The holdout is the tail `floor(fraction * len)` words of each polarity;
/// the head is the train part. Duplicates within a list are dropped
/// (first occurrence wins); a word on both sides is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedLexicon {
    positive: Vec<String>,
    negative: Vec<String>,
    holdout_fraction: f64,
}

impl SeedLexicon {
    pub fn new(
        positive: Vec<String>,
        negative: Vec<String>,
        holdout_fraction: f64,
    ) -> Result<Self, DensifierError> {
        if !(0.0..1.0).contains(&holdout_fraction) {
            return Err(DensifierError::InvalidHoldoutFraction(holdout_fraction));
        }
        let positive = dedup_preserving_order(positive);
        let negative = dedup_preserving_order(negative);
        if positive.is_empty() {
            return Err(DensifierError::EmptySeedList("positive"));
        }
        if negative.is_empty() {
            return Err(DensifierError::EmptySeedList("negative"));
        }
        let negative_set: HashSet<&String> = negative.iter().collect();
        if let Some(shared) = positive.iter().find(|w| negative_set.contains(w)) {
            return Err(DensifierError::OverlappingSeeds(shared.clone()));
        }
        let lexicon = Self {
            positive,
            negative,
            holdout_fraction,
        };
        let (train_pos, train_neg) = lexicon.train_words();
        if train_pos.len() < 2 || train_neg.len() < 2 {
            return Err(DensifierError::TooFewTrainSeeds);
        }
        Ok(lexicon)
    }

    /// Reads `word<TAB>label` lines with labels `pos` / `neg`.
    pub fn read_tsv<R: BufRead>(r: R, holdout_fraction: f64) -> Result<Self, DensifierError> {
        let labeled = textio::parse_labeled_words(r)?;
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for (word, is_positive) in labeled {
            if is_positive {
                positive.push(word);
            } else {
                negative.push(word);
            }
        }
        Self::new(positive, negative, holdout_fraction)
    }

    /// Builds a lexicon from two plain word-per-line files.
    pub fn from_word_files<R1: BufRead, R2: BufRead>(
        positive: R1,
        negative: R2,
        holdout_fraction: f64,
    ) -> Result<Self, DensifierError> {
        Self::new(
            read_word_lines(positive)?,
            read_word_lines(negative)?,
            holdout_fraction,
        )
    }

    pub fn positive(&self) -> &[String] {
        &self.positive
    }

    pub fn negative(&self) -> &[String] {
        &self.negative
    }

    pub fn holdout_fraction(&self) -> f64 {
        self.holdout_fraction
    }

    fn train_len(&self, len: usize) -> usize {
        len - (len as f64 * self.holdout_fraction).floor() as usize
    }

    /// The train part of each polarity (head of the list).
    pub fn train_words(&self) -> (&[String], &[String]) {
        (
            &self.positive[..self.train_len(self.positive.len())],
            &self.negative[..self.train_len(self.negative.len())],
        )
    }

    /// The held-out tail of each polarity; both empty when the fraction is 0.
    pub fn holdout_words(&self) -> (&[String], &[String]) {
        (
            &self.positive[self.train_len(self.positive.len())..],
            &self.negative[self.train_len(self.negative.len())..],
        )
    }

    /// A copy truncated to the first `size` words per polarity, as used by
    /// the seed-size experiment.
    pub fn truncated(&self, size: usize) -> Result<Self, DensifierError> {
        for (list, polarity) in [(&self.positive, "positive"), (&self.negative, "negative")] {
            if size > list.len() {
                return Err(DensifierError::SeedSizeTooLarge {
                    requested: size,
                    available: list.len(),
                    polarity,
                });
            }
        }
        Self::new(
            self.positive[..size].to_vec(),
            self.negative[..size].to_vec(),
            self.holdout_fraction,
        )
    }
}

fn dedup_preserving_order(words: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    words.into_iter().filter(|w| seen.insert(w.clone())).collect()
}

fn read_word_lines<R: BufRead>(r: R) -> Result<Vec<String>, DensifierError> {
    let mut words = Vec::new();
    for line in r.lines() {
        let line = line?;
        let word = line.trim();
        if !word.is_empty() && !word.starts_with('#') {
            words.push(word.to_string());
        }
    }
    Ok(words)
}

/// Whether a pair joins two words of the same polarity or crosses polarities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Same,
    Diff,
}

/// An unordered training pair of seed words.
pub type WordPair = (String, String);

/// Enumerates training pairs: all unordered pairs within each polarity
/// (same), plus the full positive x negative cross product (diff). Errors
/// when either list is empty or when no same-polarity pair exists.
pub fn make_pairs(
    positive: &[String],
    negative: &[String],
) -> Result<(Vec<WordPair>, Vec<WordPair>), DensifierError> {
    if positive.is_empty() {
        return Err(DensifierError::EmptySeedList("positive"));
    }
    if negative.is_empty() {
        return Err(DensifierError::EmptySeedList("negative"));
    }
    let mut same = Vec::new();
    for list in [positive, negative] {
        for i in 0..list.len() {
            for j in (i + 1)..list.len() {
                same.push((list[i].clone(), list[j].clone()));
            }
        }
    }
    let mut diff = Vec::with_capacity(positive.len() * negative.len());
    for p in positive {
        for n in negative {
            diff.push((p.clone(), n.clone()));
        }
    }
    if same.is_empty() {
        return Err(DensifierError::NoTrainingPairs {
            same: same.len(),
            diff: diff.len(),
        });
    }
    Ok((same, diff))
}

/// Loss of a single pair under axis `q`: with `s = q . (e_w - e_v)`, same
/// pairs contribute `|s|` (to be minimized) and diff pairs `-|s|` (so that
/// minimizing increases separation).
pub fn pair_loss(
    q: &[f64],
    e_w: &[f64],
    e_v: &[f64],
    kind: PairKind,
) -> Result<f64, DensifierError> {
    check_dims(q.len(), e_w.len())?;
    check_dims(q.len(), e_v.len())?;
    let s = dot(q, e_w) - dot(q, e_v);
    Ok(match kind {
        PairKind::Same => s.abs(),
        PairKind::Diff => -s.abs(),
    })
}

/// Subgradient of [`pair_loss`] with respect to `q`: `sign(s) * (e_w - e_v)`
/// for same pairs, negated for diff pairs, and zero at `s = 0`.
pub fn pair_loss_gradient(
    q: &[f64],
    e_w: &[f64],
    e_v: &[f64],
    kind: PairKind,
) -> Result<Vec<f64>, DensifierError> {
    check_dims(q.len(), e_w.len())?;
    check_dims(q.len(), e_v.len())?;
    let s = dot(q, e_w) - dot(q, e_v);
    let sign = subgradient_sign(s)
        * match kind {
            PairKind::Same => 1.0,
            PairKind::Diff => -1.0,
        };
    Ok(e_w.iter().zip(e_v).map(|(w, v)| sign * (w - v)).collect())
}

fn subgradient_sign(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_dims(expected: usize, got: usize) -> Result<(), DensifierError> {
    if expected != got {
        return Err(DensifierError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// The combined objective and its two components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub loss: f64,
    pub sloss: f64,
    pub dloss: f64,
}

/// Evaluates `Loss = (1 - alpha) * SLoss + alpha * DLoss` where each
/// component is the mean pair loss over its list. Errors name the first
/// missing word.
pub fn combined_loss(
    q: &[f64],
    same_pairs: &[(String, String)],
    diff_pairs: &[(String, String)],
    alpha: f64,
    table: &EmbeddingTable,
) -> Result<LossBreakdown, DensifierError> {
    let resolve = |pairs: &[(String, String)]| -> Result<Vec<(usize, usize)>, DensifierError> {
        pairs
            .iter()
            .map(|(w, v)| {
                let wi = table
                    .word_index(w)
                    .ok_or_else(|| DensifierError::UnknownWord(w.clone()))?;
                let vi = table
                    .word_index(v)
                    .ok_or_else(|| DensifierError::UnknownWord(v.clone()))?;
                Ok((wi, vi))
            })
            .collect()
    };
    let same = resolve(same_pairs)?;
    let diff = resolve(diff_pairs)?;
    check_dims(q.len(), table.dim())?;
    Ok(loss_over_indices(q, &same, &diff, alpha, table))
}

/// Index-resolved loss evaluation; summation runs in pair-index order so the
/// result is bit-reproducible.
fn loss_over_indices(
    q: &[f64],
    same: &[(usize, usize)],
    diff: &[(usize, usize)],
    alpha: f64,
    table: &EmbeddingTable,
) -> LossBreakdown {
    let mean_abs = |pairs: &[(usize, usize)]| -> f64 {
        if pairs.is_empty() {
            return 0.0;
        }
        let sum: f64 = pairs
            .iter()
            .map(|&(wi, vi)| (dot(q, table.row(wi)) - dot(q, table.row(vi))).abs())
            .sum();
        sum / pairs.len() as f64
    };
    let sloss = mean_abs(same);
    let dloss = -mean_abs(diff);
    LossBreakdown {
        loss: (1.0 - alpha) * sloss + alpha * dloss,
        sloss,
        dloss,
    }
}

/// Training hyperparameters for the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DensifierConfig {
    /// Weight of the cross-polarity (separation) loss, in [0, 1].
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Re-orthogonalize the full matrix every this many batches.
    pub reorthogonalize_every: usize,
    pub rng_seed: u64,
}

impl Default for DensifierConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            epochs: 10,
            batch_size: 32,
            lr: 5e-3,
            reorthogonalize_every: 1,
            rng_seed: 1,
        }
    }
}

impl DensifierConfig {
    fn validate(&self) -> Result<(), DensifierError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(DensifierError::InvalidConfig(format!(
                "alpha {} must be in [0, 1]",
                self.alpha
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.reorthogonalize_every == 0 {
            return Err(DensifierError::InvalidConfig(
                "epochs, batch_size, and reorthogonalize_every must be positive".into(),
            ));
        }
        if self.lr.is_nan() || self.lr <= 0.0 {
            return Err(DensifierError::InvalidConfig("lr must be positive".into()));
        }
        Ok(())
    }
}

/// Per-epoch loss record.
#[derive(Debug, Clone, PartialEq)]
pub struct LossRecord {
    pub epoch: usize,
    pub sloss: f64,
    pub dloss: f64,
    pub loss: f64,
}

/// Per-epoch training losses, in epoch order; one record per epoch run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    records: Vec<LossRecord>,
}

impl LossTrace {
    pub fn records(&self) -> &[LossRecord] {
        &self.records
    }

    pub fn first(&self) -> Option<&LossRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&LossRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes `epoch<TAB>sloss<TAB>dloss<TAB>loss` rows.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            writeln!(w, "{}\t{}\t{}\t{}", r.epoch, r.sloss, r.dloss, r.loss)?;
        }
        Ok(())
    }
}

/// A square matrix with orthonormal rows; row 0 is the sentiment axis.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalTransform {
    data: Vec<f64>,
    dim: usize,
}

impl OrthogonalTransform {
    /// Validates squareness and `max |Q^T Q - I| <= 1e-4`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, DensifierError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(DensifierError::NotSquare);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            data.extend_from_slice(&row);
        }
        let transform = Self { data, dim };
        if transform.orthonormality_deviation() > ORTHONORMALITY_TOLERANCE {
            return Err(DensifierError::NotOrthonormal);
        }
        Ok(transform)
    }

    fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self, DensifierError> {
        let dim = m.nrows();
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(m[(i, j)]);
            }
        }
        let transform = Self { data, dim };
        if transform.orthonormality_deviation() > ORTHONORMALITY_TOLERANCE {
            return Err(DensifierError::NotOrthonormal);
        }
        Ok(transform)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// The sentiment axis `q` (row 0).
    pub fn axis(&self) -> &[f64] {
        self.row(0)
    }

    /// `max |Q^T Q - I|` over all entries.
    pub fn orthonormality_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                // (Q^T Q)[i][j] = sum_k Q[k][i] * Q[k][j]
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.data[k * n + i] * self.data[k * n + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).abs());
            }
        }
        worst
    }

    /// Persists the transform as `densifier-q v1 <dim>` followed by `dim`
    /// rows of `dim` floats; row 0 is the sentiment axis.
    pub fn save<W: Write>(&self, w: W) -> Result<(), DensifierError> {
        let rows: Vec<&[f64]> = (0..self.dim).map(|i| self.row(i)).collect();
        textio::write_tagged_matrix(w, TRANSFORM_TAG, self.dim, &[], &rows)?;
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self, DensifierError> {
        let matrix = textio::read_tagged_matrix(r, TRANSFORM_TAG)?;
        if matrix.rows.len() != matrix.dim {
            return Err(DensifierError::Parse {
                line: matrix.rows.len() + 1,
                message: format!(
                    "expected {} rows, found {}",
                    matrix.dim,
                    matrix.rows.len()
                ),
            });
        }
        Self::from_rows(matrix.rows)
    }
}

/// Projects `M` onto the nearest orthogonal matrix in Frobenius norm via the
/// SVD `M = U S V^T |-> U V^T`. Errors on rank deficiency.
pub fn orthogonalize(rows: &[Vec<f64>]) -> Result<OrthogonalTransform, DensifierError> {
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(DensifierError::NotSquare);
    }
    let m = DMatrix::from_row_iterator(dim, dim, rows.iter().flatten().copied());
    OrthogonalTransform::from_dmatrix(&nearest_orthogonal(&m)?)
}

fn nearest_orthogonal(m: &DMatrix<f64>) -> Result<DMatrix<f64>, DensifierError> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin <= smax * 1e-12 {
        return Err(DensifierError::RankDeficient);
    }
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    Ok(u * v_t)
}

/// Score of a word on the sentiment axis: `q . e_word`.
pub fn sentiment_score(
    transform: &OrthogonalTransform,
    table: &EmbeddingTable,
    word: &str,
) -> Result<f64, DensifierError> {
    check_dims(transform.dim(), table.dim())?;
    let e = table
        .vector(word)
        .ok_or_else(|| DensifierError::UnknownWord(word.to_string()))?;
    Ok(dot(transform.axis(), e))
}

/// Trains the transform from a seeded random orthogonal initialization.
pub fn train_densifier(
    table: &EmbeddingTable,
    seeds: &SeedLexicon,
    cfg: &DensifierConfig,
) -> Result<(OrthogonalTransform, LossTrace), DensifierError> {
    cfg.validate()?;
    if table.dim() < 2 {
        return Err(DensifierError::DimensionTooSmall(table.dim()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(0);
    let dim = table.dim();
    let gaussian = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let init = OrthogonalTransform::from_dmatrix(&nearest_orthogonal(&gaussian)?)?;
    train_densifier_from(table, seeds, cfg, init)
}

/// Trains the transform starting from a caller-supplied orthogonal matrix.
///
/// Shuffling still derives from `cfg.rng_seed`, so two runs with the same
/// seed, data, and initial transform are bitwise identical. Each epoch visits
/// shuffled mini-batches of pairs; only row 0 receives subgradient steps (a
/// pair's contribution is scaled by `(1 - alpha) / n_same` or
/// `alpha / n_diff` so a full pass reproduces the exact combined-loss
/// gradient); the whole matrix is re-orthogonalized on the configured cadence
/// and once at the end, then the axis sign is oriented so train-positive
/// seeds score above train-negative ones.
pub fn train_densifier_from(
    table: &EmbeddingTable,
    seeds: &SeedLexicon,
    cfg: &DensifierConfig,
    init: OrthogonalTransform,
) -> Result<(OrthogonalTransform, LossTrace), DensifierError> {
    cfg.validate()?;
    let dim = table.dim();
    if dim < 2 {
        return Err(DensifierError::DimensionTooSmall(dim));
    }
    check_dims(init.dim(), dim)?;

    let (train_pos, train_neg) = seeds.train_words();
    let missing: Vec<&str> = train_pos
        .iter()
        .chain(train_neg)
        .filter(|w| table.vector(w).is_none())
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(DensifierError::MissingSeedWords(missing.join(", ")));
    }

    let seed_rows: Vec<&[f64]> = train_pos
        .iter()
        .chain(train_neg)
        .map(|w| table.vector(w).expect("checked above"))
        .collect();
    if seed_rows.windows(2).all(|pair| pair[0] == pair[1]) {
        return Err(DensifierError::DegenerateSeeds);
    }

    let (same_pairs, diff_pairs) = make_pairs(train_pos, train_neg)?;
    let to_indices = |pairs: &[(String, String)]| -> Vec<(usize, usize)> {
        pairs
            .iter()
            .map(|(w, v)| {
                (
                    table.word_index(w).expect("checked above"),
                    table.word_index(v).expect("checked above"),
                )
            })
            .collect()
    };
    let same = to_indices(&same_pairs);
    let diff = to_indices(&diff_pairs);

    let mut entries: Vec<(PairKind, usize, usize)> = same
        .iter()
        .map(|&(w, v)| (PairKind::Same, w, v))
        .chain(diff.iter().map(|&(w, v)| (PairKind::Diff, w, v)))
        .collect();

    let same_weight = (1.0 - cfg.alpha) / same.len() as f64;
    let diff_weight = cfg.alpha / diff.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(1);

    let mut q_mat = DMatrix::from_row_iterator(
        dim,
        dim,
        (0..dim).flat_map(|i| init.row(i).to_vec()),
    );
    let mut q: Vec<f64> = init.axis().to_vec();

    let batches_per_epoch = entries.len().div_ceil(cfg.batch_size);
    let total_batches = (cfg.epochs * batches_per_epoch).max(1);
    let mut global_batch = 0usize;
    let mut grad = vec![0.0; dim];
    let mut trace = LossTrace::default();

    for epoch in 1..=cfg.epochs {
        shuffle(&mut entries, &mut rng);
        for batch in entries.chunks(cfg.batch_size) {
            let lr = cfg.lr * (1.0 - 0.9 * global_batch as f64 / total_batches as f64);
            grad.fill(0.0);
            for &(kind, wi, vi) in batch {
                let e_w = table.row(wi);
                let e_v = table.row(vi);
                let s = dot(&q, e_w) - dot(&q, e_v);
                let scale = match kind {
                    PairKind::Same => same_weight * subgradient_sign(s),
                    PairKind::Diff => -diff_weight * subgradient_sign(s),
                };
                if scale != 0.0 {
                    for d in 0..dim {
                        grad[d] += scale * (e_w[d] - e_v[d]);
                    }
                }
            }
            for d in 0..dim {
                q[d] -= lr * grad[d];
            }
            global_batch += 1;
            if global_batch.is_multiple_of(cfg.reorthogonalize_every) {
                write_axis_row(&mut q_mat, &q);
                q_mat = nearest_orthogonal(&q_mat)?;
                copy_axis_row(&q_mat, &mut q);
            }
        }
        let breakdown = loss_over_indices(&q, &same, &diff, cfg.alpha, table);
        if !breakdown.loss.is_finite() {
            return Err(DensifierError::Diverged(epoch));
        }
        trace.records.push(LossRecord {
            epoch,
            sloss: breakdown.sloss,
            dloss: breakdown.dloss,
            loss: breakdown.loss,
        });
    }

    write_axis_row(&mut q_mat, &q);
    q_mat = nearest_orthogonal(&q_mat)?;
    copy_axis_row(&q_mat, &mut q);

    let mean_score = |words: &[String]| -> f64 {
        let sum: f64 = words
            .iter()
            .map(|w| dot(&q, table.vector(w).expect("checked above")))
            .sum();
        sum / words.len() as f64
    };
    let pos_mean = mean_score(train_pos);
    let neg_mean = mean_score(train_neg);
    if pos_mean == neg_mean {
        return Err(DensifierError::UndefinedOrientation);
    }
    if pos_mean < neg_mean {
        for j in 0..dim {
            q_mat[(0, j)] = -q_mat[(0, j)];
        }
    }

    Ok((OrthogonalTransform::from_dmatrix(&q_mat)?, trace))
}

fn write_axis_row(m: &mut DMatrix<f64>, q: &[f64]) {
    for (j, v) in q.iter().enumerate() {
        m[(0, j)] = *v;
    }
}

fn copy_axis_row(m: &DMatrix<f64>, q: &mut [f64]) {
    for (j, v) in q.iter_mut().enumerate() {
        *v = m[(0, j)];
    }
}

/// Fisher-Yates with our own index draws, run on one dedicated stream.
fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    use rand::Rng;
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::cosine;
    use rand::Rng;

    fn words(list: &[&str]) -> Vec<String> {
        list.iter().map(|w| w.to_string()).collect()
    }

    fn table_of(entries: &[(&str, &[f64])]) -> EmbeddingTable {
        EmbeddingTable::from_rows(
            entries.iter().map(|(w, _)| w.to_string()).collect(),
            entries.iter().map(|(_, r)| r.to_vec()).collect(),
        )
        .unwrap()
    }

    /// A planted table: seeds sit at +/- signal on axis 0 plus seeded noise.
    fn planted_table(
        dim: usize,
        pos: &[String],
        neg: &[String],
        fillers: usize,
        signal: f64,
        sigma: f64,
        seed: u64,
    ) -> EmbeddingTable {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noise = |scale: f64| -> f64 {
            let x: f64 = StandardNormal.sample(&mut rng);
            x * scale
        };
        let mut names = Vec::new();
        let mut rows = Vec::new();
        for (list, sign) in [(pos, 1.0), (neg, -1.0)] {
            for w in list {
                let mut row: Vec<f64> = (0..dim).map(|_| noise(sigma)).collect();
                row[0] += sign * signal;
                names.push(w.clone());
                rows.push(row);
            }
        }
        for i in 0..fillers {
            names.push(format!("filler{i:03}"));
            rows.push((0..dim).map(|_| noise(sigma)).collect());
        }
        EmbeddingTable::from_rows(names, rows).unwrap()
    }

    fn planted_seeds(n: usize) -> SeedLexicon {
        let pos: Vec<String> = (0..n).map(|i| format!("pos{i:02}")).collect();
        let neg: Vec<String> = (0..n).map(|i| format!("neg{i:02}")).collect();
        SeedLexicon::new(pos, neg, 0.0).unwrap()
    }

    fn fast_cfg() -> DensifierConfig {
        DensifierConfig {
            epochs: 15,
            lr: 1e-2,
            ..DensifierConfig::default()
        }
    }

    /// Enough steps to drive the axis all the way onto a planted direction.
    fn strong_cfg() -> DensifierConfig {
        DensifierConfig {
            epochs: 40,
            lr: 5e-2,
            batch_size: 16,
            ..DensifierConfig::default()
        }
    }

    /// Builds an n x n rotation as a product of seeded Givens rotations;
    /// independent of the SVD code under test.
    fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for a in 0..n {
            for b in (a + 1)..n {
                let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (sin, cos) = theta.sin_cos();
                for row in m.iter_mut() {
                    let (x, y) = (row[a], row[b]);
                    row[a] = cos * x - sin * y;
                    row[b] = sin * x + cos * y;
                }
            }
        }
        m
    }

    fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                out[i][j] = (0..n).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn make_pairs_enumerates_small_case() {
        let (same, diff) = make_pairs(&words(&["a", "b"]), &words(&["c"])).unwrap();
        assert_eq!(same, vec![("a".to_string(), "b".to_string())]);
        assert_eq!(
            diff,
            vec![
                ("a".to_string(), "c".to_string()),
                ("b".to_string(), "c".to_string())
            ]
        );
    }

    #[test]
    fn make_pairs_counts_match_combinatorics() {
        let pos = words(&["p1", "p2", "p3", "p4", "p5"]);
        let neg = words(&["n1", "n2", "n3", "n4", "n5"]);
        let (same, diff) = make_pairs(&pos, &neg).unwrap();
        // Oracle: 2 * C(5, 2) within-polarity pairs, 5 * 5 cross pairs.
        let choose2 = |n: usize| n * (n - 1) / 2;
        assert_eq!(same.len(), 2 * choose2(5));
        assert_eq!(same.len(), 20);
        assert_eq!(diff.len(), 25);
        assert!(same.iter().all(|(a, b)| a != b));
    }

    #[test]
    fn make_pairs_needs_a_same_polarity_pair() {
        let err = make_pairs(&words(&["a"]), &words(&["b"])).unwrap_err();
        assert!(matches!(err, DensifierError::NoTrainingPairs { same: 0, diff: 1 }));
    }

    #[test]
    fn pair_loss_hand_arithmetic() {
        let q = [1.0, 0.0];
        let e_w = [3.0, 1.0];
        let e_v = [1.0, 1.0];
        assert_eq!(pair_loss(&q, &e_w, &e_v, PairKind::Same).unwrap(), 2.0);
        assert_eq!(pair_loss(&q, &e_w, &e_v, PairKind::Diff).unwrap(), -2.0);
        assert_eq!(pair_loss(&q, &e_w, &e_w, PairKind::Same).unwrap(), 0.0);
        assert_eq!(pair_loss(&q, &e_w, &e_w, PairKind::Diff).unwrap(), 0.0);
    }

    #[test]
    fn pair_loss_rejects_dimension_mismatch() {
        assert!(matches!(
            pair_loss(&[1.0, 0.0], &[1.0], &[1.0, 2.0], PairKind::Same),
            Err(DensifierError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    fn cancel_table() -> EmbeddingTable {
        table_of(&[
            ("a", &[3.0, 1.0]),
            ("b", &[1.0, 1.0]),
            ("c", &[2.0, 0.0]),
            ("d", &[0.0, 0.0]),
        ])
    }

    #[test]
    fn combined_loss_cancels_at_half_alpha() {
        let table = cancel_table();
        let q = [1.0, 0.0];
        let same = vec![("a".to_string(), "b".to_string())];
        let diff = vec![("c".to_string(), "d".to_string())];
        let b = combined_loss(&q, &same, &diff, 0.5, &table).unwrap();
        assert_eq!(b.sloss, 2.0);
        assert_eq!(b.dloss, -2.0);
        assert_eq!(b.loss, 0.0);
    }

    #[test]
    fn combined_loss_degenerates_at_alpha_extremes() {
        let table = cancel_table();
        let q = [1.0, 0.0];
        let same = vec![("a".to_string(), "b".to_string())];
        let diff = vec![("c".to_string(), "d".to_string())];
        let at0 = combined_loss(&q, &same, &diff, 0.0, &table).unwrap();
        assert_eq!(at0.loss, at0.sloss);
        let at1 = combined_loss(&q, &same, &diff, 1.0, &table).unwrap();
        assert_eq!(at1.loss, at1.dloss);
    }

    #[test]
    fn combined_loss_names_missing_word() {
        let table = cancel_table();
        let q = [1.0, 0.0];
        let same = vec![("a".to_string(), "ghost".to_string())];
        let err = combined_loss(&q, &same, &[], 0.5, &table).unwrap_err();
        assert!(matches!(err, DensifierError::UnknownWord(w) if w == "ghost"));
    }

    #[test]
    fn orthogonalize_fixes_identity() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let t = orthogonalize(&rows).unwrap();
        assert!((t.row(0)[0] - 1.0).abs() < 1e-12);
        assert!((t.row(1)[1] - 1.0).abs() < 1e-12);
        assert!(t.row(0)[1].abs() < 1e-12);
    }

    #[test]
    fn orthogonalize_recovers_scaled_rotations() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let r = random_rotation(4, &mut rng);
            let doubled: Vec<Vec<f64>> =
                r.iter().map(|row| row.iter().map(|v| 2.0 * v).collect()).collect();
            let t = orthogonalize(&doubled).unwrap();
            for (i, expected_row) in r.iter().enumerate() {
                for (j, expected) in expected_row.iter().enumerate() {
                    assert!(
                        (t.row(i)[j] - expected).abs() < 1e-10,
                        "entry ({i},{j}) differs"
                    );
                }
            }
        }
    }

    #[test]
    fn orthogonalize_output_is_orthonormal_on_random_inputs() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            // Well-conditioned by construction: rotation * diag(1..2) * rotation.
            let left = random_rotation(10, &mut rng);
            let right = random_rotation(10, &mut rng);
            let mut scaled = left.clone();
            for (j, col_scale) in (0..10).map(|j| (j, 1.0 + j as f64 / 9.0)) {
                for row in scaled.iter_mut() {
                    row[j] *= col_scale;
                }
            }
            let m = matmul(&scaled, &right);
            let t = orthogonalize(&m).unwrap();
            assert!(t.orthonormality_deviation() <= 1e-10);
        }
    }

    #[test]
    fn orthogonalize_rejects_rank_deficient_input() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(
            orthogonalize(&rows),
            Err(DensifierError::RankDeficient)
        ));
    }

    #[test]
    fn subgradient_matches_central_finite_differences() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let dim = 8;
        let h = 1e-5;
        let mut checked = 0;
        while checked < 100 {
            let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let e_w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let e_v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = dot(&q, &e_w) - dot(&q, &e_v);
            if s.abs() < 1e-2 {
                continue; // stay away from the kink
            }
            let kind = if checked % 2 == 0 { PairKind::Same } else { PairKind::Diff };
            let analytic = pair_loss_gradient(&q, &e_w, &e_v, kind).unwrap();
            for d in 0..dim {
                let mut plus = q.clone();
                plus[d] += h;
                let mut minus = q.clone();
                minus[d] -= h;
                let numeric = (pair_loss(&plus, &e_w, &e_v, kind).unwrap()
                    - pair_loss(&minus, &e_w, &e_v, kind).unwrap())
                    / (2.0 * h);
                let denom = analytic[d].abs().max(1e-6);
                assert!(
                    (analytic[d] - numeric).abs() / denom <= 1e-4,
                    "component {d}: analytic {} vs numeric {}",
                    analytic[d],
                    numeric
                );
            }
            checked += 1;
        }
    }

    #[test]
    fn training_recovers_planted_axis() {
        let seeds = planted_seeds(10);
        let table = planted_table(8, seeds.positive(), seeds.negative(), 40, 5.0, 0.1, 3);
        let (transform, trace) = train_densifier(&table, &seeds, &strong_cfg()).unwrap();
        let mut e0 = vec![0.0; 8];
        e0[0] = 1.0;
        let c = cosine(transform.axis(), &e0);
        assert!(c.abs() >= 0.95, "planted-axis cosine {c:.3}");
        assert!(transform.orthonormality_deviation() <= ORTHONORMALITY_TOLERANCE);
        assert_eq!(trace.len(), strong_cfg().epochs);
    }

    #[test]
    fn training_reduces_loss_on_separable_seeds() {
        let seeds = planted_seeds(10);
        let table = planted_table(8, seeds.positive(), seeds.negative(), 40, 5.0, 0.1, 4);
        let (_, trace) = train_densifier(&table, &seeds, &fast_cfg()).unwrap();
        let first = trace.first().unwrap();
        let last = trace.last().unwrap();
        assert!(last.dloss < first.dloss, "{} !< {}", last.dloss, first.dloss);
        assert!(last.loss < first.loss);
        assert!(last.loss <= trace.records()[0].loss);
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let seeds = planted_seeds(5);
        let table = planted_table(6, seeds.positive(), seeds.negative(), 20, 5.0, 0.1, 5);
        let (t1, tr1) = train_densifier(&table, &seeds, &fast_cfg()).unwrap();
        let (t2, tr2) = train_densifier(&table, &seeds, &fast_cfg()).unwrap();
        assert_eq!(tr1, tr2);
        for i in 0..t1.dim() {
            assert!(t1
                .row(i)
                .iter()
                .zip(t2.row(i))
                .all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn training_orients_positive_seeds_above_negative() {
        let seeds = planted_seeds(5);
        let table = planted_table(6, seeds.positive(), seeds.negative(), 20, 5.0, 0.1, 6);
        let (transform, _) = train_densifier(&table, &seeds, &fast_cfg()).unwrap();
        let mean = |list: &[String]| -> f64 {
            list.iter()
                .map(|w| sentiment_score(&transform, &table, w).unwrap())
                .sum::<f64>()
                / list.len() as f64
        };
        assert!(mean(seeds.positive()) > mean(seeds.negative()));
    }

    #[test]
    fn training_lists_missing_seed_words() {
        let seeds = planted_seeds(5);
        let table = planted_table(6, seeds.positive(), seeds.negative(), 0, 5.0, 0.1, 7);
        let bad = SeedLexicon::new(
            words(&["pos00", "pos01", "ghost1"]),
            words(&["neg00", "ghost2"]),
            0.0,
        )
        .unwrap();
        let err = train_densifier(&table, &bad, &fast_cfg()).unwrap_err();
        match err {
            DensifierError::MissingSeedWords(list) => {
                assert!(list.contains("ghost1") && list.contains("ghost2"));
            }
            other => panic!("expected MissingSeedWords, got {other:?}"),
        }
    }

    #[test]
    fn identical_seed_embeddings_are_rejected() {
        let table = table_of(&[
            ("p1", &[1.0, 1.0]),
            ("p2", &[1.0, 1.0]),
            ("n1", &[1.0, 1.0]),
            ("n2", &[1.0, 1.0]),
        ]);
        let seeds = SeedLexicon::new(words(&["p1", "p2"]), words(&["n1", "n2"]), 0.0).unwrap();
        assert!(matches!(
            train_densifier(&table, &seeds, &fast_cfg()),
            Err(DensifierError::DegenerateSeeds)
        ));
    }

    #[test]
    fn training_is_equivariant_under_rotated_data_and_init() {
        use rand::SeedableRng;
        let seeds = planted_seeds(5);
        let dim = 6;
        let table = planted_table(dim, seeds.positive(), seeds.negative(), 20, 5.0, 0.1, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rotation = random_rotation(dim, &mut rng);

        // Rotated table: e' = R e  (row vectors: e' = e R^T).
        let rotated_rows: Vec<Vec<f64>> = (0..table.len())
            .map(|i| {
                let e = table.row(i);
                (0..dim)
                    .map(|r| (0..dim).map(|c| rotation[r][c] * e[c]).sum())
                    .collect()
            })
            .collect();
        let rotated =
            EmbeddingTable::from_rows(table.vocab().to_vec(), rotated_rows).unwrap();

        let cfg = fast_cfg();
        let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        init_rng.set_stream(0);
        let gaussian: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut init_rng)).collect())
            .collect();
        let init = orthogonalize(&gaussian).unwrap();
        // Equivariant start: Q' = Q R^T, i.e. each row rotated like the data.
        let rotated_init_rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                let row = init.row(i);
                (0..dim)
                    .map(|r| (0..dim).map(|c| rotation[r][c] * row[c]).sum())
                    .collect()
            })
            .collect();
        let rotated_init = orthogonalize(&rotated_init_rows).unwrap();

        let (t_base, trace_base) =
            train_densifier_from(&table, &seeds, &cfg, init).unwrap();
        let (t_rot, trace_rot) =
            train_densifier_from(&rotated, &seeds, &cfg, rotated_init).unwrap();

        let base_loss = trace_base.last().unwrap().loss;
        let rot_loss = trace_rot.last().unwrap().loss;
        assert!(
            (base_loss - rot_loss).abs() <= 1e-6,
            "final losses differ: {base_loss} vs {rot_loss}"
        );

        // q' should equal q rotated: q'[r] = sum_c R[r][c] q[c].
        let q = t_base.axis();
        let expected: Vec<f64> = (0..dim)
            .map(|r| (0..dim).map(|c| rotation[r][c] * q[c]).sum())
            .collect();
        for (a, b) in t_rot.axis().iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-6, "axis mismatch: {a} vs {b}");
        }
    }

    #[test]
    fn sentiment_score_is_a_dot_product() {
        let table = table_of(&[("w", &[1.0, 1.0]), ("zero", &[0.0, 0.0])]);
        let transform = OrthogonalTransform::from_rows(vec![
            vec![0.6, 0.8],
            vec![-0.8, 0.6],
        ])
        .unwrap();
        assert!((sentiment_score(&transform, &table, "w").unwrap() - 1.4).abs() < 1e-12);
        assert_eq!(sentiment_score(&transform, &table, "zero").unwrap(), 0.0);
        assert!(matches!(
            sentiment_score(&transform, &table, "ghost"),
            Err(DensifierError::UnknownWord(w)) if w == "ghost"
        ));
    }

    #[test]
    fn score_ignores_unrelated_vocabulary_growth() {
        let small = table_of(&[("w", &[1.0, 1.0])]);
        let big = table_of(&[("w", &[1.0, 1.0]), ("extra", &[9.0, 9.0])]);
        let transform = OrthogonalTransform::from_rows(vec![
            vec![0.6, 0.8],
            vec![-0.8, 0.6],
        ])
        .unwrap();
        assert_eq!(
            sentiment_score(&transform, &small, "w").unwrap(),
            sentiment_score(&transform, &big, "w").unwrap()
        );
    }

    #[test]
    fn transform_save_load_round_trip() {
        let seeds = planted_seeds(5);
        let table = planted_table(6, seeds.positive(), seeds.negative(), 10, 5.0, 0.1, 10);
        let (transform, _) = train_densifier(&table, &seeds, &fast_cfg()).unwrap();
        let mut buf = Vec::new();
        transform.save(&mut buf).unwrap();
        let back = OrthogonalTransform::load(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back, transform);
    }

    #[test]
    fn transform_load_rejects_non_orthonormal_rows() {
        let mut buf = Vec::new();
        textio::write_tagged_matrix(
            &mut buf,
            TRANSFORM_TAG,
            2,
            &[],
            &[&[1.0, 0.5], &[0.0, 1.0]],
        )
        .unwrap();
        assert!(matches!(
            OrthogonalTransform::load(std::io::Cursor::new(&buf)),
            Err(DensifierError::NotOrthonormal)
        ));
    }

    #[test]
    fn seed_lexicon_validates_inputs() {
        assert!(matches!(
            SeedLexicon::new(words(&["a", "b"]), words(&["b", "c"]), 0.0),
            Err(DensifierError::OverlappingSeeds(w)) if w == "b"
        ));
        assert!(matches!(
            SeedLexicon::new(words(&["a"]), words(&["b", "c"]), 0.0),
            Err(DensifierError::TooFewTrainSeeds)
        ));
        assert!(matches!(
            SeedLexicon::new(words(&["a", "b"]), words(&["c", "d"]), 1.0),
            Err(DensifierError::InvalidHoldoutFraction(_))
        ));
    }

    #[test]
    fn seed_lexicon_splits_tail_as_holdout() {
        let pos = words(&["p1", "p2", "p3", "p4", "p5"]);
        let neg = words(&["n1", "n2", "n3", "n4", "n5"]);
        let seeds = SeedLexicon::new(pos, neg, 0.4).unwrap();
        let (train_pos, train_neg) = seeds.train_words();
        let (hold_pos, hold_neg) = seeds.holdout_words();
        assert_eq!(train_pos, &words(&["p1", "p2", "p3"])[..]);
        assert_eq!(hold_pos, &words(&["p4", "p5"])[..]);
        assert_eq!(train_neg.len(), 3);
        assert_eq!(hold_neg.len(), 2);
    }

    #[test]
    fn seed_lexicon_truncates_for_experiments() {
        let pos = words(&["p1", "p2", "p3", "p4", "p5"]);
        let neg = words(&["n1", "n2", "n3", "n4", "n5"]);
        let seeds = SeedLexicon::new(pos, neg, 0.0).unwrap();
        let small = seeds.truncated(3).unwrap();
        assert_eq!(small.positive(), &words(&["p1", "p2", "p3"])[..]);
        assert!(matches!(
            seeds.truncated(6),
            Err(DensifierError::SeedSizeTooLarge { requested: 6, .. })
        ));
    }

    #[test]
    fn seed_lexicon_reads_tsv_and_word_files() {
        let tsv = "good\tpos\nbad\tneg\nnice\tpos\nawful\tneg\n";
        let seeds = SeedLexicon::read_tsv(std::io::Cursor::new(tsv), 0.0).unwrap();
        assert_eq!(seeds.positive(), &words(&["good", "nice"])[..]);
        assert_eq!(seeds.negative(), &words(&["bad", "awful"])[..]);

        let from_files = SeedLexicon::from_word_files(
            std::io::Cursor::new("good\nnice\n"),
            std::io::Cursor::new("bad\nawful\n"),
            0.0,
        )
        .unwrap();
        assert_eq!(from_files.positive(), seeds.positive());
        assert_eq!(from_files.negative(), seeds.negative());
    }

    #[test]
    fn loss_trace_tsv_has_one_row_per_epoch() {
        let seeds = planted_seeds(5);
        let table = planted_table(6, seeds.positive(), seeds.negative(), 10, 5.0, 0.1, 14);
        let cfg = DensifierConfig {
            epochs: 3,
            ..fast_cfg()
        };
        let (_, trace) = train_densifier(&table, &seeds, &cfg).unwrap();
        let mut buf = Vec::new();
        trace.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().next().unwrap().starts_with("1\t"));
    }
}
