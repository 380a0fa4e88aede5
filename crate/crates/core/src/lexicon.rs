//! Lexicon construction, evaluation metrics, the seed-size experiment, and
//! plot-data emitters.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::densifier::{
    self, DensifierConfig, DensifierError, LossTrace, OrthogonalTransform, SeedLexicon,
};
use crate::embedding::EmbeddingTable;
use crate::pca::{self, PcaAxis, PcaError};
use crate::textio;

/// Jitter bound for scatter plots: y is uniform in `[-JITTER_BOUND, JITTER_BOUND]`.
pub const JITTER_BOUND: i64 = 100;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error(transparent)]
    Densifier(#[from] DensifierError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error("duplicate word `{0}` in lexicon")]
    DuplicateWord(String),
    #[error("non-finite score for `{0}`")]
    NonFiniteScore(String),
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("label set is empty")]
    EmptyLabels,
    #[error("duplicate label for word `{0}`")]
    DuplicateLabel(String),
    #[error("no labeled word is present in the lexicon")]
    NoLabeledWordsPresent,
    #[error("k={k} exceeds the {polarity} labeled words present in the lexicon ({available})")]
    KTooLarge {
        k: usize,
        polarity: Polarity,
        available: usize,
    },
    #[error("reference ranking shares fewer than 2 words with the lexicon")]
    NoSharedWords,
    #[error("lexicon word `{0}` is not in the embedding table")]
    WordNotInTable(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<textio::TextError> for LexiconError {
    fn from(e: textio::TextError) -> Self {
        LexiconError::Parse {
            line: e.line,
            message: e.message,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Polarity::Positive => "pos",
            Polarity::Negative => "neg",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labeled evaluation words (`word<TAB>pos|neg`), order-preserving.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledWords {
    entries: Vec<(String, Polarity)>,
}

impl LabeledWords {
    pub fn from_pairs<I>(pairs: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (String, Polarity)>,
    {
        let mut seen = HashMap::new();
        let mut entries = Vec::new();
        for (word, polarity) in pairs {
            if seen.insert(word.clone(), polarity).is_some() {
                return Err(LexiconError::DuplicateLabel(word));
            }
            entries.push((word, polarity));
        }
        Ok(Self { entries })
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self, LexiconError> {
        let labeled = textio::parse_labeled_words(r)?;
        Self::from_pairs(labeled.into_iter().map(|(w, positive)| {
            let polarity = if positive {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            (w, polarity)
        }))
    }

    pub fn entries(&self) -> &[(String, Polarity)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn polarity_of(&self, word: &str) -> Option<Polarity> {
        self.entries
            .iter()
            .find(|(w, _)| w == word)
            .map(|&(_, p)| p)
    }
}

/// Which scoring backend produced a lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconSource {
    Densifier,
    Pca,
}

impl LexiconSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            LexiconSource::Densifier => "densifier",
            LexiconSource::Pca => "pca",
        }
    }
}

impl fmt::Display for LexiconSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Echo of the configuration that produced a lexicon.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LexiconMetadata {
    pub seed_size: Option<usize>,
    pub alpha: Option<f64>,
    pub rng_seed: Option<u64>,
}

/// One ranked lexicon row. `vocab_index` is the word's position in the
/// original vocabulary order, used by the value-curve plot.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub word: String,
    pub score: f64,
    pub rank: usize,
    pub vocab_index: usize,
}

/// A word -> score table sorted by score descending (ranks 1..n, ties broken
/// lexicographically).
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    entries: Vec<LexiconEntry>,
    source: LexiconSource,
    metadata: LexiconMetadata,
}

impl SentimentLexicon {
    /// Builds a lexicon from `(word, score, vocab_index)` triples, sorting by
    /// score descending with lexicographic tie-breaks.
    pub fn from_scores(
        scored: Vec<(String, f64, usize)>,
        source: LexiconSource,
        metadata: LexiconMetadata,
    ) -> Result<Self, LexiconError> {
        let mut seen = HashMap::new();
        for (word, score, _) in &scored {
            if !score.is_finite() {
                return Err(LexiconError::NonFiniteScore(word.clone()));
            }
            if seen.insert(word.clone(), ()).is_some() {
                return Err(LexiconError::DuplicateWord(word.clone()));
            }
        }
        let mut scored = scored;
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let entries = scored
            .into_iter()
            .enumerate()
            .map(|(i, (word, score, vocab_index))| LexiconEntry {
                word,
                score,
                rank: i + 1,
                vocab_index,
            })
            .collect();
        Ok(Self {
            entries,
            source,
            metadata,
        })
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn source(&self) -> LexiconSource {
        self.source
    }

    pub fn metadata(&self) -> &LexiconMetadata {
        &self.metadata
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn score_of(&self, word: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.word == word)
            .map(|e| e.score)
    }

    pub fn rank_of(&self, word: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.word == word).map(|e| e.rank)
    }

    /// Writes `rank<TAB>word<TAB>score` rows, most positive first.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.entries {
            writeln!(w, "{}\t{}\t{}", e.rank, e.word, e.score)?;
        }
        Ok(())
    }

    /// Reads the TSV written by [`write_tsv`](SentimentLexicon::write_tsv),
    /// recovering vocabulary indices from `table`.
    pub fn read_tsv<R: BufRead>(
        r: R,
        table: &EmbeddingTable,
        source: LexiconSource,
        metadata: LexiconMetadata,
    ) -> Result<Self, LexiconError> {
        let mut scored = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 3 {
                return Err(LexiconError::Parse {
                    line: lineno,
                    message: format!("expected `rank<TAB>word<TAB>score`, got `{trimmed}`"),
                });
            }
            let word = fields[1].to_string();
            let score: f64 = fields[2].parse().map_err(|_| LexiconError::Parse {
                line: lineno,
                message: format!("bad score `{}`", fields[2]),
            })?;
            let vocab_index = table
                .word_index(&word)
                .ok_or_else(|| LexiconError::WordNotInTable(word.clone()))?;
            scored.push((word, score, vocab_index));
        }
        Self::from_scores(scored, source, metadata)
    }
}

/// A scoring backend that assigns each vocabulary word a scalar.
pub trait ScoreBackend {
    fn source(&self) -> LexiconSource;
    fn dim(&self) -> usize;
    fn score(&self, table: &EmbeddingTable, word: &str) -> Result<f64, LexiconError>;
}

impl ScoreBackend for OrthogonalTransform {
    fn source(&self) -> LexiconSource {
        LexiconSource::Densifier
    }

    fn dim(&self) -> usize {
        self.dim()
    }

    fn score(&self, table: &EmbeddingTable, word: &str) -> Result<f64, LexiconError> {
        Ok(densifier::sentiment_score(self, table, word)?)
    }
}

impl ScoreBackend for PcaAxis {
    fn source(&self) -> LexiconSource {
        LexiconSource::Pca
    }

    fn dim(&self) -> usize {
        self.dim()
    }

    fn score(&self, table: &EmbeddingTable, word: &str) -> Result<f64, LexiconError> {
        Ok(pca::pca_score(self, table, word)?)
    }
}

/// Scores every vocabulary word with the backend and returns the sorted
/// lexicon.
pub fn build_lexicon<B: ScoreBackend + ?Sized>(
    scorer: &B,
    table: &EmbeddingTable,
    metadata: LexiconMetadata,
) -> Result<SentimentLexicon, LexiconError> {
    let mut scored = Vec::with_capacity(table.len());
    for (vocab_index, word) in table.vocab().iter().enumerate() {
        scored.push((word.clone(), scorer.score(table, word)?, vocab_index));
    }
    SentimentLexicon::from_scores(scored, scorer.source(), metadata)
}

/// Summary statistics of a lexicon against a labeled word file.
///
/// `holdout_margin` is the minimum positive-labeled score minus the maximum
/// negative-labeled score (positive means perfect separation). Precision@k is
/// computed per polarity over the labeled words present in the lexicon:
/// from the top for positive, from the bottom for negative. Kendall's tau is
/// the tie-free tau-a over words shared with a reference ranking (ties
/// contribute 0).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub max_score: f64,
    pub min_score: f64,
    pub span: f64,
    pub holdout_margin: Option<f64>,
    pub precision_at_k_positive: Option<f64>,
    pub precision_at_k_negative: Option<f64>,
    pub k: usize,
    pub kendall_tau: Option<f64>,
    pub labeled_present: usize,
}

impl EvalReport {
    /// Span-only report used when no labels are available.
    pub fn from_scores_only(lex: &SentimentLexicon) -> Result<Self, LexiconError> {
        let (max_score, min_score) = score_extremes(lex)?;
        Ok(Self {
            max_score,
            min_score,
            span: max_score - min_score,
            holdout_margin: None,
            precision_at_k_positive: None,
            precision_at_k_negative: None,
            k: 0,
            kendall_tau: None,
            labeled_present: 0,
        })
    }

    /// Writes the report as flat `key=value` lines; absent metrics are
    /// written as `NA`. The tau variant is recorded in the header line.
    pub fn write_key_values<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# kendall_variant=tau-a ties_contribute=0")?;
        let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
        writeln!(w, "max_score={}", self.max_score)?;
        writeln!(w, "min_score={}", self.min_score)?;
        writeln!(w, "span={}", self.span)?;
        writeln!(w, "holdout_margin={}", opt(self.holdout_margin))?;
        writeln!(w, "precision_at_k_pos={}", opt(self.precision_at_k_positive))?;
        writeln!(w, "precision_at_k_neg={}", opt(self.precision_at_k_negative))?;
        writeln!(w, "k={}", self.k)?;
        writeln!(w, "kendall_tau={}", opt(self.kendall_tau))?;
        writeln!(w, "labeled_present={}", self.labeled_present)?;
        Ok(())
    }
}

fn score_extremes(lex: &SentimentLexicon) -> Result<(f64, f64), LexiconError> {
    let first = lex.entries().first().ok_or(LexiconError::EmptyLexicon)?;
    let last = lex.entries().last().expect("non-empty");
    Ok((first.score, last.score))
}

/// Evaluates a lexicon against labeled words; see [`EvalReport`] for the
/// metric definitions. `reference` optionally supplies a second ranking for
/// Kendall's tau.
pub fn evaluate(
    lex: &SentimentLexicon,
    labels: &LabeledWords,
    k: usize,
    reference: Option<&SentimentLexicon>,
) -> Result<EvalReport, LexiconError> {
    if labels.is_empty() {
        return Err(LexiconError::EmptyLabels);
    }
    let (max_score, min_score) = score_extremes(lex)?;

    // Labeled words present in the lexicon, in rank order.
    let present: Vec<(&LexiconEntry, Polarity)> = lex
        .entries()
        .iter()
        .filter_map(|e| labels.polarity_of(&e.word).map(|p| (e, p)))
        .collect();
    if present.is_empty() {
        return Err(LexiconError::NoLabeledWordsPresent);
    }

    let count_of = |polarity: Polarity| present.iter().filter(|(_, p)| *p == polarity).count();
    let pos_present = count_of(Polarity::Positive);
    let neg_present = count_of(Polarity::Negative);
    for (polarity, available) in [
        (Polarity::Positive, pos_present),
        (Polarity::Negative, neg_present),
    ] {
        if available > 0 && k > available {
            return Err(LexiconError::KTooLarge {
                k,
                polarity,
                available,
            });
        }
    }

    let min_pos = present
        .iter()
        .filter(|(_, p)| *p == Polarity::Positive)
        .map(|(e, _)| e.score)
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))));
    let max_neg = present
        .iter()
        .filter(|(_, p)| *p == Polarity::Negative)
        .map(|(e, _)| e.score)
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))));
    let holdout_margin = match (min_pos, max_neg) {
        (Some(lo), Some(hi)) => Some(lo - hi),
        _ => None,
    };

    let precision_at_k_positive = (pos_present > 0).then(|| {
        let hits = present
            .iter()
            .take(k)
            .filter(|(_, p)| *p == Polarity::Positive)
            .count();
        hits as f64 / k as f64
    });
    let precision_at_k_negative = (neg_present > 0).then(|| {
        let hits = present
            .iter()
            .rev()
            .take(k)
            .filter(|(_, p)| *p == Polarity::Negative)
            .count();
        hits as f64 / k as f64
    });

    let kendall_tau = match reference {
        None => None,
        Some(reference) => Some(kendall_tau_a(lex, reference)?),
    };

    Ok(EvalReport {
        max_score,
        min_score,
        span: max_score - min_score,
        holdout_margin,
        precision_at_k_positive,
        precision_at_k_negative,
        k,
        kendall_tau,
        labeled_present: present.len(),
    })
}

/// Kendall's tau-a over the words shared by both rankings: concordant minus
/// discordant pairs over all `m (m - 1) / 2` pairs, ties contributing 0.
fn kendall_tau_a(
    lex: &SentimentLexicon,
    reference: &SentimentLexicon,
) -> Result<f64, LexiconError> {
    let shared: Vec<(usize, usize)> = lex
        .entries()
        .iter()
        .filter_map(|e| reference.rank_of(&e.word).map(|r| (e.rank, r)))
        .collect();
    let m = shared.len();
    if m < 2 {
        return Err(LexiconError::NoSharedWords);
    }
    let mut net = 0i64;
    for i in 0..m {
        for j in (i + 1)..m {
            let a = (shared[i].0 as i64 - shared[j].0 as i64).signum();
            let b = (shared[i].1 as i64 - shared[j].1 as i64).signum();
            net += a * b;
        }
    }
    Ok(net as f64 / (m * (m - 1) / 2) as f64)
}

/// Output of one seed-size experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSizeResult {
    pub seed_size: usize,
    pub lexicon: SentimentLexicon,
    pub report: EvalReport,
    pub trace: LossTrace,
}

/// Trains a fresh densifier per seed size (same seed and config throughout),
/// building a lexicon, report, and loss trace for each. Without labels the
/// reports carry span statistics only.
pub fn seed_size_experiment(
    table: &EmbeddingTable,
    full_seeds: &SeedLexicon,
    sizes: &[usize],
    cfg: &DensifierConfig,
    labels: Option<&LabeledWords>,
    k: usize,
) -> Result<Vec<SeedSizeResult>, LexiconError> {
    let mut results = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let seeds = full_seeds.truncated(size)?;
        let (transform, trace) = densifier::train_densifier(table, &seeds, cfg)?;
        let metadata = LexiconMetadata {
            seed_size: Some(size),
            alpha: Some(cfg.alpha),
            rng_seed: Some(cfg.rng_seed),
        };
        let lexicon = build_lexicon(&transform, table, metadata)?;
        let report = match labels {
            Some(labels) => evaluate(&lexicon, labels, k, None)?,
            None => EvalReport::from_scores_only(&lexicon)?,
        };
        results.push(SeedSizeResult {
            seed_size: size,
            lexicon,
            report,
            trace,
        });
    }
    Ok(results)
}

/// Comparative summary of the experiment: one TSV row per seed size.
pub fn experiment_summary_tsv(results: &[SeedSizeResult]) -> String {
    let mut out = String::from(
        "# seed_size\tspan\tmax_score\tmin_score\tholdout_margin\tfinal_loss\n",
    );
    for r in results {
        let margin = r
            .report
            .holdout_margin
            .map_or("NA".to_string(), |m| m.to_string());
        let final_loss = r
            .trace
            .last()
            .map_or("NA".to_string(), |rec| rec.loss.to_string());
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.seed_size, r.report.span, r.report.max_score, r.report.min_score, margin,
            final_loss,
        ));
    }
    out
}

/// The plot-data layouts: a jittered scatter of scores, scores in original
/// vocabulary order, and scores sorted by rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    ScatterJitter,
    ValueCurve,
    SortedCurve,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [
        PlotKind::ScatterJitter,
        PlotKind::ValueCurve,
        PlotKind::SortedCurve,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PlotKind::ScatterJitter => "scatter-jitter",
            PlotKind::ValueCurve => "value-curve",
            PlotKind::SortedCurve => "sorted-curve",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scatter-jitter" => Ok(PlotKind::ScatterJitter),
            "value-curve" => Ok(PlotKind::ValueCurve),
            "sorted-curve" => Ok(PlotKind::SortedCurve),
            other => Err(format!(
                "unknown plot kind `{other}`; expected scatter-jitter, value-curve, or sorted-curve"
            )),
        }
    }
}

/// Emits plot-ready TSV with a one-line `#` header naming the columns and
/// the generating config.
///
/// `scatter-jitter` rows are `(word, score, jitter)` where the score is the
/// x value (scores are one-dimensional) and the jitter y is a uniform integer
/// in `[-100, 100]` drawn from a dedicated stream of `rng_seed`, so files are
/// diff-stable. `value-curve` rows are `(vocab_index, score)` in original
/// vocabulary order; `sorted-curve` rows are `(rank, score)`.
pub fn emit_plot_data(
    lex: &SentimentLexicon,
    kind: PlotKind,
    rng_seed: u64,
) -> Result<String, LexiconError> {
    if lex.is_empty() {
        return Err(LexiconError::EmptyLexicon);
    }
    let meta = lex.metadata();
    let meta_echo = format!(
        "source={} seed_size={} alpha={} rng_seed={}",
        lex.source(),
        meta.seed_size.map_or("NA".into(), |v| v.to_string()),
        meta.alpha.map_or("NA".into(), |v| v.to_string()),
        meta.rng_seed.map_or("NA".into(), |v| v.to_string()),
    );
    let mut out = String::new();
    match kind {
        PlotKind::ScatterJitter => {
            out.push_str(&format!(
                "# kind=scatter-jitter columns=word,score,jitter x=score \
                 jitter=uniform[-{JITTER_BOUND},{JITTER_BOUND}] {meta_echo}\n"
            ));
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            for e in lex.entries() {
                let jitter: i64 = rng.random_range(-JITTER_BOUND..=JITTER_BOUND);
                out.push_str(&format!("{}\t{}\t{}\n", e.word, e.score, jitter));
            }
        }
        PlotKind::ValueCurve => {
            out.push_str(&format!(
                "# kind=value-curve columns=vocab_index,score {meta_echo}\n"
            ));
            let mut by_vocab: Vec<&LexiconEntry> = lex.entries().iter().collect();
            by_vocab.sort_by_key(|e| e.vocab_index);
            for e in by_vocab {
                out.push_str(&format!("{}\t{}\n", e.vocab_index, e.score));
            }
        }
        PlotKind::SortedCurve => {
            out.push_str(&format!(
                "# kind=sorted-curve columns=rank,score {meta_echo}\n"
            ));
            for e in lex.entries() {
                out.push_str(&format!("{}\t{}\n", e.rank, e.score));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{anisotropic_fixture, planted_axis_fixture, AnisotropicConfig, PlantedConfig};

    fn lex_of(scores: &[(&str, f64)]) -> SentimentLexicon {
        SentimentLexicon::from_scores(
            scores
                .iter()
                .enumerate()
                .map(|(i, (w, s))| (w.to_string(), *s, i))
                .collect(),
            LexiconSource::Densifier,
            LexiconMetadata::default(),
        )
        .unwrap()
    }

    fn labels_of(pairs: &[(&str, Polarity)]) -> LabeledWords {
        LabeledWords::from_pairs(pairs.iter().map(|(w, p)| (w.to_string(), *p))).unwrap()
    }

    #[test]
    fn lexicon_sorts_descending_with_lexicographic_ties() {
        let lex = lex_of(&[("a", 1.0), ("b", -1.0), ("c", 0.0)]);
        let order: Vec<&str> = lex.entries().iter().map(|e| e.word.as_str()).collect();
        assert_eq!(order, ["a", "c", "b"]);
        assert_eq!(
            lex.entries().iter().map(|e| e.rank).collect::<Vec<_>>(),
            [1, 2, 3]
        );

        let tied = lex_of(&[("zeta", 1.0), ("alpha", 1.0)]);
        let order: Vec<&str> = tied.entries().iter().map(|e| e.word.as_str()).collect();
        assert_eq!(order, ["alpha", "zeta"]);
    }

    #[test]
    fn build_lexicon_covers_whole_vocabulary() {
        let fixture = planted_axis_fixture(&PlantedConfig {
            dim: 6,
            seeds_per_polarity: 3,
            holdout_per_polarity: 2,
            fillers: 10,
            ..PlantedConfig::default()
        });
        let (transform, _) = densifier::train_densifier(
            &fixture.table,
            &fixture.seeds,
            &DensifierConfig::default(),
        )
        .unwrap();
        let lex = build_lexicon(&transform, &fixture.table, LexiconMetadata::default()).unwrap();
        assert_eq!(lex.len(), fixture.table.len());
    }

    #[test]
    fn lexicon_tsv_round_trips_through_table() {
        let lex = lex_of(&[("a", 1.5), ("b", -0.25), ("c", 0.0)]);
        let table = EmbeddingTable::from_rows(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        lex.write_tsv(&mut buf).unwrap();
        let back = SentimentLexicon::read_tsv(
            std::io::Cursor::new(&buf),
            &table,
            LexiconSource::Densifier,
            LexiconMetadata::default(),
        )
        .unwrap();
        assert_eq!(back.score_of("a"), Some(1.5));
        assert_eq!(back.rank_of("b"), Some(3));
        assert_eq!(back.entries()[0].vocab_index, 0);
    }

    #[test]
    fn evaluate_computes_margin_from_hand_example() {
        let lex = lex_of(&[("p1", 3.0), ("p2", 2.0), ("n1", -1.0)]);
        let labels = labels_of(&[
            ("p1", Polarity::Positive),
            ("p2", Polarity::Positive),
            ("n1", Polarity::Negative),
        ]);
        let report = evaluate(&lex, &labels, 1, None).unwrap();
        assert_eq!(report.holdout_margin, Some(3.0));
        assert_eq!(report.max_score, 3.0);
        assert_eq!(report.min_score, -1.0);
        assert_eq!(report.span, 4.0);
        assert_eq!(report.precision_at_k_positive, Some(1.0));
        assert_eq!(report.precision_at_k_negative, Some(1.0));
        assert_eq!(report.labeled_present, 3);
    }

    #[test]
    fn kendall_tau_is_one_for_identical_and_minus_one_for_reversed() {
        let lex = lex_of(&[("a", 3.0), ("b", 2.0), ("c", 1.0), ("d", 0.0)]);
        let reversed = lex_of(&[("a", 0.0), ("b", 1.0), ("c", 2.0), ("d", 3.0)]);
        let labels = labels_of(&[("a", Polarity::Positive), ("d", Polarity::Negative)]);
        let same = evaluate(&lex, &labels, 1, Some(&lex)).unwrap();
        assert_eq!(same.kendall_tau, Some(1.0));
        let opposite = evaluate(&lex, &labels, 1, Some(&reversed)).unwrap();
        assert_eq!(opposite.kendall_tau, Some(-1.0));
    }

    #[test]
    fn evaluate_rejects_bad_inputs() {
        let lex = lex_of(&[("a", 1.0), ("b", -1.0)]);
        assert!(matches!(
            evaluate(&lex, &LabeledWords::default(), 1, None),
            Err(LexiconError::EmptyLabels)
        ));
        let absent = labels_of(&[("ghost", Polarity::Positive)]);
        assert!(matches!(
            evaluate(&lex, &absent, 1, None),
            Err(LexiconError::NoLabeledWordsPresent)
        ));
        let labels = labels_of(&[("a", Polarity::Positive), ("b", Polarity::Negative)]);
        assert!(matches!(
            evaluate(&lex, &labels, 2, None),
            Err(LexiconError::KTooLarge { k: 2, .. })
        ));
    }

    #[test]
    fn rank_metrics_are_invariant_under_positive_affine_rescaling() {
        let base = lex_of(&[("a", 2.0), ("b", 1.0), ("c", -0.5), ("d", -2.0)]);
        let rescaled = lex_of(&[("a", 7.0), ("b", 4.0), ("c", -0.5), ("d", -5.0)]); // 3x + 1
        let labels = labels_of(&[
            ("a", Polarity::Positive),
            ("b", Polarity::Positive),
            ("c", Polarity::Negative),
            ("d", Polarity::Negative),
        ]);
        let r1 = evaluate(&base, &labels, 2, Some(&base)).unwrap();
        let r2 = evaluate(&rescaled, &labels, 2, Some(&base)).unwrap();
        assert_eq!(r1.precision_at_k_positive, r2.precision_at_k_positive);
        assert_eq!(r1.precision_at_k_negative, r2.precision_at_k_negative);
        assert_eq!(r1.kendall_tau, r2.kendall_tau);
        assert!((r2.span - 3.0 * r1.span).abs() < 1e-12);
    }

    #[test]
    fn densifier_separates_where_pca_cannot() {
        // Planted sentiment spread is well below the distractor spread, so the
        // top-variance direction carries no sentiment.
        let fixture = anisotropic_fixture(&AnisotropicConfig::default());
        let cfg = DensifierConfig {
            epochs: 50,
            lr: 5e-2,
            batch_size: 16,
            ..DensifierConfig::default()
        };
        let (transform, _) =
            densifier::train_densifier(&fixture.table, &fixture.seeds, &cfg).unwrap();
        let dens_lex =
            build_lexicon(&transform, &fixture.table, LexiconMetadata::default()).unwrap();
        let pca_axis = pca::fit_pca1(&fixture.table).unwrap();
        let pca_lex =
            build_lexicon(&pca_axis, &fixture.table, LexiconMetadata::default()).unwrap();

        let dens = evaluate(&dens_lex, &fixture.labels, 2, None).unwrap();
        let pca_report = evaluate(&pca_lex, &fixture.labels, 2, None).unwrap();
        assert!(
            dens.holdout_margin.unwrap() > 0.0,
            "densifier margin {:?}",
            dens.holdout_margin
        );
        assert!(
            pca_report.holdout_margin.unwrap() <= 0.0,
            "pca margin {:?}",
            pca_report.holdout_margin
        );
    }

    #[test]
    fn experiment_produces_one_result_per_size_and_is_deterministic() {
        let fixture = planted_axis_fixture(&PlantedConfig {
            dim: 8,
            seeds_per_polarity: 15,
            holdout_per_polarity: 3,
            fillers: 30,
            ..PlantedConfig::default()
        });
        let cfg = DensifierConfig {
            epochs: 5,
            ..DensifierConfig::default()
        };
        let run = seed_size_experiment(
            &fixture.table,
            &fixture.seeds,
            &[5, 10, 15],
            &cfg,
            Some(&fixture.labels),
            2,
        )
        .unwrap();
        assert_eq!(run.len(), 3);
        assert_eq!(
            run.iter().map(|r| r.seed_size).collect::<Vec<_>>(),
            [5, 10, 15]
        );
        for r in &run {
            assert_eq!(r.lexicon.len(), fixture.table.len());
            assert_eq!(r.trace.len(), cfg.epochs);
            assert_eq!(r.lexicon.metadata().seed_size, Some(r.seed_size));
        }
        let again = seed_size_experiment(
            &fixture.table,
            &fixture.seeds,
            &[5, 10, 15],
            &cfg,
            Some(&fixture.labels),
            2,
        )
        .unwrap();
        assert_eq!(run, again);

        let summary = experiment_summary_tsv(&run);
        assert_eq!(summary.lines().count(), 4); // header + 3 rows
    }

    #[test]
    fn experiment_margin_is_positive_on_separable_data() {
        let fixture = planted_axis_fixture(&PlantedConfig {
            dim: 8,
            seeds_per_polarity: 5,
            holdout_per_polarity: 3,
            fillers: 30,
            ..PlantedConfig::default()
        });
        let cfg = DensifierConfig {
            epochs: 15,
            lr: 1e-2,
            ..DensifierConfig::default()
        };
        let run = seed_size_experiment(
            &fixture.table,
            &fixture.seeds,
            &[5],
            &cfg,
            Some(&fixture.labels),
            2,
        )
        .unwrap();
        assert!(run[0].report.holdout_margin.unwrap() > 0.0);
    }

    #[test]
    fn empty_sizes_list_runs_no_training() {
        let fixture = planted_axis_fixture(&PlantedConfig {
            dim: 6,
            seeds_per_polarity: 3,
            holdout_per_polarity: 2,
            fillers: 5,
            ..PlantedConfig::default()
        });
        let run = seed_size_experiment(
            &fixture.table,
            &fixture.seeds,
            &[],
            &DensifierConfig::default(),
            None,
            1,
        )
        .unwrap();
        assert!(run.is_empty());
    }

    #[test]
    fn jitter_stays_in_bounds_and_is_seed_deterministic() {
        let scores: Vec<(String, f64, usize)> = (0..300)
            .map(|i| (format!("w{i:03}"), (i as f64) - 150.0, i))
            .collect();
        let lex = SentimentLexicon::from_scores(
            scores,
            LexiconSource::Densifier,
            LexiconMetadata::default(),
        )
        .unwrap();
        let a = emit_plot_data(&lex, PlotKind::ScatterJitter, 9).unwrap();
        let b = emit_plot_data(&lex, PlotKind::ScatterJitter, 9).unwrap();
        assert_eq!(a, b);
        let c = emit_plot_data(&lex, PlotKind::ScatterJitter, 10).unwrap();
        assert_ne!(a, c);
        for line in a.lines().skip(1) {
            let jitter: i64 = line.split('\t').nth(2).unwrap().parse().unwrap();
            assert!((-JITTER_BOUND..=JITTER_BOUND).contains(&jitter));
        }
    }

    #[test]
    fn sorted_curve_is_non_increasing_and_value_curve_covers_vocab() {
        let lex = lex_of(&[("a", 0.3), ("b", -0.7), ("c", 1.9), ("d", 0.0)]);
        let sorted = emit_plot_data(&lex, PlotKind::SortedCurve, 0).unwrap();
        let scores: Vec<f64> = sorted
            .lines()
            .skip(1)
            .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(scores.windows(2).all(|w| w[0] >= w[1]));

        let value = emit_plot_data(&lex, PlotKind::ValueCurve, 0).unwrap();
        assert_eq!(value.lines().count() - 1, lex.len());
        let indices: Vec<usize> = value
            .lines()
            .skip(1)
            .map(|l| l.split('\t').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(indices, [0, 1, 2, 3]);
    }
}
