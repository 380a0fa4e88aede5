//! Subcommand implementations. Every command reads its inputs from explicit
//! paths or from artifacts a previous stage wrote into the output directory,
//! and writes its own artifacts back there; outputs are byte-identical across
//! reruns with the same inputs and seed.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ultradense::corpus::{self, TokenizedCorpus};
use ultradense::densifier::{self, OrthogonalTransform, SeedLexicon};
use ultradense::embedding::{self, EmbeddingTable};
use ultradense::lexicon::{
    self, EvalReport, LabeledWords, LexiconMetadata, LexiconSource, Polarity, SentimentLexicon,
};
use ultradense::pca::{self, PcaAxis};

use crate::config::{stage_seed, Method, PipelineConfig};

pub const CORPUS_FILE: &str = "corpus.txt";
pub const FREQUENCY_FILE: &str = "frequency.tsv";
pub const VECTORS_FILE: &str = "vectors.vec";
pub const TRANSFORM_FILE: &str = "transform.txt";
pub const LOSS_TRACE_FILE: &str = "loss_trace.tsv";
pub const PCA_FILE: &str = "pca_axis.txt";
pub const EXPERIMENT_DIR: &str = "experiment";
pub const SUMMARY_FILE: &str = "summary.tsv";

pub fn lexicon_file(method: Method) -> &'static str {
    match method {
        Method::Densifier => "lexicon.tsv",
        Method::Pca => "lexicon_pca.tsv",
    }
}

pub fn eval_file(method: Method) -> &'static str {
    match method {
        Method::Densifier => "eval_report.txt",
        Method::Pca => "eval_report_pca.txt",
    }
}

pub fn plot_file(kind: lexicon::PlotKind, method: Method) -> String {
    let stem = kind.as_str().replace('-', "_");
    match method {
        Method::Densifier => format!("{stem}.tsv"),
        Method::Pca => format!("{stem}_pca.tsv"),
    }
}

fn open_reader(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

/// Resolves an artifact in the output directory, pointing at the producing
/// subcommand when it is missing.
fn require_artifact(cfg: &PipelineConfig, name: &str, producer: &str) -> Result<PathBuf> {
    let path = cfg.out_dir.join(name);
    if !path.exists() {
        bail!(
            "missing artifact {}; run `ultradense {producer}` first",
            path.display()
        );
    }
    Ok(path)
}

fn write_artifact(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn ensure_out_dir(cfg: &PipelineConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.out_dir.display()))
}

fn load_table(cfg: &PipelineConfig) -> Result<EmbeddingTable> {
    let path = require_artifact(cfg, VECTORS_FILE, "embed")?;
    embedding::load_word2vec_text(open_reader(&path)?)
        .with_context(|| format!("cannot parse {}", path.display()))
}

fn load_seeds(cfg: &PipelineConfig) -> Result<SeedLexicon> {
    if let Some(path) = &cfg.seeds {
        return SeedLexicon::read_tsv(open_reader(path)?, cfg.holdout_fraction)
            .with_context(|| format!("cannot parse seed file {}", path.display()));
    }
    match (&cfg.pos_seeds, &cfg.neg_seeds) {
        (Some(pos), Some(neg)) => {
            SeedLexicon::from_word_files(open_reader(pos)?, open_reader(neg)?, cfg.holdout_fraction)
                .context("cannot parse seed word files")
        }
        _ => bail!("provide --seeds (word<TAB>pos|neg) or both --pos-seeds and --neg-seeds"),
    }
}

fn load_labels(cfg: &PipelineConfig) -> Result<LabeledWords> {
    let path = cfg
        .labels
        .as_ref()
        .context("this command needs --labels (word<TAB>pos|neg)")?;
    LabeledWords::read_tsv(open_reader(path)?)
        .with_context(|| format!("cannot parse labels file {}", path.display()))
}

fn load_transform(cfg: &PipelineConfig) -> Result<OrthogonalTransform> {
    let path = require_artifact(cfg, TRANSFORM_FILE, "densify")?;
    OrthogonalTransform::load(open_reader(&path)?)
        .with_context(|| format!("cannot parse {}", path.display()))
}

fn load_pca(cfg: &PipelineConfig) -> Result<PcaAxis> {
    let path = require_artifact(cfg, PCA_FILE, "pca")?;
    PcaAxis::load(open_reader(&path)?).with_context(|| format!("cannot parse {}", path.display()))
}

fn load_lexicon(cfg: &PipelineConfig, table: &EmbeddingTable) -> Result<SentimentLexicon> {
    let name = lexicon_file(cfg.method);
    let path = require_artifact(cfg, name, "lexicon")?;
    let source = match cfg.method {
        Method::Densifier => LexiconSource::Densifier,
        Method::Pca => LexiconSource::Pca,
    };
    SentimentLexicon::read_tsv(open_reader(&path)?, table, source, cfg.metadata_echo())
        .with_context(|| format!("cannot parse {}", path.display()))
}

impl PipelineConfig {
    fn metadata_echo(&self) -> LexiconMetadata {
        LexiconMetadata {
            seed_size: None,
            alpha: matches!(self.method, Method::Densifier).then_some(self.densifier.alpha),
            rng_seed: Some(self.rng_seed),
        }
    }
}

/// Reads the comment CSV, writes the tokenized corpus (one document per
/// line) and the frequency TSV. A header-only CSV produces empty artifacts.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<()> {
    let csv_path = cfg.csv.as_ref().context("ingest needs --csv")?;
    let records = corpus::parse_comments(
        open_reader(csv_path)?,
        &cfg.columns,
    )
    .with_context(|| format!("cannot parse {}", csv_path.display()))?;
    let corpus =
        TokenizedCorpus::from_texts(records.iter().map(|r| r.text.as_str()), cfg.tokenize_mode);

    ensure_out_dir(cfg)?;
    let mut corpus_bytes = Vec::new();
    corpus.write_lines(&mut corpus_bytes)?;
    write_artifact(&cfg.out_dir.join(CORPUS_FILE), &corpus_bytes)?;

    let mut freq_bytes = Vec::new();
    if !corpus.is_empty() {
        let table = corpus::build_frequency_table(&corpus)?;
        table.write_tsv(&mut freq_bytes)?;

        // Co-occurrence digest over the most frequent words.
        let hi_freq = table
            .top_n(corpus::DEFAULT_HIGH_FREQUENCY_WORDS)
            .into_iter()
            .collect();
        if let Ok(rate) = corpus::cooccurrence_pair_rate(&corpus, &hi_freq) {
            println!(
                "ingest: {:.1}% of comments with a top-{} word contain two or more",
                rate * 100.0,
                hi_freq.len().min(corpus::DEFAULT_HIGH_FREQUENCY_WORDS)
            );
        }
    }
    write_artifact(&cfg.out_dir.join(FREQUENCY_FILE), &freq_bytes)?;

    println!(
        "ingest: {} comments -> {} documents, {} tokens",
        records.len(),
        corpus.len(),
        corpus.token_count()
    );
    Ok(())
}

/// Trains skip-gram embeddings on the tokenized corpus and writes the
/// word2vec text file.
pub fn cmd_embed(cfg: &PipelineConfig) -> Result<()> {
    let path = require_artifact(cfg, CORPUS_FILE, "ingest")?;
    let corpus = TokenizedCorpus::read_lines(open_reader(&path)?)?;
    let mut sgns = cfg.embed.clone();
    sgns.rng_seed = stage_seed(cfg.rng_seed, "embed");
    let table = embedding::train_sgns(&corpus, &sgns).context("embedding training failed")?;

    ensure_out_dir(cfg)?;
    let mut bytes = Vec::new();
    embedding::save_word2vec_text(&table, &mut bytes)?;
    write_artifact(&cfg.out_dir.join(VECTORS_FILE), &bytes)?;
    println!("embed: {} words x {} dims", table.len(), table.dim());
    Ok(())
}

/// Trains the orthogonal transform from the seed words and writes the
/// transform plus its per-epoch loss trace.
pub fn cmd_densify(cfg: &PipelineConfig) -> Result<()> {
    let table = load_table(cfg)?;
    let seeds = load_seeds(cfg)?;
    let mut dens = cfg.densifier.clone();
    dens.rng_seed = stage_seed(cfg.rng_seed, "densify");
    let (transform, trace) =
        densifier::train_densifier(&table, &seeds, &dens).context("densifier training failed")?;

    ensure_out_dir(cfg)?;
    let mut bytes = Vec::new();
    transform.save(&mut bytes)?;
    write_artifact(&cfg.out_dir.join(TRANSFORM_FILE), &bytes)?;
    let mut trace_bytes = Vec::new();
    trace.write_tsv(&mut trace_bytes)?;
    write_artifact(&cfg.out_dir.join(LOSS_TRACE_FILE), &trace_bytes)?;

    let last = trace.last().expect("at least one epoch");
    println!(
        "densify: dim {} | epoch {} loss {:.6} (sloss {:.6}, dloss {:.6})",
        transform.dim(),
        last.epoch,
        last.loss,
        last.sloss,
        last.dloss
    );
    Ok(())
}

/// Fits the first principal component and writes the axis container.
pub fn cmd_pca(cfg: &PipelineConfig) -> Result<()> {
    let table = load_table(cfg)?;
    let axis = pca::fit_pca1(&table).context("PCA fit failed")?;
    ensure_out_dir(cfg)?;
    let mut bytes = Vec::new();
    axis.save(&mut bytes)?;
    write_artifact(&cfg.out_dir.join(PCA_FILE), &bytes)?;
    println!(
        "pca: dim {} explained_variance {:.6}",
        axis.dim(),
        axis.explained_variance()
    );
    Ok(())
}

/// Scores the whole vocabulary with the selected backend and writes the
/// ranked lexicon.
pub fn cmd_lexicon(cfg: &PipelineConfig) -> Result<()> {
    let table = load_table(cfg)?;
    let lexicon = match cfg.method {
        Method::Densifier => {
            let transform = load_transform(cfg)?;
            lexicon::build_lexicon(&transform, &table, cfg.metadata_echo())?
        }
        Method::Pca => {
            let axis = load_pca(cfg)?;
            lexicon::build_lexicon(&axis, &table, cfg.metadata_echo())?
        }
    };
    ensure_out_dir(cfg)?;
    let mut bytes = Vec::new();
    lexicon.write_tsv(&mut bytes)?;
    write_artifact(&cfg.out_dir.join(lexicon_file(cfg.method)), &bytes)?;
    println!(
        "lexicon: {} words via {}",
        lexicon.len(),
        cfg.method.as_str()
    );
    Ok(())
}

/// Default k for precision@k: the smaller per-polarity count of labeled
/// words present, capped at 10.
fn default_k(lexicon: &SentimentLexicon, labels: &LabeledWords) -> usize {
    let present = |polarity: Polarity| {
        labels
            .entries()
            .iter()
            .filter(|(w, p)| *p == polarity && lexicon.score_of(w).is_some())
            .count()
    };
    [present(Polarity::Positive), present(Polarity::Negative)]
        .into_iter()
        .filter(|&c| c > 0)
        .min()
        .unwrap_or(1)
        .clamp(1, 10)
}

/// Evaluates the lexicon against the labeled words and writes the report.
pub fn cmd_eval(cfg: &PipelineConfig) -> Result<()> {
    let table = load_table(cfg)?;
    let lexicon = load_lexicon(cfg, &table)?;
    let labels = load_labels(cfg)?;
    let reference = match &cfg.reference {
        None => None,
        Some(path) => Some(
            SentimentLexicon::read_tsv(
                open_reader(path)?,
                &table,
                lexicon.source(),
                LexiconMetadata::default(),
            )
            .with_context(|| format!("cannot parse reference lexicon {}", path.display()))?,
        ),
    };
    let k = cfg.k.unwrap_or_else(|| default_k(&lexicon, &labels));
    let report = lexicon::evaluate(&lexicon, &labels, k, reference.as_ref())?;

    ensure_out_dir(cfg)?;
    let mut bytes = Vec::new();
    report.write_key_values(&mut bytes)?;
    write_artifact(&cfg.out_dir.join(eval_file(cfg.method)), &bytes)?;
    println!(
        "eval: span {:.6} margin {} (k={k})",
        report.span,
        report
            .holdout_margin
            .map_or("NA".to_string(), |m| format!("{m:.6}"))
    );
    Ok(())
}

/// Emits the requested plot-data TSVs for the selected lexicon.
pub fn cmd_plot(cfg: &PipelineConfig) -> Result<()> {
    let table = load_table(cfg)?;
    let lexicon = load_lexicon(cfg, &table)?;
    let jitter_seed = stage_seed(cfg.rng_seed, "jitter");
    ensure_out_dir(cfg)?;
    for kind in &cfg.plot_kinds {
        let data = lexicon::emit_plot_data(&lexicon, *kind, jitter_seed)?;
        write_artifact(&cfg.out_dir.join(plot_file(*kind, cfg.method)), data.as_bytes())?;
    }
    println!("plot: {} file(s)", cfg.plot_kinds.len());
    Ok(())
}

/// Runs the seed-size experiment: one densifier per size, writing per-size
/// lexicon/report/trace plus a comparative summary table.
pub fn cmd_experiment(cfg: &PipelineConfig) -> Result<()> {
    let table = load_table(cfg)?;
    let seeds = load_seeds(cfg)?;
    let labels = match &cfg.labels {
        None => None,
        Some(_) => Some(load_labels(cfg)?),
    };
    let mut dens = cfg.densifier.clone();
    dens.rng_seed = stage_seed(cfg.rng_seed, "densify");
    let k = match (&labels, cfg.k) {
        (None, _) => 0,
        (Some(_), Some(k)) => k,
        (Some(labels), None) => {
            let present = |polarity: Polarity| {
                labels
                    .entries()
                    .iter()
                    .filter(|(w, p)| *p == polarity && table.vector(w).is_some())
                    .count()
            };
            [present(Polarity::Positive), present(Polarity::Negative)]
                .into_iter()
                .filter(|&c| c > 0)
                .min()
                .unwrap_or(1)
                .clamp(1, 10)
        }
    };

    let results =
        lexicon::seed_size_experiment(&table, &seeds, &cfg.sizes, &dens, labels.as_ref(), k)?;

    ensure_out_dir(cfg)?;
    let experiment_dir = cfg.out_dir.join(EXPERIMENT_DIR);
    for result in &results {
        let size_dir = experiment_dir.join(format!("size_{:02}", result.seed_size));
        std::fs::create_dir_all(&size_dir)
            .with_context(|| format!("cannot create {}", size_dir.display()))?;

        let mut lex_bytes = Vec::new();
        result.lexicon.write_tsv(&mut lex_bytes)?;
        write_artifact(&size_dir.join(lexicon_file(Method::Densifier)), &lex_bytes)?;

        let mut trace_bytes = Vec::new();
        result.trace.write_tsv(&mut trace_bytes)?;
        write_artifact(&size_dir.join(LOSS_TRACE_FILE), &trace_bytes)?;

        write_report(&size_dir.join(eval_file(Method::Densifier)), &result.report)?;
    }
    let summary = lexicon::experiment_summary_tsv(&results);
    write_artifact(&experiment_dir.join(SUMMARY_FILE), summary.as_bytes())?;
    print!("{summary}");
    Ok(())
}

fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = BufWriter::new(file);
    report.write_key_values(&mut w)?;
    w.flush()?;
    Ok(())
}
