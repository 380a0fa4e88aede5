//! `ultradense` - induce a one-dimensional sentiment lexicon from word
//! embeddings, with a PCA baseline and a seed-size experiment harness.
//!
//! The pipeline runs as subcommands over a shared output directory:
//! `ingest -> embed -> densify / pca -> lexicon -> eval / plot`, plus
//! `experiment` for the seed-size study. Options come from defaults, then a
//! flat `key = value` config file (`--config`), then command-line flags.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{parse_list, Method, PipelineConfig};
use ultradense::corpus::TokenizeMode;
use ultradense::embedding::SUBSAMPLE_THRESHOLD;

#[derive(Parser)]
#[command(
    name = "ultradense",
    version,
    about = "Sentiment lexicon induction via an ultradense embedding subspace"
)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    /// Flat key = value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Comment CSV with a header row.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,

    /// Seed words as `word<TAB>pos|neg`.
    #[arg(long, global = true)]
    seeds: Option<PathBuf>,

    /// Positive seed words, one per line (pair with --neg-seeds).
    #[arg(long, global = true)]
    pos_seeds: Option<PathBuf>,

    /// Negative seed words, one per line (pair with --pos-seeds).
    #[arg(long, global = true)]
    neg_seeds: Option<PathBuf>,

    /// Held-out labeled words as `word<TAB>pos|neg` for evaluation.
    #[arg(long, global = true)]
    labels: Option<PathBuf>,

    /// Reference lexicon TSV for Kendall-tau comparison.
    #[arg(long, global = true)]
    reference: Option<PathBuf>,

    /// Directory all artifacts are written to.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_name = "COLUMN")]
    col_nickname: Option<String>,
    #[arg(long, global = true, value_name = "COLUMN")]
    col_age: Option<String>,
    #[arg(long, global = true, value_name = "COLUMN")]
    col_gender: Option<String>,
    #[arg(long, global = true, value_name = "COLUMN")]
    col_likes: Option<String>,
    /// Name of the comment-text column.
    #[arg(long, global = true, value_name = "COLUMN")]
    col_text: Option<String>,

    /// `pretokenized` (whitespace) or `cjk-chars` (per-character Han runs).
    #[arg(long, global = true)]
    tokenize_mode: Option<TokenizeMode>,

    /// Embedding size.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Skip-gram window radius.
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Negative samples per context pair.
    #[arg(long, global = true)]
    negatives: Option<usize>,
    /// Drop words rarer than this from the vocabulary.
    #[arg(long, global = true)]
    min_count: Option<u64>,
    #[arg(long, global = true)]
    embed_epochs: Option<usize>,
    #[arg(long, global = true)]
    embed_lr: Option<f64>,
    /// Enable frequent-word subsampling (t = 1e-4).
    #[arg(long, global = true)]
    subsample: bool,

    /// Weight of the separation loss, in [0, 1].
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    dens_epochs: Option<usize>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    #[arg(long, global = true)]
    dens_lr: Option<f64>,
    /// Re-orthogonalize every this many batches.
    #[arg(long, global = true)]
    reorth_every: Option<usize>,
    /// Tail fraction of each seed list held out from training.
    #[arg(long, global = true)]
    holdout_fraction: Option<f64>,

    /// Top-level seed; every stage derives its own stream from it.
    #[arg(long, global = true)]
    rng_seed: Option<u64>,

    /// Comma-separated seed-group sizes for the experiment.
    #[arg(long, global = true)]
    sizes: Option<String>,
    /// Comma-separated plot kinds: scatter-jitter,value-curve,sorted-curve.
    #[arg(long, global = true)]
    plot_kinds: Option<String>,
    /// Cutoff for precision@k.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Scoring backend for lexicon/eval/plot: densifier or pca.
    #[arg(long, global = true)]
    method: Option<Method>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the comment CSV into a tokenized corpus and frequency table.
    Ingest,
    /// Train skip-gram embeddings and write the word2vec text file.
    Embed,
    /// Train the orthogonal sentiment transform from seed words.
    Densify,
    /// Fit the first-principal-component baseline.
    Pca,
    /// Score the vocabulary into a ranked sentiment lexicon.
    Lexicon,
    /// Evaluate a lexicon against held-out labeled words.
    Eval,
    /// Emit plot-ready TSV data for the lexicon.
    Plot,
    /// Run the seed-size experiment (one densifier per size).
    Experiment,
}

impl Flags {
    fn into_config(self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }

        macro_rules! set {
            ($($flag:expr => $target:expr;)*) => {
                $(if let Some(value) = $flag { $target = value; })*
            };
        }
        set! {
            self.csv.map(Some) => cfg.csv;
            self.seeds.map(Some) => cfg.seeds;
            self.pos_seeds.map(Some) => cfg.pos_seeds;
            self.neg_seeds.map(Some) => cfg.neg_seeds;
            self.labels.map(Some) => cfg.labels;
            self.reference.map(Some) => cfg.reference;
            self.out_dir => cfg.out_dir;
            self.col_nickname => cfg.columns.nickname;
            self.col_age => cfg.columns.age;
            self.col_gender => cfg.columns.gender;
            self.col_likes => cfg.columns.likes;
            self.col_text => cfg.columns.text;
            self.tokenize_mode => cfg.tokenize_mode;
            self.dim => cfg.embed.dim;
            self.window => cfg.embed.window;
            self.negatives => cfg.embed.negatives;
            self.min_count => cfg.embed.min_count;
            self.embed_epochs => cfg.embed.epochs;
            self.embed_lr => cfg.embed.initial_lr;
            self.alpha => cfg.densifier.alpha;
            self.dens_epochs => cfg.densifier.epochs;
            self.batch_size => cfg.densifier.batch_size;
            self.dens_lr => cfg.densifier.lr;
            self.reorth_every => cfg.densifier.reorthogonalize_every;
            self.holdout_fraction => cfg.holdout_fraction;
            self.rng_seed => cfg.rng_seed;
            self.k.map(Some) => cfg.k;
            self.method => cfg.method;
        }
        if self.subsample {
            cfg.embed.subsample = Some(SUBSAMPLE_THRESHOLD);
        }
        if let Some(sizes) = &self.sizes {
            cfg.sizes = parse_list("sizes", sizes)?;
        }
        if let Some(kinds) = &self.plot_kinds {
            cfg.plot_kinds = parse_list("plot-kinds", kinds)?;
        }
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = cli.flags.into_config()?;
    match cli.command {
        Command::Ingest => commands::cmd_ingest(&cfg),
        Command::Embed => commands::cmd_embed(&cfg),
        Command::Densify => commands::cmd_densify(&cfg),
        Command::Pca => commands::cmd_pca(&cfg),
        Command::Lexicon => commands::cmd_lexicon(&cfg),
        Command::Eval => commands::cmd_eval(&cfg),
        Command::Plot => commands::cmd_plot(&cfg),
        Command::Experiment => commands::cmd_experiment(&cfg),
    }
}
