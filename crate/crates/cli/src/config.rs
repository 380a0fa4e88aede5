//! Pipeline configuration: defaults, a flat `key = value` config file, and
//! CLI-flag overrides (flags win over the file, the file over defaults).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use ultradense::corpus::{CsvSchema, TokenizeMode};
use ultradense::densifier::DensifierConfig;
use ultradense::embedding::{SgnsConfig, SUBSAMPLE_THRESHOLD};
use ultradense::lexicon::PlotKind;

/// Which scoring backend the lexicon/eval/plot commands use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Densifier,
    Pca,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Densifier => "densifier",
            Method::Pca => "pca",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "densifier" => Ok(Method::Densifier),
            "pca" => Ok(Method::Pca),
            other => Err(format!("unknown method `{other}`; expected densifier or pca")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub csv: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub pos_seeds: Option<PathBuf>,
    pub neg_seeds: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub columns: CsvSchema,
    pub tokenize_mode: TokenizeMode,
    pub embed: SgnsConfig,
    pub densifier: DensifierConfig,
    pub holdout_fraction: f64,
    /// Top-level seed; each stage derives its own stream from it.
    pub rng_seed: u64,
    pub sizes: Vec<usize>,
    pub plot_kinds: Vec<PlotKind>,
    pub k: Option<usize>,
    pub method: Method,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            csv: None,
            seeds: None,
            pos_seeds: None,
            neg_seeds: None,
            labels: None,
            reference: None,
            out_dir: PathBuf::from("out"),
            columns: CsvSchema::default(),
            tokenize_mode: TokenizeMode::Pretokenized,
            embed: SgnsConfig::default(),
            densifier: DensifierConfig::default(),
            holdout_fraction: 0.0,
            rng_seed: 42,
            sizes: vec![5, 10, 15],
            plot_kinds: PlotKind::ALL.to_vec(),
            k: None,
            method: Method::Densifier,
        }
    }
}

impl PipelineConfig {
    /// Applies a config file's `key = value` lines. `#` lines and blank
    /// lines are skipped; unknown keys are an error.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected `key = value`", path.display(), idx + 1))?;
            self.apply_kv(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
        }
        Ok(())
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| anyhow::anyhow!("bad value `{value}` for `{key}`: {e}"))
        }
        match key {
            "csv" => self.csv = Some(PathBuf::from(value)),
            "seeds" => self.seeds = Some(PathBuf::from(value)),
            "pos_seeds" => self.pos_seeds = Some(PathBuf::from(value)),
            "neg_seeds" => self.neg_seeds = Some(PathBuf::from(value)),
            "labels" => self.labels = Some(PathBuf::from(value)),
            "reference" => self.reference = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "col.nickname" => self.columns.nickname = value.to_string(),
            "col.age" => self.columns.age = value.to_string(),
            "col.gender" => self.columns.gender = value.to_string(),
            "col.likes" => self.columns.likes = value.to_string(),
            "col.text" => self.columns.text = value.to_string(),
            "tokenize_mode" => self.tokenize_mode = parse(key, value)?,
            "embed.dim" => self.embed.dim = parse(key, value)?,
            "embed.window" => self.embed.window = parse(key, value)?,
            "embed.negatives" => self.embed.negatives = parse(key, value)?,
            "embed.min_count" => self.embed.min_count = parse(key, value)?,
            "embed.epochs" => self.embed.epochs = parse(key, value)?,
            "embed.initial_lr" => self.embed.initial_lr = parse(key, value)?,
            "embed.subsample" => {
                let enabled: bool = parse(key, value)?;
                self.embed.subsample = enabled.then_some(SUBSAMPLE_THRESHOLD);
            }
            "dens.alpha" => self.densifier.alpha = parse(key, value)?,
            "dens.epochs" => self.densifier.epochs = parse(key, value)?,
            "dens.batch_size" => self.densifier.batch_size = parse(key, value)?,
            "dens.lr" => self.densifier.lr = parse(key, value)?,
            "dens.reorth_every" => self.densifier.reorthogonalize_every = parse(key, value)?,
            "holdout_fraction" => self.holdout_fraction = parse(key, value)?,
            "rng_seed" => self.rng_seed = parse(key, value)?,
            "sizes" => self.sizes = parse_list(key, value)?,
            "plot.kinds" => self.plot_kinds = parse_list(key, value)?,
            "eval.k" => self.k = Some(parse(key, value)?),
            "method" => self.method = parse(key, value)?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }
}

pub fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| anyhow::anyhow!("bad value `{s}` for `{key}`: {e}"))
        })
        .collect()
}

/// Derives a per-stage seed from the top-level seed and a fixed label
/// (FNV-1a over the seed bytes then the label), so one knob reproduces
/// every stage while the streams stay distinct.
pub fn stage_seed(base: u64, label: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = FNV_OFFSET;
    for byte in base.to_le_bytes().into_iter().chain(label.bytes()) {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_overrides_compose() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment\nembed.dim = 24\nrng_seed = 9\nsizes = 3, 5\nmethod = pca\ncol.text = body\n",
        )
        .unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.embed.dim, 24);
        assert_eq!(cfg.rng_seed, 9);
        assert_eq!(cfg.sizes, vec![3, 5]);
        assert_eq!(cfg.method, Method::Pca);
        assert_eq!(cfg.columns.text, "body");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "embedd.dim = 24\n").unwrap();
        let mut cfg = PipelineConfig::default();
        assert!(cfg.apply_file(&path).is_err());
    }

    #[test]
    fn stage_seeds_differ_by_label_and_base() {
        assert_ne!(stage_seed(42, "embed"), stage_seed(42, "densify"));
        assert_ne!(stage_seed(42, "embed"), stage_seed(43, "embed"));
        assert_eq!(stage_seed(42, "embed"), stage_seed(42, "embed"));
    }
}
