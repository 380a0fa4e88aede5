//! Deterministic synthetic embedding fixtures with a planted sentiment
//! direction, used by the experiment harness demos and the test suites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::densifier::SeedLexicon;
use crate::embedding::EmbeddingTable;
use crate::lexicon::{LabeledWords, Polarity};

/// A generated table plus the seed words used for training and the held-out
/// labeled words used for evaluation.
#[derive(Debug, Clone)]
pub struct SyntheticFixture {
    pub table: EmbeddingTable,
    pub seeds: SeedLexicon,
    pub labels: LabeledWords,
}

/// Configuration for [`planted_axis_fixture`]: seeds and held-out labeled
/// words sit at `+/- signal` on axis 0 with Gaussian noise everywhere;
/// fillers are pure noise.
#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub dim: usize,
    pub seeds_per_polarity: usize,
    pub holdout_per_polarity: usize,
    pub fillers: usize,
    pub signal: f64,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            dim: 50,
            seeds_per_polarity: 10,
            holdout_per_polarity: 5,
            fillers: 200,
            signal: 5.0,
            noise_sigma: 0.1,
            rng_seed: 17,
        }
    }
}

/// Configuration for [`anisotropic_fixture`]: sentiment lives on axis 0 at
/// `+/- sentiment_scale`, while axis 1 carries a label-independent distractor
/// whose sample variance is exactly `distractor_variance_ratio` times the
/// sample variance of axis 0, so the top principal component is the
/// distractor and not the sentiment direction.
#[derive(Debug, Clone)]
pub struct AnisotropicConfig {
    pub dim: usize,
    pub seeds_per_polarity: usize,
    pub holdout_per_polarity: usize,
    pub fillers: usize,
    pub sentiment_scale: f64,
    pub distractor_variance_ratio: f64,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for AnisotropicConfig {
    fn default() -> Self {
        Self {
            dim: 20,
            seeds_per_polarity: 10,
            holdout_per_polarity: 5,
            fillers: 200,
            sentiment_scale: 1.0,
            distractor_variance_ratio: 10.0,
            noise_sigma: 0.05,
            rng_seed: 23,
        }
    }
}

struct WordPlan {
    names: Vec<String>,
    signs: Vec<f64>, // +1 positive, -1 negative, 0 filler
    seeds: SeedLexicon,
    labels: LabeledWords,
}

fn plan_words(seeds_per_polarity: usize, holdout_per_polarity: usize, fillers: usize) -> WordPlan {
    let pos: Vec<String> = (0..seeds_per_polarity).map(|i| format!("pos{i:02}")).collect();
    let neg: Vec<String> = (0..seeds_per_polarity).map(|i| format!("neg{i:02}")).collect();
    let held_pos: Vec<String> = (0..holdout_per_polarity)
        .map(|i| format!("heldpos{i:02}"))
        .collect();
    let held_neg: Vec<String> = (0..holdout_per_polarity)
        .map(|i| format!("heldneg{i:02}"))
        .collect();

    let mut names = Vec::new();
    let mut signs = Vec::new();
    for w in pos.iter().chain(&held_pos) {
        names.push(w.clone());
        signs.push(1.0);
    }
    for w in neg.iter().chain(&held_neg) {
        names.push(w.clone());
        signs.push(-1.0);
    }
    for i in 0..fillers {
        names.push(format!("filler{i:03}"));
        signs.push(0.0);
    }

    let seeds = SeedLexicon::new(pos, neg, 0.0).expect("generated seeds are valid");
    let labels = LabeledWords::from_pairs(
        held_pos
            .into_iter()
            .map(|w| (w, Polarity::Positive))
            .chain(held_neg.into_iter().map(|w| (w, Polarity::Negative))),
    )
    .expect("generated labels are unique");

    WordPlan {
        names,
        signs,
        seeds,
        labels,
    }
}

/// Sentiment at `+/- signal` on axis 0 plus isotropic noise; fillers are
/// noise only. Deterministic for a fixed seed.
pub fn planted_axis_fixture(cfg: &PlantedConfig) -> SyntheticFixture {
    let plan = plan_words(cfg.seeds_per_polarity, cfg.holdout_per_polarity, cfg.fillers);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let rows: Vec<Vec<f64>> = plan
        .signs
        .iter()
        .map(|&sign| {
            let mut row: Vec<f64> = (0..cfg.dim)
                .map(|_| {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    n * cfg.noise_sigma
                })
                .collect();
            row[0] += sign * cfg.signal;
            row
        })
        .collect();
    SyntheticFixture {
        table: EmbeddingTable::from_rows(plan.names, rows).expect("generated table is valid"),
        seeds: plan.seeds,
        labels: plan.labels,
    }
}

/// Sentiment on axis 0, a label-independent distractor on axis 1 scaled to
/// carry exactly `distractor_variance_ratio` times the axis-0 sample
/// variance, and small noise elsewhere. Deterministic for a fixed seed.
pub fn anisotropic_fixture(cfg: &AnisotropicConfig) -> SyntheticFixture {
    assert!(cfg.dim >= 2, "need at least two axes");
    let plan = plan_words(cfg.seeds_per_polarity, cfg.holdout_per_polarity, cfg.fillers);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let n = plan.names.len();

    let mut rows: Vec<Vec<f64>> = plan
        .signs
        .iter()
        .map(|&sign| {
            let mut row: Vec<f64> = (0..cfg.dim)
                .map(|_| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    noise * cfg.noise_sigma
                })
                .collect();
            row[0] += sign * cfg.sentiment_scale;
            row
        })
        .collect();

    let sentiment_variance = sample_variance(rows.iter().map(|r| r[0]), n);
    let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let raw_variance = sample_variance(raw.iter().copied(), n);
    let scale = (cfg.distractor_variance_ratio * sentiment_variance / raw_variance).sqrt();
    for (row, r) in rows.iter_mut().zip(&raw) {
        row[1] = r * scale;
    }

    SyntheticFixture {
        table: EmbeddingTable::from_rows(plan.names, rows).expect("generated table is valid"),
        seeds: plan.seeds,
        labels: plan.labels,
    }
}

fn sample_variance(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    let values: Vec<f64> = values.collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_fixture_has_expected_shape() {
        let cfg = PlantedConfig::default();
        let fixture = planted_axis_fixture(&cfg);
        assert_eq!(fixture.table.len(), 2 * (10 + 5) + 200);
        assert_eq!(fixture.table.dim(), 50);
        assert_eq!(fixture.seeds.positive().len(), 10);
        assert_eq!(fixture.labels.len(), 10);
        // Seeds carry the planted signal.
        let first_pos = fixture.table.vector("pos00").unwrap();
        assert!(first_pos[0] > 4.0);
        let first_neg = fixture.table.vector("neg00").unwrap();
        assert!(first_neg[0] < -4.0);
    }

    #[test]
    fn fixtures_are_deterministic() {
        let cfg = PlantedConfig::default();
        let a = planted_axis_fixture(&cfg);
        let b = planted_axis_fixture(&cfg);
        assert_eq!(a.table, b.table);

        let cfg = AnisotropicConfig::default();
        let a = anisotropic_fixture(&cfg);
        let b = anisotropic_fixture(&cfg);
        assert_eq!(a.table, b.table);
    }

    #[test]
    fn anisotropic_distractor_variance_ratio_is_exact() {
        let cfg = AnisotropicConfig::default();
        let fixture = anisotropic_fixture(&cfg);
        let n = fixture.table.len();
        let axis = |d: usize| (0..n).map(|i| fixture.table.row(i)[d]).collect::<Vec<_>>();
        let var = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        let v0 = var(&axis(0));
        let v1 = var(&axis(1));
        assert!((v1 / v0 - cfg.distractor_variance_ratio).abs() < 1e-9);
    }
}
