//! First-principal-component baseline: projects embeddings onto the top
//! direction of variance, the comparison method for the ultradense axis.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::embedding::{dot, EmbeddingTable};
use crate::textio;

/// Tag of the persisted axis container.
pub const PCA_TAG: &str = "pca-axis";

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("need at least 2 vocabulary entries, got {0}")]
    TooFewPoints(usize),
    #[error("all embedding vectors are identical; the principal axis is undefined")]
    DegenerateData,
    #[error("word `{0}` not present in embedding table")]
    UnknownWord(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("axis is not unit length")]
    NotUnitLength,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<textio::TextError> for PcaError {
    fn from(e: textio::TextError) -> Self {
        PcaError::Parse {
            line: e.line,
            message: e.message,
        }
    }
}

/// The fitted first principal component: data mean, unit axis, and the
/// variance explained along the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaAxis {
    mean: Vec<f64>,
    axis: Vec<f64>,
    explained_variance: f64,
}

impl PcaAxis {
    pub fn new(mean: Vec<f64>, axis: Vec<f64>, explained_variance: f64) -> Result<Self, PcaError> {
        if mean.len() != axis.len() {
            return Err(PcaError::DimensionMismatch {
                expected: mean.len(),
                got: axis.len(),
            });
        }
        let norm = dot(&axis, &axis).sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(PcaError::NotUnitLength);
        }
        if explained_variance.is_nan() || explained_variance < 0.0 {
            return Err(PcaError::DegenerateData);
        }
        Ok(Self {
            mean,
            axis,
            explained_variance,
        })
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn explained_variance(&self) -> f64 {
        self.explained_variance
    }

    /// Persists the axis in the shared tagged-matrix container: the axis row,
    /// then the mean row, with the explained variance as metadata.
    pub fn save<W: Write>(&self, w: W) -> Result<(), PcaError> {
        textio::write_tagged_matrix(
            w,
            PCA_TAG,
            self.dim(),
            &[("explained_variance", format!("{}", self.explained_variance))],
            &[&self.axis, &self.mean],
        )?;
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self, PcaError> {
        let matrix = textio::read_tagged_matrix(r, PCA_TAG)?;
        if matrix.rows.len() != 2 {
            return Err(PcaError::Parse {
                line: matrix.rows.len() + 1,
                message: format!("expected axis and mean rows, found {}", matrix.rows.len()),
            });
        }
        let explained_variance = matrix
            .metadata
            .iter()
            .find(|(k, _)| k == "explained_variance")
            .and_then(|(_, v)| v.parse::<f64>().ok())
            .ok_or_else(|| PcaError::Parse {
                line: 1,
                message: "missing explained_variance metadata".into(),
            })?;
        let mut rows = matrix.rows;
        let mean = rows.pop().expect("length checked");
        let axis = rows.pop().expect("length checked");
        Self::new(mean, axis, explained_variance)
    }
}

/// Fits the first principal component of the embedding rows: mean-centers,
/// takes the top right-singular vector, and orients the sign so the
/// largest-magnitude component is positive (ties broken by lowest index).
/// `explained_variance` is `sigma_1^2 / (n - 1)`.
pub fn fit_pca1(table: &EmbeddingTable) -> Result<PcaAxis, PcaError> {
    let n = table.len();
    if n < 2 {
        return Err(PcaError::TooFewPoints(n));
    }
    let dim = table.dim();
    let mut mean = vec![0.0; dim];
    for (_, row) in table.iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    let centered = DMatrix::from_fn(n, dim, |i, j| table.row(i)[j] - mean[j]);
    let scale = centered.amax();
    let svd = centered.svd(false, true);
    let sigma1 = svd.singular_values[0];
    if sigma1 <= 1e-9 * scale.max(1.0) {
        return Err(PcaError::DegenerateData);
    }
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let mut axis: Vec<f64> = (0..dim).map(|j| v_t[(0, j)]).collect();

    // Sign convention: largest-magnitude component positive, ties -> lowest index.
    let lead = (0..dim)
        .max_by(|&a, &b| {
            axis[a]
                .abs()
                .partial_cmp(&axis[b].abs())
                .expect("finite components")
                .then(b.cmp(&a))
        })
        .expect("dim > 0");
    if axis[lead] < 0.0 {
        for v in axis.iter_mut() {
            *v = -*v;
        }
    }

    PcaAxis::new(mean, axis, sigma1 * sigma1 / (n - 1) as f64)
}

/// Scores a word on the principal axis: `axis . (e_word - mean)`. Over the
/// whole vocabulary these scores form the `[vocabulary size, 1]` baseline
/// representation.
pub fn pca_score(axis: &PcaAxis, table: &EmbeddingTable, word: &str) -> Result<f64, PcaError> {
    if axis.dim() != table.dim() {
        return Err(PcaError::DimensionMismatch {
            expected: axis.dim(),
            got: table.dim(),
        });
    }
    let e = table
        .vector(word)
        .ok_or_else(|| PcaError::UnknownWord(word.to_string()))?;
    Ok(e
        .iter()
        .zip(axis.axis())
        .zip(axis.mean())
        .map(|((v, a), m)| a * (v - m))
        .sum())
}
