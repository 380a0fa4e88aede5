//! Sentiment lexicon induction from word embeddings.
//!
//! The pipeline: ingest a comment CSV ([`corpus`]), train skip-gram
//! negative-sampling embeddings ([`embedding`]), learn an orthogonal
//! transform whose first row is a one-dimensional sentiment axis
//! ([`densifier`]), score and rank the whole vocabulary into a lexicon
//! ([`lexicon`]), and compare against a first-principal-component
//! baseline ([`pca`]). [`synthetic`] provides deterministic fixtures with
//! a planted sentiment direction for experiments and tests.

pub mod corpus;
pub mod densifier;
pub mod embedding;
pub mod lexicon;
pub mod pca;
pub mod synthetic;
mod textio;

pub use corpus::{CommentRecord, CsvSchema, FrequencyTable, TokenizeMode, TokenizedCorpus};
pub use densifier::{
    DensifierConfig, LossRecord, LossTrace, OrthogonalTransform, PairKind, SeedLexicon,
};
pub use embedding::{EmbeddingTable, SgnsConfig};
pub use lexicon::{
    EvalReport, LabeledWords, LexiconMetadata, LexiconSource, PlotKind, Polarity,
    SentimentLexicon,
};
pub use pca::PcaAxis;
