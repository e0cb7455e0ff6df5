//! Cross-lingual polysemy toolkit.
//!
//! Pipeline: ingest poetry corpora (Romanized Urdu, English), train
//! skip-gram embeddings per language, query sense neighborhoods, project
//! vectors to 2D with PCA, mask sense collocations, induce senses with
//! collapsed-Gibbs LDA, pick the topic count by a coherence sweep, and
//! report per-topic sense distributions.
//!
//! The numeric kernels are generic over [`num::Real`]; the `*F64` aliases
//! below are what the CLI and file formats use.

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod num;
pub mod projection;
pub mod report;
pub mod senseinduction;

pub use corpus::{Language, TokenizedDocument, Vocabulary};
pub use senseinduction::{MaskedDocument, SenseInventory};

pub type EmbeddingModelF64 = embeddings::EmbeddingModel<f64>;
pub type EmbeddingModelF32 = embeddings::EmbeddingModel<f32>;
pub type SimilarityMatrixF64 = embeddings::SimilarityMatrix<f64>;
pub type SimilarityMatrixF32 = embeddings::SimilarityMatrix<f32>;
pub type PcaModelF64 = projection::PcaModel<f64>;
pub type PcaModelF32 = projection::PcaModel<f32>;
pub type LabeledPointF64 = projection::LabeledPoint<f64>;
