//! Sense embeddings: one vector per (word, label) pair.
//!
//! The pipeline reads sense-tagged corpora ([`corpus`]), counts sense keys
//! ([`vocab`]), trains CBOW, skip-gram or structured skip-gram embeddings with
//! negative sampling ([`trainer`]), stores them in word2vec-compatible or
//! native files ([`model_io`]) and answers lookup, neighbor and analogy
//! queries ([`query`]). [`eval`] holds a planted-polysemy harness that
//! checks sense separation on synthetic corpora.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod model_io;
pub mod query;
pub mod trainer;
pub mod vocab;

pub use corpus::{Document, SenseToken, Span};
pub use model_io::ModelFormat;
pub use query::{Lookup, NeighborResult, Query, QueryEngine};
pub use trainer::{train, EmbeddingModel, ModelKind, TrainConfig, TrainReport};
pub use vocab::{NegativeTable, SenseEntry, Vocabulary};
