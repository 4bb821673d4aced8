//! Mutable word-embedding model with cosine similarity search and
//! human-driven refitting.
//!
//! The crate is organised around a single live [`EmbeddingModel`]:
//!
//! * [`codec`] reads and writes the word2vec binary and text formats.
//! * [`query`] answers single, additive, subtractive and analogy searches.
//! * [`viz`] derives graph, projection and similarity-matrix data for
//!   visual exploration of results.
//! * [`refit`] moves vectors toward user-selected neighbours by coordinate
//!   descent on a quadratic retrofitting objective, and records every
//!   mutation in an [`ActionLog`] that supports undo and replay.

pub mod codec;
mod error;
pub mod model;
pub mod query;
pub mod refit;
pub mod viz;

pub use codec::{load_word2vec_binary, load_word2vec_text, save_model, ModelFormat};
pub use error::{Error, Result};
pub use model::{display_token, normalize_token, EmbeddingModel, Vocabulary};
pub use query::{cosine, query_vector, search, Hit, Query, QueryMode, RankedResults};
pub use refit::{
    build_refit_graph, objective, refit, refit_step, replay, undo, ActionLog, BetaScheme,
    LogEntry, PairChange, PreparedRefit, RefitGraph, RefitMode, RefitParams, RefitReport,
    RefitRequest,
};
pub use viz::{distance_matrix, neighbor_graph, project_2d, Graph, ProjectedPoint, SimilarityMatrix};
