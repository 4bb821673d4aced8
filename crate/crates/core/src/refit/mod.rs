//! Interactive refitting.
//!
//! A refit pulls word vectors toward a user-chosen set of neighbours by
//! minimising
//!
//! ```text
//! Ψ(Q) = Σ_{i∈U} α‖q_i − q̂_i‖² + Σ_{(i,j)∈E} β_ij‖q_i − q_j‖²
//! ```
//!
//! where `q̂` are the vectors at the start of the action and `U` is the set of
//! rows allowed to move. Two request shapes are supported:
//!
//! * **targeted**: a star from one target to a group; only the target moves.
//! * **round-robin**: a complete graph on the group; every member moves.
//!
//! The objective is minimised by in-place (Gauss–Seidel) coordinate sweeps in
//! ascending vocabulary order. Results are written back as one revision and
//! recorded in an [`ActionLog`].

mod engine;
mod graph;
mod log;
mod solver;

pub use engine::{prepare_refit, refit, PairChange, PreparedRefit, RefitReport, RevisionSpan};
pub use graph::{build_refit_graph, BetaScheme, RefitEdge, RefitGraph, RefitMode, RefitParams, RefitRequest};
pub use log::{replay, undo, ActionLog, LogEntry, LogRecord};
pub use solver::{objective, refit_step, solve, Solution};
