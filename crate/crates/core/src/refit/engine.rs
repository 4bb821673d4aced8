use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;
use crate::query::cosine;

use super::graph::{build_refit_graph, RefitGraph, RefitMode, RefitRequest};
use super::log::{ActionLog, LogEntry};
use super::solver::{solve, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionSpan {
    pub before: u64,
    pub after: u64,
}

/// Cosine between two refit terms before and after the action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairChange {
    pub term_a: String,
    pub term_b: String,
    pub cosine_before: f64,
    pub cosine_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefitReport {
    pub request: RefitRequest,
    pub revisions: RevisionSpan,
    pub pairs: Vec<PairChange>,
    pub objective_trace: Vec<f64>,
    pub moved: Vec<String>,
}

/// A refit computed against a fixed model revision, ready to be committed.
///
/// Preparing only needs shared access to the model, so readers keep running
/// while the solver works; [`PreparedRefit::commit`] then needs exclusive
/// access for the brief write.
#[derive(Debug, Clone)]
pub struct PreparedRefit {
    pub request: RefitRequest,
    pub base_revision: u64,
    pub graph: RefitGraph,
    pub solution: Solution,
    pub pairs: Vec<PairChange>,
    pub moved: Vec<String>,
    updates: Vec<(usize, Vec<f32>)>,
    displaced: BTreeMap<String, Vec<f32>>,
}

impl PreparedRefit {
    /// Verify that the refit can still be applied to `model` as prepared.
    pub fn check(&self, model: &EmbeddingModel) -> Result<()> {
        if model.revision() != self.base_revision {
            return Err(Error::StaleRevision {
                expected: self.base_revision,
                found: model.revision(),
            });
        }
        model.check_rows(&self.updates).map(drop)
    }

    /// The log entry this refit will record once committed.
    pub fn log_entry(&self) -> LogEntry {
        let report = RefitReport {
            request: self.request.clone(),
            revisions: RevisionSpan {
                before: self.base_revision,
                after: self.base_revision + 1,
            },
            pairs: self.pairs.clone(),
            objective_trace: self.solution.objective_trace.clone(),
            moved: self.moved.clone(),
        };
        LogEntry::new(report, self.displaced.clone())
    }

    /// Write the new vectors as a single revision and append to `log`.
    pub fn commit(self, model: &mut EmbeddingModel, log: &mut ActionLog) -> Result<RefitReport> {
        let entry = self.log_entry();
        self.commit_entry(model, log, entry)
    }

    /// Like [`PreparedRefit::commit`], recording an entry obtained earlier
    /// from [`PreparedRefit::log_entry`] (e.g. one already persisted).
    pub fn commit_entry(self, model: &mut EmbeddingModel, log: &mut ActionLog, entry: LogEntry) -> Result<RefitReport> {
        self.check(model)?;
        let after = model.apply_rows(&self.updates)?;
        debug_assert_eq!(after, entry.report.revisions.after);
        let report = entry.report.clone();
        log.push(entry);
        Ok(report)
    }
}

/// Solve a refit against the current model without mutating it.
pub fn prepare_refit(model: &EmbeddingModel, request: &RefitRequest) -> Result<PreparedRefit> {
    let graph = build_refit_graph(model, request)?;
    let anchors: Vec<Vec<f64>> = graph
        .rows
        .iter()
        .map(|&r| model.row(r).iter().map(|&x| f64::from(x)).collect())
        .collect();
    let solution = solve(&graph, &anchors, &request.params)?;

    let mut updates = Vec::new();
    let mut moved = Vec::new();
    let mut displaced = BTreeMap::new();
    let mut stored: Vec<Vec<f32>> = graph.rows.iter().map(|&r| model.row(r).to_vec()).collect();
    for &node in &graph.update {
        let row = graph.rows[node];
        let rounded: Vec<f32> = solution.vectors[node].iter().map(|&x| x as f32).collect();
        let changed = rounded
            .iter()
            .zip(model.row(row))
            .any(|(a, b)| a.to_bits() != b.to_bits());
        if changed {
            if rounded.iter().all(|&x| x == 0.0) {
                return Err(Error::ZeroVector(graph.tokens[node].clone()));
            }
            displaced.insert(graph.tokens[node].clone(), model.row(row).to_vec());
            moved.push(graph.tokens[node].clone());
            stored[node] = rounded.clone();
            updates.push((row, rounded));
        }
    }

    let mut pairs = Vec::with_capacity(graph.edges.len());
    for e in &graph.edges {
        pairs.push(PairChange {
            term_a: graph.tokens[e.a].clone(),
            term_b: graph.tokens[e.b].clone(),
            cosine_before: cosine(model.row(graph.rows[e.a]), model.row(graph.rows[e.b]))?,
            cosine_after: cosine(&stored[e.a], &stored[e.b])?,
        });
    }
    debug_assert!(request.mode != RefitMode::Targeted || pairs.iter().all(|p| p.term_a == graph.tokens[0]));

    Ok(PreparedRefit {
        request: request.clone(),
        base_revision: model.revision(),
        graph,
        solution,
        pairs,
        moved,
        updates,
        displaced,
    })
}

/// Run a refit to completion and apply it to the live model.
///
/// On any error the model and log are left unchanged.
pub fn refit(model: &mut EmbeddingModel, log: &mut ActionLog, request: &RefitRequest) -> Result<RefitReport> {
    prepare_refit(model, request)?.commit(model, log)
}
