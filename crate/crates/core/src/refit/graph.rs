use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefitMode {
    /// Move one target toward a fixed group.
    #[serde(alias = "target")]
    Targeted,
    /// Pull every member of a group toward the others.
    #[serde(alias = "round_robin", alias = "round-robin")]
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaScheme {
    /// `β_ij = 1 / deg(i)`.
    #[default]
    InverseDegree,
    /// `β_ij = 1`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefitParams {
    /// Weight anchoring each moving vector to its value at the start of the action.
    pub alpha: f64,
    pub beta_scheme: BetaScheme,
    /// Maximum number of sweeps.
    pub iterations: usize,
    /// Stop once a sweep improves the objective by less than this.
    pub convergence_epsilon: f64,
}

impl Default for RefitParams {
    fn default() -> Self {
        RefitParams {
            alpha: 1.0,
            beta_scheme: BetaScheme::InverseDegree,
            iterations: 10,
            convergence_epsilon: 1e-6,
        }
    }
}

impl RefitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidRefit(format!("alpha must be a non-negative number, got {}", self.alpha)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidRefit("iterations must be at least 1".into()));
        }
        if self.convergence_epsilon.is_nan() || self.convergence_epsilon < 0.0 {
            return Err(Error::InvalidRefit("convergence_epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefitRequest {
    pub mode: RefitMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(alias = "terms")]
    pub group: Vec<String>,
    #[serde(default)]
    pub params: RefitParams,
}

impl RefitRequest {
    pub fn targeted<S: Into<String>>(target: impl Into<String>, group: impl IntoIterator<Item = S>) -> Self {
        RefitRequest {
            mode: RefitMode::Targeted,
            target: Some(target.into()),
            group: group.into_iter().map(Into::into).collect(),
            params: RefitParams::default(),
        }
    }

    pub fn round_robin<S: Into<String>>(group: impl IntoIterator<Item = S>) -> Self {
        RefitRequest {
            mode: RefitMode::RoundRobin,
            target: None,
            group: group.into_iter().map(Into::into).collect(),
            params: RefitParams::default(),
        }
    }

    pub fn with_params(mut self, params: RefitParams) -> Self {
        self.params = params;
        self
    }
}

/// An undirected refit edge between two local node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefitEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// The neighbourhood a refit operates on, in local node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RefitGraph {
    /// Vocabulary row of each node. For targeted requests node 0 is the target.
    pub rows: Vec<usize>,
    pub tokens: Vec<String>,
    /// Each edge appears once; `weight` is β seen from the moving endpoint(s).
    pub edges: Vec<RefitEdge>,
    /// Nodes that move, in ascending vocabulary order (the sweep order).
    pub update: Vec<usize>,
}

impl RefitGraph {
    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.a == node || e.b == node).count()
    }

    /// `(neighbour, β)` pairs incident to `node`.
    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.a == node {
                Some((e.b, e.weight))
            } else if e.b == node {
                Some((e.a, e.weight))
            } else {
                None
            }
        })
    }
}

/// Resolve a request against the model into its edge set and update set.
pub fn build_refit_graph(model: &EmbeddingModel, request: &RefitRequest) -> Result<RefitGraph> {
    request.params.validate()?;
    let mut terms: Vec<&str> = Vec::with_capacity(request.group.len() + 1);
    match (request.mode, &request.target) {
        (RefitMode::Targeted, Some(target)) => {
            if request.group.is_empty() {
                return Err(Error::InvalidRefit("targeted refit needs at least one group term".into()));
            }
            terms.push(target);
        }
        (RefitMode::Targeted, None) => {
            return Err(Error::InvalidRefit("targeted refit needs a target".into()));
        }
        (RefitMode::RoundRobin, Some(_)) => {
            return Err(Error::InvalidRefit("round-robin refit takes no target".into()));
        }
        (RefitMode::RoundRobin, None) => {
            if request.group.len() < 2 {
                return Err(Error::InvalidRefit("round-robin refit needs at least two terms".into()));
            }
        }
    }
    terms.extend(request.group.iter().map(String::as_str));

    let mut rows = Vec::with_capacity(terms.len());
    let mut seen = HashSet::new();
    for (i, term) in terms.iter().enumerate() {
        let row = model.resolve(term)?;
        if !seen.insert(row) {
            let is_target = request.mode == RefitMode::Targeted && rows.first() == Some(&row);
            return Err(if is_target && i > 0 {
                Error::TargetInGroup(term.to_string())
            } else {
                Error::DuplicateTerm(term.to_string())
            });
        }
        rows.push(row);
    }

    let n = rows.len();
    let pairs: Vec<(usize, usize)> = match request.mode {
        RefitMode::Targeted => (1..n).map(|j| (0, j)).collect(),
        RefitMode::RoundRobin => (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect(),
    };
    let mut degree = vec![0usize; n];
    for &(a, b) in &pairs {
        degree[a] += 1;
        degree[b] += 1;
    }
    // Star: only the target moves. Clique: every node has degree n-1, so
    // the weight is the same from either endpoint.
    let edges = pairs
        .into_iter()
        .map(|(a, b)| RefitEdge {
            a,
            b,
            weight: match request.params.beta_scheme {
                BetaScheme::InverseDegree => 1.0 / degree[a] as f64,
                BetaScheme::Uniform => 1.0,
            },
        })
        .collect();

    let mut update: Vec<usize> = match request.mode {
        RefitMode::Targeted => vec![0],
        RefitMode::RoundRobin => (0..n).collect(),
    };
    update.sort_by_key(|&i| rows[i]);

    Ok(RefitGraph {
        tokens: rows.iter().map(|&r| model.vocab().word(r).to_string()).collect(),
        rows,
        edges,
        update,
    })
}
