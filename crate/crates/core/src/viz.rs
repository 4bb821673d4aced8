//! Data behind the visual views: neighbour graphs, 2-D projections and
//! pairwise similarity matrices.

use std::collections::{HashMap, HashSet};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{display_token, EmbeddingModel};
use crate::query::{cosine, rank, search, Query};

/// Node id used for the composite query vector.
pub const QUERY_NODE: &str = "__query__";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphLink {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

/// Neighbour graph in the `{nodes, links}` shape consumed by force-directed
/// and sankey renderers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Graph {
    pub nodes: Vec<GraphNode>,
    pub links: Vec<GraphLink>,
}

impl Graph {
    fn add_node(&mut self, seen: &mut HashSet<String>, id: &str, label: String) {
        if seen.insert(id.to_string()) {
            self.nodes.push(GraphNode { id: id.to_string(), label });
        }
    }
}

/// Star from the query node to its `q.k` hits; with `depth == 2` every hit is
/// expanded to its own `q.k` nearest neighbours.
pub fn neighbor_graph(model: &EmbeddingModel, q: &Query, depth: u8) -> Result<Graph> {
    if !(1..=2).contains(&depth) {
        return Err(Error::BadQuery(format!("graph depth must be 1 or 2, got {depth}")));
    }
    let results = search(model, q)?;
    let mut graph = Graph::default();
    let mut seen = HashSet::new();
    let mut linked: HashSet<(usize, usize)> = HashSet::new();

    graph.add_node(&mut seen, QUERY_NODE, q.label());
    for hit in &results.hits {
        graph.add_node(&mut seen, &hit.token, display_token(&hit.token));
        graph.links.push(GraphLink {
            source: QUERY_NODE.to_string(),
            target: hit.token.clone(),
            weight: hit.score,
        });
    }

    if depth == 2 {
        for hit in &results.hits {
            let id = model.resolve(&hit.token)?;
            let qv: Vec<f64> = model.row(id).iter().map(|&x| f64::from(x)).collect();
            for (score, other) in rank(model, &qv, q.k, &[id])? {
                let token = model.vocab().word(other);
                graph.add_node(&mut seen, token, display_token(token));
                if linked.insert((id.min(other), id.max(other))) {
                    graph.links.push(GraphLink {
                        source: hit.token.clone(),
                        target: token.to_string(),
                        weight: score,
                    });
                }
            }
        }
    }
    Ok(graph)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub token: String,
    pub x: f64,
    pub y: f64,
}

/// Resolve tokens, dropping repeats (by row) while keeping first-seen order.
fn distinct_rows(model: &EmbeddingModel, tokens: &[impl AsRef<str>]) -> Result<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut ids = Vec::new();
    for t in tokens {
        let id = model.resolve(t.as_ref())?;
        if seen.insert(id) {
            ids.push(id);
        }
    }
    Ok(ids)
}

/// Deterministic PCA projection of the given words onto their top two
/// principal components.
///
/// Component order follows descending eigenvalue; each component's sign is
/// chosen so that its largest-magnitude coordinate is positive.
pub fn project_2d(model: &EmbeddingModel, tokens: &[impl AsRef<str>]) -> Result<Vec<ProjectedPoint>> {
    let ids = distinct_rows(model, tokens)?;
    if ids.len() < 2 {
        return Err(Error::TooFewTokens);
    }
    let n = ids.len();
    let d = model.dims();
    let mut x = DMatrix::<f64>::from_fn(n, d, |i, j| f64::from(model.row(ids[i])[j]));
    let mean = x.row_mean();
    for mut row in x.row_iter_mut() {
        row -= &mean;
    }

    // Scores of the top components are the leading eigenvectors of the Gram
    // matrix scaled by sqrt(eigenvalue); n is small so this beats a d x d solve.
    let gram = &x * x.transpose();
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut coords = [vec![0.0; n], vec![0.0; n]];
    for (c, &k) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[k].max(0.0);
        let scale = lambda.sqrt();
        let col = eig.eigenvectors.column(k);
        let mut values: Vec<f64> = col.iter().map(|v| v * scale).collect();
        let pivot = values
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > values[best].abs() { i } else { best });
        if values[pivot] < 0.0 {
            values.iter_mut().for_each(|v| *v = -*v);
        }
        coords[c] = values;
    }

    Ok(ids
        .iter()
        .enumerate()
        .map(|(i, &id)| ProjectedPoint {
            token: model.vocab().word(id).to_string(),
            x: coords[0][i],
            y: coords[1][i],
        })
        .collect())
}

/// Pairwise cosine similarities backing the heatmap view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub tokens: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

pub fn distance_matrix(model: &EmbeddingModel, tokens: &[impl AsRef<str>]) -> Result<SimilarityMatrix> {
    let ids: Vec<usize> = tokens
        .iter()
        .map(|t| model.resolve(t.as_ref()))
        .collect::<Result<_>>()?;
    let n = ids.len();
    let mut values = vec![vec![0.0; n]; n];
    let mut cache: HashMap<(usize, usize), f64> = HashMap::new();
    for i in 0..n {
        values[i][i] = 1.0;
        for j in (i + 1)..n {
            let key = (ids[i].min(ids[j]), ids[i].max(ids[j]));
            let c = match cache.get(&key) {
                Some(&c) => c,
                None if ids[i] == ids[j] => 1.0,
                None => {
                    let c = cosine(model.row(ids[i]), model.row(ids[j]))?;
                    cache.insert(key, c);
                    c
                }
            };
            values[i][j] = c;
            values[j][i] = c;
        }
    }
    Ok(SimilarityMatrix {
        tokens: ids.iter().map(|&id| model.vocab().word(id).to_string()).collect(),
        values,
    })
}
