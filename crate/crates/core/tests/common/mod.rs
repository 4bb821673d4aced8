//! Random model generators and naive reference implementations shared by
//! the integration tests. Nothing here calls into the search kernel or the
//! refit solver.

#![allow(dead_code)]
// the oracles index explicitly to mirror the formulas term by term
#![allow(clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::Rng;
use wordrefit_core::{EmbeddingModel, QueryMode};

/// Random model whose rows are uniform in [-1, 1]; about `dup_rate` of rows
/// copy an earlier row bit-for-bit so ties occur.
pub fn random_model<R: Rng>(rng: &mut R, n: usize, dims: usize, dup_rate: f64) -> EmbeddingModel {
    let mut rows: Vec<Vec<f32>> = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 && rng.random_bool(dup_rate) {
            let j = rng.random_range(0..i);
            rows.push(rows[j].clone());
        } else {
            loop {
                let v: Vec<f32> = (0..dims).map(|_| rng.random_range(-1.0f32..1.0)).collect();
                if v.iter().any(|&x| x != 0.0) {
                    rows.push(v);
                    break;
                }
            }
        }
    }
    let mut names: Vec<String> = (0..n).map(|i| format!("w{i:04}")).collect();
    names.shuffle(rng);
    EmbeddingModel::from_rows(names.into_iter().zip(rows)).unwrap()
}

pub fn row64(model: &EmbeddingModel, id: usize) -> Vec<f64> {
    model.row(id).iter().map(|&x| x as f64).collect()
}

pub fn naive_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nu * nv)
}

/// Build the query vector literally from the mode definition.
pub fn naive_query_vector(model: &EmbeddingModel, mode: QueryMode, terms: &[usize]) -> Vec<f64> {
    let v: Vec<Vec<f64>> = terms.iter().map(|&t| row64(model, t)).collect();
    let d = model.dims();
    match mode {
        QueryMode::Single => v[0].clone(),
        QueryMode::Additive => (0..d)
            .map(|k| v.iter().map(|r| r[k]).sum::<f64>() / v.len() as f64)
            .collect(),
        QueryMode::Subtractive => (0..d).map(|k| v[0][k] - v[1][k]).collect(),
        QueryMode::Analogy => (0..d).map(|k| v[0][k] - v[1][k] + v[2][k]).collect(),
    }
}

/// Score every word, sort, exclude, truncate.
pub fn naive_search(
    model: &EmbeddingModel,
    mode: QueryMode,
    terms: &[usize],
    k: usize,
    exclude: bool,
) -> Vec<(String, f64)> {
    let q = naive_query_vector(model, mode, terms);
    let mut all: Vec<(String, f64)> = (0..model.len())
        .filter(|i| !(exclude && terms.contains(i)))
        .map(|i| (model.vocab().word(i).to_string(), naive_cosine(&q, &row64(model, i))))
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// A refit instance spelled out as plain data: vocabulary rows of the nodes,
/// which nodes move, and the neighbour weights, derived directly from the
/// request shape.
pub struct LiteralRefit {
    pub rows: Vec<usize>,
    pub moving: Vec<usize>,
    /// beta[i][j] > 0 iff i and j are neighbours.
    pub beta: Vec<Vec<f64>>,
}

impl LiteralRefit {
    pub fn targeted(target: usize, group: &[usize], uniform: bool) -> Self {
        let n = group.len() + 1;
        let mut rows = vec![target];
        rows.extend_from_slice(group);
        let mut beta = vec![vec![0.0; n]; n];
        let w = if uniform { 1.0 } else { 1.0 / group.len() as f64 };
        for j in 1..n {
            beta[0][j] = w;
            beta[j][0] = w;
        }
        LiteralRefit { rows, moving: vec![0], beta }
    }

    pub fn round_robin(group: &[usize], uniform: bool) -> Self {
        let n = group.len();
        let w = if uniform { 1.0 } else { 1.0 / (n - 1) as f64 };
        let beta = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { w }).collect())
            .collect();
        let mut moving: Vec<usize> = (0..n).collect();
        moving.sort_by_key(|&i| group[i]);
        LiteralRefit {
            rows: group.to_vec(),
            moving,
            beta,
        }
    }

    /// q_i ← (α q̂_i + Σ_j β_ij q_j) / (α + Σ_j β_ij), in place, in sweep order.
    pub fn sweep(&self, anchors: &[Vec<f64>], q: &mut [Vec<f64>], alpha: f64) {
        for &i in &self.moving {
            let d = anchors[i].len();
            let mut num: Vec<f64> = (0..d).map(|k| alpha * anchors[i][k]).collect();
            let mut den = alpha;
            for j in 0..self.rows.len() {
                if self.beta[i][j] > 0.0 {
                    for k in 0..d {
                        num[k] += self.beta[i][j] * q[j][k];
                    }
                    den += self.beta[i][j];
                }
            }
            for k in 0..d {
                q[i][k] = num[k] / den;
            }
        }
    }

    /// Σ_{i moving} α‖q_i − q̂_i‖² + Σ_{i<j} β_ij ‖q_i − q_j‖², term by term.
    pub fn objective(&self, anchors: &[Vec<f64>], q: &[Vec<f64>], alpha: f64) -> f64 {
        let mut total = 0.0;
        for &i in &self.moving {
            for k in 0..q[i].len() {
                total += alpha * (q[i][k] - anchors[i][k]).powi(2);
            }
        }
        for i in 0..self.rows.len() {
            for j in (i + 1)..self.rows.len() {
                let b = self.beta[i][j].max(self.beta[j][i]);
                if b > 0.0 {
                    for k in 0..q[i].len() {
                        total += b * (q[i][k] - q[j][k]).powi(2);
                    }
                }
            }
        }
        total
    }
}
