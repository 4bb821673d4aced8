use crate::error::{Error, Result};

use super::graph::{RefitGraph, RefitParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Final vectors for every graph node (fixed nodes are unchanged).
    pub vectors: Vec<Vec<f64>>,
    /// Objective before the first sweep and after every sweep that ran.
    pub objective_trace: Vec<f64>,
}

fn check_dims(graph: &RefitGraph, anchors: &[Vec<f64>], current: &[Vec<f64>]) -> Result<()> {
    let n = graph.rows.len();
    for len in [anchors.len(), current.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let dims = anchors.first().map_or(0, Vec::len);
    for v in anchors.iter().chain(current) {
        if v.len() != dims {
            return Err(Error::DimensionMismatch { expected: dims, found: v.len() });
        }
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Evaluate the refit objective for `current` against `anchors`.
pub fn objective(graph: &RefitGraph, anchors: &[Vec<f64>], current: &[Vec<f64>], alpha: f64) -> Result<f64> {
    check_dims(graph, anchors, current)?;
    let fidelity: f64 = graph
        .update
        .iter()
        .map(|&i| alpha * sq_dist(&current[i], &anchors[i]))
        .sum();
    let closeness: f64 = graph
        .edges
        .iter()
        .map(|e| e.weight * sq_dist(&current[e.a], &current[e.b]))
        .sum();
    Ok(fidelity + closeness)
}

/// One Gauss–Seidel sweep: each moving node jumps to the minimiser of the
/// objective with all other nodes held at their latest values.
pub fn refit_step(graph: &RefitGraph, anchors: &[Vec<f64>], current: &mut [Vec<f64>], alpha: f64) -> Result<()> {
    check_dims(graph, anchors, current)?;
    let dims = anchors.first().map_or(0, Vec::len);
    let mut next = vec![0.0; dims];
    for &i in &graph.update {
        let mut denom = alpha;
        next.iter_mut().zip(&anchors[i]).for_each(|(n, a)| *n = alpha * a);
        for (j, beta) in graph.neighbours(i) {
            denom += beta;
            next.iter_mut().zip(&current[j]).for_each(|(n, q)| *n += beta * q);
        }
        if denom <= 0.0 {
            return Err(Error::ZeroDenominator(graph.tokens[i].clone()));
        }
        current[i].iter_mut().zip(&next).for_each(|(q, n)| *q = n / denom);
    }
    Ok(())
}

/// Sweep until `params.iterations` is reached or a sweep improves the
/// objective by less than `params.convergence_epsilon`.
pub fn solve(graph: &RefitGraph, anchors: &[Vec<f64>], params: &RefitParams) -> Result<Solution> {
    params.validate()?;
    let mut current = anchors.to_vec();
    let mut trace = vec![objective(graph, anchors, &current, params.alpha)?];
    for _ in 0..params.iterations {
        refit_step(graph, anchors, &mut current, params.alpha)?;
        let value = objective(graph, anchors, &current, params.alpha)?;
        let improvement = trace[trace.len() - 1] - value;
        trace.push(value);
        if improvement < params.convergence_epsilon {
            break;
        }
    }
    Ok(Solution {
        vectors: current,
        objective_trace: trace,
    })
}
