//! Vector-algebra queries and exhaustive cosine ranking.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{display_token, EmbeddingModel};

pub const DEFAULT_K: usize = 10;

/// Rows per work unit in the parallel scan; small models are scanned serially.
const SCAN_CHUNK_ROWS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryMode {
    /// One term.
    Single,
    /// Mean of two or more terms.
    Additive,
    /// `a - b`.
    Subtractive,
    /// `a - b + c`.
    Analogy,
}

impl FromStr for QueryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(QueryMode::Single),
            "add" | "additive" => Ok(QueryMode::Additive),
            "sub" | "subtract" | "subtractive" => Ok(QueryMode::Subtractive),
            "analogy" => Ok(QueryMode::Analogy),
            other => Err(format!("unknown query mode `{other}`")),
        }
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryMode::Single => "single",
            QueryMode::Additive => "additive",
            QueryMode::Subtractive => "subtractive",
            QueryMode::Analogy => "analogy",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub mode: QueryMode,
    pub terms: Vec<String>,
    pub k: usize,
    pub exclude_inputs: bool,
}

impl Query {
    pub fn new<S: Into<String>>(mode: QueryMode, terms: impl IntoIterator<Item = S>) -> Result<Self> {
        let q = Query {
            mode,
            terms: terms.into_iter().map(Into::into).collect(),
            k: DEFAULT_K,
            exclude_inputs: true,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn single(term: impl Into<String>) -> Self {
        Query {
            mode: QueryMode::Single,
            terms: vec![term.into()],
            k: DEFAULT_K,
            exclude_inputs: true,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_exclude_inputs(mut self, exclude: bool) -> Self {
        self.exclude_inputs = exclude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.terms.len();
        let ok = match self.mode {
            QueryMode::Single => n == 1,
            QueryMode::Additive => n >= 2,
            QueryMode::Subtractive => n == 2,
            QueryMode::Analogy => n == 3,
        };
        if !ok {
            let wanted = match self.mode {
                QueryMode::Single => "exactly one term",
                QueryMode::Additive => "at least two terms",
                QueryMode::Subtractive => "exactly two terms",
                QueryMode::Analogy => "exactly three terms",
            };
            return Err(Error::BadQuery(format!("{} query takes {wanted}, got {n}", self.mode)));
        }
        if self.k == 0 {
            return Err(Error::BadQuery("k must be at least 1".into()));
        }
        if self.terms.iter().any(|t| t.trim().is_empty()) {
            return Err(Error::BadQuery("empty term".into()));
        }
        Ok(())
    }

    /// Human-readable form of the query expression, e.g. `sassy - she + he`.
    pub fn label(&self) -> String {
        let terms: Vec<String> = self.terms.iter().map(|t| display_token(t.trim())).collect();
        match self.mode {
            QueryMode::Single => terms[0].clone(),
            QueryMode::Additive => terms.join(" + "),
            QueryMode::Subtractive => format!("{} - {}", terms[0], terms[1]),
            QueryMode::Analogy => format!("{} - {} + {}", terms[0], terms[1], terms[2]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub token: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResults {
    pub query: Query,
    pub revision: u64,
    pub hits: Vec<Hit>,
}

/// Cosine similarity at 64-bit precision.
pub fn cosine<A, B>(u: &[A], v: &[B]) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut uu, mut vv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a.into(), b.into());
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::ZeroComposite);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

/// Resolve every query term to a row id, reporting the first unknown term.
pub(crate) fn resolve_terms(model: &EmbeddingModel, q: &Query) -> Result<Vec<usize>> {
    q.terms.iter().map(|t| model.resolve(t)).collect()
}

/// The composite query vector, built from raw (unnormalized) rows.
pub fn query_vector(model: &EmbeddingModel, q: &Query) -> Result<Vec<f64>> {
    q.validate()?;
    let ids = resolve_terms(model, q)?;
    Ok(composite(model, q.mode, &ids))
}

fn composite(model: &EmbeddingModel, mode: QueryMode, ids: &[usize]) -> Vec<f64> {
    let row = |i: usize| model.row(ids[i]).iter().map(|&x| f64::from(x));
    match mode {
        QueryMode::Single => row(0).collect(),
        QueryMode::Additive => {
            let mut acc = vec![0.0; model.dims()];
            for i in 0..ids.len() {
                for (a, x) in acc.iter_mut().zip(row(i)) {
                    *a += x;
                }
            }
            let n = ids.len() as f64;
            acc.iter_mut().for_each(|a| *a /= n);
            acc
        }
        QueryMode::Subtractive => row(0).zip(row(1)).map(|(a, b)| a - b).collect(),
        QueryMode::Analogy => row(0)
            .zip(row(1))
            .zip(row(2))
            .map(|((a, b), c)| a - b + c)
            .collect(),
    }
}

/// Rank the whole vocabulary against the query by cosine similarity.
pub fn search(model: &EmbeddingModel, q: &Query) -> Result<RankedResults> {
    q.validate()?;
    let ids = resolve_terms(model, q)?;
    let qv = composite(model, q.mode, &ids);
    let excluded: &[usize] = if q.exclude_inputs { &ids } else { &[] };
    let top = rank(model, &qv, q.k, excluded)?;
    Ok(RankedResults {
        query: q.clone(),
        revision: model.revision(),
        hits: top
            .into_iter()
            .map(|(score, id)| Hit {
                token: model.vocab().word(id).to_string(),
                score,
            })
            .collect(),
    })
}

/// Exhaustive top-`k` scan. Returns `(score, row)` pairs, best first.
pub(crate) fn rank(model: &EmbeddingModel, qv: &[f64], k: usize, excluded: &[usize]) -> Result<Vec<(f64, usize)>> {
    let norm = qv.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroComposite);
    }
    let dims = model.dims();
    let words = model.vocab().words();

    let scan = |first_row: usize, block: &[f32]| {
        let mut top = TopK::new(k, words);
        for (offset, row) in block.chunks_exact(dims).enumerate() {
            let id = first_row + offset;
            if excluded.contains(&id) {
                continue;
            }
            let score = (dot(qv, row) / (norm * model.norm(id))).clamp(-1.0, 1.0);
            top.offer(score, id);
        }
        top
    };

    let top = if model.len() <= SCAN_CHUNK_ROWS {
        scan(0, model.raw())
    } else {
        model
            .raw()
            .par_chunks(SCAN_CHUNK_ROWS * dims)
            .enumerate()
            .map(|(chunk, block)| scan(chunk * SCAN_CHUNK_ROWS, block))
            .reduce(|| TopK::new(k, words), TopK::merge)
    };
    Ok(top.entries)
}

#[inline]
fn dot(q: &[f64], row: &[f32]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut qc = q.chunks_exact(4);
    let mut rc = row.chunks_exact(4);
    for (a, b) in (&mut qc).zip(&mut rc) {
        acc[0] += a[0] * f64::from(b[0]);
        acc[1] += a[1] * f64::from(b[1]);
        acc[2] += a[2] * f64::from(b[2]);
        acc[3] += a[3] * f64::from(b[3]);
    }
    let mut tail = 0.0;
    for (a, b) in qc.remainder().iter().zip(rc.remainder()) {
        tail += a * f64::from(*b);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Score descending, then token ascending.
fn better(a: (f64, usize), b: (f64, usize), words: &[String]) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| words[a.1].cmp(&words[b.1]))
}

/// Bounded best-first buffer.
struct TopK<'a> {
    k: usize,
    words: &'a [String],
    entries: Vec<(f64, usize)>,
}

impl<'a> TopK<'a> {
    fn new(k: usize, words: &'a [String]) -> Self {
        TopK {
            k,
            words,
            entries: Vec::with_capacity(k.min(1024) + 1),
        }
    }

    fn offer(&mut self, score: f64, id: usize) {
        let cand = (score, id);
        if self.entries.len() == self.k {
            let worst = self.entries[self.k - 1];
            if better(cand, worst, self.words) != Ordering::Less {
                return;
            }
        }
        let pos = self
            .entries
            .partition_point(|&e| better(e, cand, self.words) == Ordering::Less);
        self.entries.insert(pos, cand);
        self.entries.truncate(self.k);
    }

    fn merge(mut self, other: TopK<'a>) -> Self {
        for (score, id) in other.entries {
            self.offer(score, id);
        }
        self
    }
}
