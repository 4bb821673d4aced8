//! The live, mutable embedding model.
//!
//! Vectors are stored as a contiguous row-major `f32` matrix, exactly as they
//! appear in a word2vec payload. Alongside it the model keeps a per-row norm
//! cache (`‖row‖` at 64-bit precision) so the search kernel can score a row
//! with one dot product and one division. The cache is refreshed eagerly in
//! the same call that replaces a row, and every mutation bumps
//! [`EmbeddingModel::revision`].

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Map a user-facing string to the stored token form (spaces become underscores).
pub fn normalize_token(term: &str) -> String {
    term.trim().replace(' ', "_")
}

/// Map a stored token to its display form (underscores become spaces).
pub fn display_token(token: &str) -> String {
    token.replace('_', " ")
}

/// Ordered, duplicate-free token list with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Vocabulary {
            words: Vec::with_capacity(n),
            index: HashMap::with_capacity(n),
        }
    }

    /// Append a token, returning its row id.
    pub fn push(&mut self, token: String) -> Result<usize> {
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidToken(token));
        }
        if self.index.contains_key(&token) {
            return Err(Error::DuplicateToken(token));
        }
        let id = self.words.len();
        self.index.insert(token.clone(), id);
        self.words.push(token);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Exact lookup of a stored token.
    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Resolve a user-supplied term: spaces map to underscores, exact match
    /// first, then a lower-cased retry.
    pub fn resolve(&self, term: &str) -> Option<usize> {
        let normalized = normalize_token(term);
        self.get(&normalized).or_else(|| {
            let lower = normalized.to_lowercase();
            if lower != normalized {
                self.get(&lower)
            } else {
                None
            }
        })
    }
}

/// A vocabulary-indexed dense matrix of word vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    vocab: Vocabulary,
    dims: usize,
    raw: Vec<f32>,
    norms: Vec<f64>,
    revision: u64,
}

impl EmbeddingModel {
    /// Build a model from a vocabulary and a row-major matrix.
    pub fn new(vocab: Vocabulary, dims: usize, raw: Vec<f32>) -> Result<Self> {
        if vocab.is_empty() || dims == 0 {
            return Err(Error::EmptyModel);
        }
        if raw.len() != vocab.len() * dims {
            return Err(Error::DimensionMismatch {
                expected: vocab.len() * dims,
                found: raw.len(),
            });
        }
        let mut norms = Vec::with_capacity(vocab.len());
        for (id, row) in raw.chunks_exact(dims).enumerate() {
            norms.push(checked_norm(row, vocab.word(id))?);
        }
        Ok(EmbeddingModel {
            vocab,
            dims,
            raw,
            norms,
            revision: 0,
        })
    }

    /// Convenience constructor from `(token, vector)` pairs.
    pub fn from_rows<S, I>(rows: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f32>)>,
    {
        let mut vocab = Vocabulary::new();
        let mut raw = Vec::new();
        let mut dims = None;
        for (token, vector) in rows {
            let expected = *dims.get_or_insert(vector.len());
            if vector.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: vector.len(),
                });
            }
            vocab.push(token.into())?;
            raw.extend_from_slice(&vector);
        }
        Self::new(vocab, dims.unwrap_or(0), raw)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// The whole row-major matrix.
    pub fn raw(&self) -> &[f32] {
        &self.raw
    }

    pub fn row(&self, id: usize) -> &[f32] {
        &self.raw[id * self.dims..(id + 1) * self.dims]
    }

    /// Cached Euclidean norm of a row.
    pub fn norm(&self, id: usize) -> f64 {
        self.norms[id]
    }

    /// The unit-normalized row, derived from the norm cache.
    pub fn unit_row(&self, id: usize) -> Vec<f64> {
        let norm = self.norms[id];
        self.row(id).iter().map(|&x| f64::from(x) / norm).collect()
    }

    /// Resolve a user-facing term to its row id.
    pub fn resolve(&self, term: &str) -> Result<usize> {
        self.vocab
            .resolve(term)
            .ok_or_else(|| Error::UnknownToken(term.to_string()))
    }

    /// A copy of the raw (unnormalized) vector for `term`.
    pub fn get_vector(&self, term: &str) -> Result<Vec<f32>> {
        let id = self.resolve(term)?;
        Ok(self.row(id).to_vec())
    }

    /// Replace the vector for `term`, returning the new revision.
    pub fn update_vector(&mut self, term: &str, vector: &[f32]) -> Result<u64> {
        let id = self.resolve(term)?;
        self.apply_rows(&[(id, vector.to_vec())])
    }

    /// Check that `updates` would be accepted by [`EmbeddingModel::apply_rows`],
    /// returning the new row norms.
    pub fn check_rows(&self, updates: &[(usize, Vec<f32>)]) -> Result<Vec<f64>> {
        let mut norms = Vec::with_capacity(updates.len());
        for (id, vector) in updates {
            let token = self
                .vocab
                .words
                .get(*id)
                .ok_or_else(|| Error::UnknownToken(format!("#{id}")))?;
            if vector.len() != self.dims {
                return Err(Error::DimensionMismatch {
                    expected: self.dims,
                    found: vector.len(),
                });
            }
            norms.push(checked_norm(vector, token)?);
        }
        Ok(norms)
    }

    /// Replace several rows as one mutation with a single revision bump.
    ///
    /// Every row is validated before anything is written, so an error leaves
    /// the model untouched.
    pub fn apply_rows(&mut self, updates: &[(usize, Vec<f32>)]) -> Result<u64> {
        let norms = self.check_rows(updates)?;
        for ((id, vector), norm) in updates.iter().zip(norms) {
            let start = id * self.dims;
            self.raw[start..start + self.dims].copy_from_slice(vector);
            self.norms[*id] = norm;
        }
        self.revision += 1;
        Ok(self.revision)
    }
}

fn checked_norm(row: &[f32], token: &str) -> Result<f64> {
    if row.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(token.to_string()));
    }
    let sq: f64 = row.iter().map(|&x| f64::from(x) * f64::from(x)).sum();
    if sq == 0.0 {
        return Err(Error::ZeroVector(token.to_string()));
    }
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> EmbeddingModel {
        EmbeddingModel::from_rows([
            ("king", vec![1.0, 0.0, 0.0]),
            ("queen", vec![0.0, 1.0, 0.0]),
            ("registered_nurse", vec![0.0, 0.0, 2.0]),
            ("Paris", vec![1.0, 1.0, 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn lookup_normalizes_spaces_and_case() {
        let m = toy();
        assert_eq!(m.resolve("registered nurse").unwrap(), 2);
        assert_eq!(m.resolve("KING").unwrap(), 0);
        assert_eq!(m.resolve("Paris").unwrap(), 3);
        assert!(matches!(m.resolve("paris"), Err(Error::UnknownToken(t)) if t == "paris"));
        assert!(matches!(m.get_vector("zzz_nonword"), Err(Error::UnknownToken(_))));
    }

    #[test]
    fn get_vector_returns_raw_row() {
        let m = toy();
        assert_eq!(m.get_vector("registered nurse").unwrap(), vec![0.0, 0.0, 2.0]);
        assert_eq!(m.norm(2), 2.0);
    }

    #[test]
    fn update_replaces_row_and_bumps_revision() {
        let mut m = toy();
        let rev = m.update_vector("king", &[3.0, 4.0, 0.0]).unwrap();
        assert_eq!(rev, 1);
        assert_eq!(m.get_vector("king").unwrap(), vec![3.0, 4.0, 0.0]);
        let unit = m.unit_row(0);
        assert!((unit[0] - 0.6).abs() < 1e-12 && (unit[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn update_errors_leave_model_untouched() {
        let mut m = toy();
        assert!(matches!(
            m.update_vector("king", &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(matches!(m.update_vector("king", &[0.0; 3]), Err(Error::ZeroVector(_))));
        assert!(matches!(
            m.apply_rows(&[(0, vec![1.0, 1.0, 1.0]), (1, vec![0.0; 3])]),
            Err(Error::ZeroVector(_))
        ));
        assert_eq!(m.revision(), 0);
        assert_eq!(m.row(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            EmbeddingModel::from_rows([("a", vec![1.0]), ("a", vec![2.0])]),
            Err(Error::DuplicateToken(_))
        ));
        assert!(matches!(
            EmbeddingModel::from_rows([("a b", vec![1.0])]),
            Err(Error::InvalidToken(_))
        ));
        assert!(matches!(
            EmbeddingModel::from_rows([("a", vec![0.0, 0.0])]),
            Err(Error::ZeroVector(_))
        ));
        assert!(matches!(
            EmbeddingModel::from_rows(Vec::<(String, Vec<f32>)>::new()),
            Err(Error::EmptyModel)
        ));
    }
}
