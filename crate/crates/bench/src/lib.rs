//! Fixture generation shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordrefit_core::EmbeddingModel;

/// A deterministic model of `n` words with uniform components in [-1, 1].
pub fn synthetic_model(n: usize, dims: usize, seed: u64) -> EmbeddingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n).map(|i| {
        let v: Vec<f32> = (0..dims).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        (format!("w{i:07}"), v)
    });
    EmbeddingModel::from_rows(rows).expect("synthetic rows are valid")
}

pub fn word(i: usize) -> String {
    format!("w{i:07}")
}
