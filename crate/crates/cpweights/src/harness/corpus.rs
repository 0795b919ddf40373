//! Seeded generators and fixed input corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::StepFunction1D;
use crate::error::Result;
use crate::geometry::{Cube, OpenSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonnegative step function with 1..=max_pieces pieces starting in [lo, hi).
pub fn random_step(rng: &mut ChaCha8Rng, max_pieces: usize, lo: f64, hi: f64) -> Result<StepFunction1D> {
    let n = rng.random_range(1..=max_pieces);
    let pieces: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            let a = rng.random_range(lo..hi);
            (a, a + rng.random_range(0.01..3.0), rng.random_range(0.5..4.0))
        })
        .collect();
    StepFunction1D::from_pieces(&pieces)
}

/// Union of 1..=5 random intervals in [-10, 10].
pub fn random_open_set_1d(rng: &mut ChaCha8Rng) -> Result<OpenSet> {
    let n = rng.random_range(1..=5);
    let iv: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let a = rng.random_range(-10.0..10.0);
            (a, a + rng.random_range(0.01..3.0))
        })
        .collect();
    OpenSet::intervals(&iv)
}

/// Random intervals with log-uniform sides in `[scale_min, scale_max]`.
pub fn random_menu(rng: &mut ChaCha8Rng, count: usize, scale_min: f64, scale_max: f64) -> Result<Vec<Cube>> {
    let (l0, l1) = (scale_min.log2(), scale_max.log2());
    (0..count)
        .map(|_| {
            let side = if l1 > l0 { rng.random_range(l0..l1).exp2() } else { scale_min };
            let a = rng.random_range(-8.0..8.0);
            Cube::interval(a, a + side)
        })
        .collect()
}

pub const CF_CORPUS_SEED: u64 = 20;

/// The fixed 20-function corpus of the Coifman–Fefferman sweep.
pub fn cf_corpus() -> Vec<StepFunction1D> {
    let mut r = rng(CF_CORPUS_SEED);
    (0..20)
        .map(|i| {
            let n = 1 + i % 3;
            let pieces: Vec<(f64, f64, f64)> = (0..n)
                .map(|_| {
                    let a = r.random_range(-6.0..6.0);
                    (a, a + r.random_range(0.01..3.0), r.random_range(0.5..4.0))
                })
                .collect();
            StepFunction1D::from_pieces(&pieces).expect("corpus pieces are valid")
        })
        .collect()
}
