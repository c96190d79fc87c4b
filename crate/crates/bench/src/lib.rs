//! Seeded inputs shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rowball_core::{sample, AutElement, RowTuple, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random strict row contraction of norm 0.9.
pub fn strict_tuple(n: usize, d: usize, seed: u64) -> RowTuple {
    sample::random_row_contraction(n, d, 0.9, &mut rng(seed))
}

/// A random automorphism whose point has norm `radius`.
pub fn automorphism(n: usize, radius: f64, seed: u64) -> AutElement {
    let mut r = rng(seed);
    let u = sample::random_unitary(n, &mut r);
    let raw = sample::ginibre(n, 1, &mut r);
    let scale = radius / raw.norm();
    let lambda: Vec<C64> = raw.iter().map(|z| z * scale).collect();
    AutElement::new(u, lambda).expect("point lies inside the ball")
}
