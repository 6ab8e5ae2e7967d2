//! Counter-based sampling of next states.
//!
//! The uniform variate for state-action pair `i` in round `k` under master
//! seed `seed` is word `i` of ChaCha8 stream `k` keyed by `seed`, so the
//! table of a round never depends on which algorithm, thread or earlier round
//! asked for it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mdp::Mdp;
use crate::scalar::Scalar;

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Generator positioned at the start of round `round` for `seed`.
fn round_stream(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng.set_word_pos(0);
    rng
}

/// The uniform variate keyed by `(seed, round, index)`.
pub fn keyed_uniform(seed: u64, round: u64, index: u64) -> f64 {
    let mut rng = round_stream(seed, round);
    // One u64 consumes two 32-bit words.
    rng.set_word_pos(2 * index as u128);
    unit_f64(rng.next_u64())
}

/// Inverse-CDF draw from a probability row.
pub fn inverse_cdf<T: Scalar>(row: &[T], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (j, &p) in row.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            cum += p;
            last_positive = j;
            if u < cum {
                return j;
            }
        }
    }
    // Rows summing to slightly less than one.
    last_positive
}

/// One synchronous round of next-state samples, one per state-action pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleTable {
    /// `ŝ⁺` for every pair, flat index `s * m + a`.
    pub next_state: Vec<usize>,
    pub round: u64,
    pub seed: u64,
}

impl SampleTable {
    /// FNV-1a digest of the sampled states.
    pub fn digest(&self) -> u64 {
        crate::fnv1a(self.next_state.iter().map(|&s| s as u64))
    }
}

/// Deterministic sample table for round `round` under `seed`.
pub fn draw_sample_table<T: Scalar>(mdp: &Mdp<T>, round: u64, seed: u64) -> SampleTable {
    let (n, m) = (mdp.n(), mdp.m());
    let mut rng = round_stream(seed, round);
    let next_state = (0..n * m)
        .map(|i| {
            let u = unit_f64(rng.next_u64());
            inverse_cdf(mdp.kernel_row(i / m, i % m), u)
        })
        .collect();
    SampleTable {
        next_state,
        round,
        seed,
    }
}
