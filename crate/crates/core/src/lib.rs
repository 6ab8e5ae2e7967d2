//! Tabular discounted MDP solvers.
//!
//! Planning (model-based): value iteration, policy iteration, modified policy
//! iteration, rank-one value iteration, Nesterov- and Anderson-accelerated
//! value iteration. Learning (synchronous, sample-based): Q-learning, Speedy
//! Q-learning, Zap Q-learning, rank-one Q-learning. Plus the Garnet, Graph
//! and Gridworld benchmark generators.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod envs;
pub mod error;
pub mod learning;
pub mod linalg;
pub mod mdp;
pub mod planning;
pub mod rank_one;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use mdp::{Backup, InducedChain, IterateErrors, Mdp, Policy, QFn, ValueFn};
pub use rank_one::DistVec;
pub use scalar::Scalar;

pub type Mdp64 = Mdp<f64>;
pub type Mdp32 = Mdp<f32>;
pub type ValueFn64 = ValueFn<f64>;
pub type QFn64 = QFn<f64>;
pub type DistVec64 = DistVec<f64>;
pub type SolveTrace64 = planning::SolveTrace<f64>;
pub type LearnTrace64 = learning::LearnTrace<f64>;

/// 64-bit FNV-1a over a sequence of words (little-endian bytes).
pub fn fnv1a(words: impl IntoIterator<Item = u64>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}
