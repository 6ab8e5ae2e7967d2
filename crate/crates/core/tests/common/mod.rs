#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankone_core::{DenseMatrix, Mdp};

/// Dense random model: every kernel entry positive, costs in `[0, 1)`.
pub fn random_mdp(seed: u64, n: usize, m: usize, gamma: f64) -> Mdp<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kernel = Vec::with_capacity(n * m * n);
    for _ in 0..n * m {
        let row: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let s: f64 = row.iter().sum();
        kernel.extend(row.into_iter().map(|p| p / s));
    }
    let cost = (0..n * m).map(|_| rng.gen::<f64>()).collect();
    Mdp::with_renormalized_rows(n, m, kernel, cost, gamma).unwrap()
}

/// Random model with sizes and discount drawn from `seed` as well.
pub fn random_sized_mdp(seed: u64, max_n: usize, max_m: usize) -> Mdp<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let gamma = rng.gen_range(0.5..0.99);
    random_mdp(seed, n, m, gamma)
}

/// Model whose kernel rows are point masses.
pub fn deterministic_mdp(seed: u64, n: usize, m: usize, gamma: f64) -> Mdp<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kernel = vec![0.0; n * m * n];
    for row in kernel.chunks_exact_mut(n) {
        row[rng.gen_range(0..n)] = 1.0;
    }
    let cost = (0..n * m).map(|_| rng.gen::<f64>()).collect();
    Mdp::new(n, m, kernel, cost, gamma).unwrap()
}

/// Random row-stochastic matrix with strictly positive entries.
pub fn random_stochastic(seed: u64, n: usize) -> DenseMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-2).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|p| p / s).collect()
        })
        .collect();
    DenseMatrix::from_rows(&rows).unwrap()
}

pub fn random_simplex(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = r.iter().sum();
    r.into_iter().map(|p| p / s).collect()
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// `(mean, max − min)` of `x − y`.
pub fn shift_of(x: &[f64], y: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (d.iter().sum::<f64>() / d.len() as f64, hi - lo)
}
