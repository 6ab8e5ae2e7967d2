//! Quantile summaries.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::output::ResultRow;

/// First quartile, median and third quartile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Quantile `p ∈ [0, 1]` by linear interpolation between order statistics:
/// position `p (n − 1)` in the sorted sample. Infinite entries are allowed
/// and propagate to any quantile that touches them.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(BenchError::EmptyGroup);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || frac == 0.0 {
        return Ok(v[lo]);
    }
    if v[hi].is_infinite() {
        return Ok(v[hi]);
    }
    Ok(v[lo] + frac * (v[hi] - v[lo]))
}

pub fn quartiles(values: &[f64]) -> Result<Quartiles> {
    Ok(Quartiles {
        q1: quantile(values, 0.25)?,
        median: quantile(values, 0.5)?,
        q3: quantile(values, 0.75)?,
    })
}

/// Quartiles of one metric over the runs of an `(env, γ, algo, iteration)` group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRow {
    pub env: String,
    pub gamma: f64,
    pub algo: String,
    pub iteration: usize,
    pub metric: &'static str,
    pub count: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Groups rows by `(env, γ, algo, iteration)` and summarizes the Bellman and
/// value errors of each group.
pub fn aggregate_quantiles(rows: &[ResultRow]) -> Result<Vec<QuantileRow>> {
    if rows.is_empty() {
        return Err(BenchError::EmptyGroup);
    }
    type Key = (String, u64, String, usize);
    let mut groups: BTreeMap<Key, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let g = groups
            .entry((r.env.clone(), r.gamma.to_bits(), r.algo.clone(), r.iteration))
            .or_default();
        g.0.push(r.bellman_err);
        if let Some(v) = r.value_err {
            g.1.push(v);
        }
    }
    let mut out = Vec::new();
    for ((env, gamma, algo, iteration), (bellman, value)) in groups {
        for (metric, xs) in [("bellman_err", bellman), ("value_err", value)] {
            if xs.is_empty() {
                continue;
            }
            let q = quartiles(&xs)?;
            out.push(QuantileRow {
                env: env.clone(),
                gamma: f64::from_bits(gamma),
                algo: algo.clone(),
                iteration,
                metric,
                count: xs.len(),
                q1: q.q1,
                median: q.median,
                q3: q.q3,
            });
        }
    }
    Ok(out)
}
