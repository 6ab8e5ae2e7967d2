//! Planning and learning sweeps.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rankone_core::learning::{LearnOptions, LearnTrace, LearnerKind};
use rankone_core::planning::{optimal_q, optimal_value, Planner, SolveOptions, SolveTrace, StopRule};
use rankone_core::scalar::dist_inf;
use rankone_core::{Mdp, QFn, ValueFn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{stream_seed, BenchConfig};
use crate::error::{BenchError, Result};
use crate::output::{run_id, write_csv_file, write_records, ResultRow};
use crate::stats::quartiles;

/// Largest `‖T(v*) − v*‖_∞` accepted for a reference solution.
pub const REFERENCE_TOL: f64 = 1e-10;

/// Iterations-to-threshold quartiles over instances. Runs that hit the
/// iteration cap count as infinitely slow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanSummaryRow {
    pub env: String,
    pub gamma: f64,
    pub algo: String,
    pub metric: &'static str,
    pub threshold: f64,
    pub runs: usize,
    pub unreachable: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Final-error quartiles over instances and seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnSummaryRow {
    pub env: String,
    pub gamma: f64,
    pub algo: String,
    pub runs: usize,
    pub diverged: usize,
    pub value_q1: f64,
    pub value_median: f64,
    pub value_q3: f64,
    pub bellman_median: f64,
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub gamma: f64,
    pub algo: String,
    pub instance: usize,
    /// First iterate meeting the value threshold.
    pub to_value: Option<usize>,
    /// First iterate meeting the Bellman threshold.
    pub to_bellman: Option<usize>,
    pub trace: SolveTrace<f64>,
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub gamma: f64,
    pub algo: String,
    pub instance: usize,
    pub seed: usize,
    pub trace: LearnTrace<f64>,
}

#[derive(Debug, Clone)]
pub struct PlanReport {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<PlanSummaryRow>,
    pub runs: Vec<PlanOutcome>,
}

#[derive(Debug, Clone)]
pub struct LearnReport {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<LearnSummaryRow>,
    pub runs: Vec<LearnOutcome>,
}

impl PlanSummaryRow {
    fn matches(&self, gamma: f64, algo: &str, metric: &str) -> bool {
        self.gamma == gamma && self.algo == algo && self.metric == metric
    }
}

impl PlanReport {
    /// Median iterations to the `metric` ("value" or "bellman") threshold.
    pub fn median(&self, gamma: f64, algo: &str, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.matches(gamma, algo, metric))
            .map(|r| r.median)
    }
}

impl LearnReport {
    pub fn median_final_value_err(&self, gamma: f64, algo: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.gamma == gamma && r.algo == algo)
            .map(|r| r.value_median)
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))
}

fn parse_algos<A: FromStr<Err = rankone_core::Error>>(names: &[String]) -> Result<Vec<A>> {
    names
        .iter()
        .map(|s| A::from_str(s).map_err(|e| BenchError::Config(e.to_string())))
        .collect()
}

/// `v*` by policy iteration, checked to be a Bellman fixed point.
pub fn reference_value(mdp: &Mdp<f64>) -> Result<ValueFn<f64>> {
    let (v, _) = optimal_value(mdp)?;
    let residual = dist_inf(&mdp.bellman_optimality(&v)?.values, &v);
    if !(residual <= REFERENCE_TOL) {
        return Err(BenchError::InconsistentReference { residual });
    }
    Ok(v)
}

struct Model {
    gamma_index: usize,
    instance: usize,
    mdp: Mdp<f64>,
    v_star: ValueFn<f64>,
    q_star: Option<QFn<f64>>,
}

fn build_models(cfg: &BenchConfig, with_q: bool) -> Result<Vec<Model>> {
    let keys: Vec<(usize, usize)> = (0..cfg.gammas.len())
        .flat_map(|g| (0..cfg.instances).map(move |i| (g, i)))
        .collect();
    keys.par_iter()
        .map(|&(gamma_index, instance)| {
            let mdp = cfg.env.build(cfg.master_seed, instance, cfg.gammas[gamma_index])?;
            let v_star = reference_value(&mdp)?;
            let q_star = if with_q { Some(optimal_q(&mdp)?) } else { None };
            Ok(Model {
                gamma_index,
                instance,
                mdp,
                v_star,
                q_star,
            })
        })
        .collect()
}

/// Runs every planner on every `(instance, γ)` until both thresholds hold or
/// `max_iters` is reached.
pub fn run_planning_suite(cfg: &BenchConfig) -> Result<PlanReport> {
    cfg.validate()?;
    let planners: Vec<Planner> = parse_algos(&cfg.algos)?;
    let env = cfg.env.label();
    let pool = pool(cfg.threads)?;
    pool.install(|| {
        let models = build_models(cfg, false)?;
        let jobs: Vec<(&Model, Planner)> = models
            .iter()
            .flat_map(|m| planners.iter().map(move |&p| (m, p)))
            .collect();
        let mut runs: Vec<PlanOutcome> = jobs
            .par_iter()
            .map(|&(model, planner)| {
                let th = cfg.thresholds_for(model.gamma_index);
                let stop = StopRule::new(Some(th.bellman), Some(th.value), cfg.max_iters);
                let opts = SolveOptions {
                    policy_value: cfg.policy_value,
                    ..SolveOptions::with_reference(&model.v_star)
                };
                let v0 = vec![0.0; model.mdp.n()];
                let trace = planner.run(&model.mdp, &v0, &stop, &opts)?;
                Ok(PlanOutcome {
                    gamma: cfg.gammas[model.gamma_index],
                    algo: planner.name(),
                    instance: model.instance,
                    to_value: trace.first_value_below(th.value),
                    to_bellman: trace.first_bellman_below(th.bellman),
                    trace,
                })
            })
            .collect::<Result<_>>()?;
        runs.sort_by(|a, b| {
            (a.gamma, &a.algo, a.instance)
                .partial_cmp(&(b.gamma, &b.algo, b.instance))
                .unwrap()
        });

        let mut rows = Vec::new();
        for r in &runs {
            let id = run_id(env, r.gamma, &r.algo, r.instance, 0);
            for (k, rec) in r.trace.records.iter().enumerate() {
                rows.push(ResultRow {
                    run_id: id.clone(),
                    env: env.into(),
                    gamma: r.gamma,
                    algo: r.algo.clone(),
                    instance: r.instance,
                    seed: 0,
                    iteration: k,
                    bellman_err: rec.bellman_err,
                    value_err: rec.value_err,
                    policy_value_err: rec.policy_value_err,
                    wallclock_ns: rec.wallclock_ns,
                });
            }
        }

        let mut summary = Vec::new();
        for (gi, &gamma) in cfg.gammas.iter().enumerate() {
            let th = cfg.thresholds_for(gi);
            for p in &planners {
                let name = p.name();
                let group: Vec<&PlanOutcome> =
                    runs.iter().filter(|r| r.gamma == gamma && r.algo == name).collect();
                for (metric, threshold) in [("value", th.value), ("bellman", th.bellman)] {
                    let counts: Vec<f64> = group
                        .iter()
                        .map(|r| {
                            let hit = if metric == "value" { r.to_value } else { r.to_bellman };
                            hit.map_or(f64::INFINITY, |k| k as f64)
                        })
                        .collect();
                    let q = quartiles(&counts)?;
                    summary.push(PlanSummaryRow {
                        env: env.into(),
                        gamma,
                        algo: name.clone(),
                        metric,
                        threshold,
                        runs: counts.len(),
                        unreachable: counts.iter().filter(|c| c.is_infinite()).count(),
                        q1: q.q1,
                        median: q.median,
                        q3: q.q3,
                    });
                }
            }
        }
        Ok(PlanReport { rows, summary, runs })
    })
}

/// Runs every learner for `iters` rounds on every `(instance, seed, γ)`;
/// learners on the same `(instance, seed)` share one sample stream.
pub fn run_learning_suite(cfg: &BenchConfig) -> Result<LearnReport> {
    cfg.validate()?;
    let learners: Vec<LearnerKind> = parse_algos(&cfg.algos)?;
    let env = cfg.env.label();
    let pool = pool(cfg.threads)?;
    pool.install(|| {
        let models = build_models(cfg, true)?;
        let mut jobs: Vec<(&Model, usize, LearnerKind)> = Vec::new();
        for m in &models {
            for s in 0..cfg.seeds {
                jobs.extend(learners.iter().map(|&l| (m, s, l)));
            }
        }
        let mut runs: Vec<LearnOutcome> = jobs
            .par_iter()
            .map(|&(model, seed, learner)| {
                let opts = LearnOptions {
                    reference_q: model.q_star.as_deref(),
                    reference_v: Some(&model.v_star),
                    policy_value: cfg.policy_value,
                    record_iterates: false,
                    eval_every: cfg.eval_every,
                };
                let q0 = vec![0.0; model.mdp.n() * model.mdp.m()];
                let stream = stream_seed(cfg.master_seed, model.instance, seed);
                let trace = learner.run(&model.mdp, &q0, stream, cfg.iters, &opts)?;
                Ok(LearnOutcome {
                    gamma: cfg.gammas[model.gamma_index],
                    algo: learner.name().into(),
                    instance: model.instance,
                    seed,
                    trace,
                })
            })
            .collect::<Result<_>>()?;
        runs.sort_by(|a, b| {
            (a.gamma, &a.algo, a.instance, a.seed)
                .partial_cmp(&(b.gamma, &b.algo, b.instance, b.seed))
                .unwrap()
        });

        let mut rows = Vec::new();
        for r in &runs {
            let id = run_id(env, r.gamma, &r.algo, r.instance, r.seed);
            for rec in &r.trace.records {
                rows.push(ResultRow {
                    run_id: id.clone(),
                    env: env.into(),
                    gamma: r.gamma,
                    algo: r.algo.clone(),
                    instance: r.instance,
                    seed: r.seed,
                    iteration: rec.iteration,
                    bellman_err: rec.bellman_err,
                    value_err: rec.value_err,
                    policy_value_err: rec.policy_value_err,
                    wallclock_ns: rec.wallclock_ns,
                });
            }
        }

        let mut summary = Vec::new();
        for &gamma in &cfg.gammas {
            for l in &learners {
                let group: Vec<&LearnOutcome> =
                    runs.iter().filter(|r| r.gamma == gamma && r.algo == l.name()).collect();
                let final_of = |f: fn(&LearnOutcome) -> Option<f64>| -> Vec<f64> {
                    group.iter().map(|r| f(r).unwrap_or(f64::INFINITY)).collect()
                };
                let value = quartiles(&final_of(|r| {
                    if r.trace.diverged {
                        None
                    } else {
                        r.trace.records.last().and_then(|x| x.value_err)
                    }
                }))?;
                let bellman = quartiles(&final_of(|r| {
                    if r.trace.diverged {
                        None
                    } else {
                        r.trace.records.last().map(|x| x.bellman_err)
                    }
                }))?;
                summary.push(LearnSummaryRow {
                    env: env.into(),
                    gamma,
                    algo: l.name().into(),
                    runs: group.len(),
                    diverged: group.iter().filter(|r| r.trace.diverged).count(),
                    value_q1: value.q1,
                    value_median: value.median,
                    value_q3: value.q3,
                    bellman_median: bellman.median,
                });
            }
        }
        Ok(LearnReport { rows, summary, runs })
    })
}

/// `plan.csv` → `plan.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

/// Writes the per-iteration rows to `out` and the summary next to it.
pub fn write_report<S: Serialize>(out: &Path, rows: &[ResultRow], summary: &[S]) -> Result<()> {
    write_csv_file(out, rows)?;
    let file = std::io::BufWriter::new(std::fs::File::create(summary_path(out))?);
    write_records(file, summary)
}
