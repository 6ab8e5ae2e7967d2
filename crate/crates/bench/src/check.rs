//! Invariant checks runnable from the command line on freshly generated
//! models.

use rankone_core::envs::{gen_garnet, GarnetSpec};
use rankone_core::learning::{empirical_bellman, run_ql, run_r1ql, LearnOptions, StepSchedule};
use rankone_core::planning::{run_mpi, run_r1vi, run_vi, RankOneConfig, SolveOptions, StopRule};
use rankone_core::rank_one::{power_step, rank_one_correct};
use rankone_core::sampling::draw_sample_table;
use rankone_core::scalar::{dist_inf, shift_spread};
use rankone_core::{DenseMatrix, DistVec, Mdp};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Small dense random model keyed by `seed`.
fn model(seed: u64) -> Result<Mdp<f64>> {
    let n = 2 + (seed % 9) as usize;
    let m = 1 + (seed % 4) as usize;
    let gamma = 0.5 + 0.49 * ((seed * 37 % 100) as f64 / 100.0);
    Ok(gen_garnet(&GarnetSpec { n, m, branching: n, seed }, gamma)?)
}

fn probe(len: usize, seed: u64) -> Vec<f64> {
    (0..len).map(|i| ((i as f64 + 1.0) * (seed as f64 + 0.5)).sin() * 5.0).collect()
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.3e} (tolerance {tol:e})"),
    }
}

fn operator_shifts(models: &[Mdp<f64>]) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for (i, mdp) in models.iter().enumerate() {
        let g = mdp.gamma();
        let alpha = 3.25;
        let v = probe(mdp.n(), i as u64);
        let tv = mdp.bellman_optimality(&v)?.values;
        let ts = mdp.bellman_optimality(&v.iter().map(|x| x + alpha).collect::<Vec<_>>())?.values;
        worst = worst.max(tv.iter().zip(ts.iter()).map(|(a, b)| (b - a - g * alpha).abs()).fold(0.0, f64::max));
        let q = probe(mdp.n() * mdp.m(), i as u64 + 1);
        let qs: Vec<f64> = q.iter().map(|x| x + alpha).collect();
        let table = draw_sample_table(mdp, i as u64, 1);
        let a = empirical_bellman(mdp, &q, &table)?;
        let b = empirical_bellman(mdp, &qs, &table)?;
        worst = worst.max(a.iter().zip(b.iter()).map(|(x, y)| (y - x - g * alpha).abs()).fold(0.0, f64::max));
    }
    Ok(outcome("operator shift equivariance", worst, 1e-12))
}

fn contraction(models: &[Mdp<f64>]) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for (i, mdp) in models.iter().enumerate() {
        let u = probe(mdp.n(), 2 * i as u64);
        let w = probe(mdp.n(), 2 * i as u64 + 1);
        let tu = mdp.bellman_optimality(&u)?.values;
        let tw = mdp.bellman_optimality(&w)?.values;
        worst = worst.max(dist_inf(&tu, &tw) - mdp.gamma() * dist_inf(&u, &w));
    }
    Ok(outcome("contraction", worst, 1e-12))
}

fn woodbury() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let n = 1 + (seed % 12) as usize;
        let d = DistVec::normalized(probe(n, seed).iter().map(|x| x.abs() + 0.01).collect())?;
        let r = probe(n, seed + 7);
        let gamma = 0.99 * (seed as f64 / 100.0);
        let mut a = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] -= gamma * d.as_slice()[j];
            }
        }
        let dense = a.solve(&r)?;
        worst = worst.max(dist_inf(&dense, &rank_one_correct(&d, gamma, &r)?));
    }
    Ok(outcome("woodbury identity", worst, 1e-10))
}

fn simplex(models: &[Mdp<f64>]) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for mdp in models {
        let chain = mdp.induced_chain(&mdp.greedy_policy(&vec![0.0; mdp.n()])?)?;
        let mut d = DistVec::uniform(mdp.n());
        for _ in 0..20 {
            d = power_step(&chain.p_state, &d)?;
            let s: f64 = d.as_slice().iter().sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    Ok(outcome("power step simplex preservation", worst, 1e-10))
}

fn planning_shift(models: &[Mdp<f64>]) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    let mut policies_agree = true;
    let opts = SolveOptions {
        record_iterates: true,
        ..SolveOptions::default()
    };
    for mdp in models.iter().take(10) {
        let v0 = vec![0.0; mdp.n()];
        let stop = StopRule::iterations(200);
        let vi = run_vi(mdp, &v0, &stop, &opts)?;
        let r1 = run_r1vi(mdp, &v0, &RankOneConfig::default(), &stop, &opts)?;
        for (a, b) in r1.iterates.iter().zip(&vi.iterates) {
            let scale = 1.0 + b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            worst = worst.max(shift_spread(a, b) / scale);
        }
        policies_agree &= r1
            .records
            .iter()
            .zip(&vi.records)
            .all(|(a, b)| a.policy_fingerprint == b.policy_fingerprint);
    }
    let mut o = outcome("rank-one planning shift equivalence", worst, 1e-9);
    o.passed &= policies_agree;
    Ok(o)
}

fn learning_shift(models: &[Mdp<f64>]) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    let opts = LearnOptions {
        record_iterates: true,
        ..LearnOptions::default()
    };
    for (i, mdp) in models.iter().take(10).enumerate() {
        let q0 = vec![0.0; mdp.n() * mdp.m()];
        let ql = run_ql(mdp, &q0, StepSchedule::Linear, i as u64, 500, &opts)?;
        let r1 = run_r1ql(mdp, &q0, None, StepSchedule::Linear, i as u64, 500, &opts)?;
        for (a, b) in r1.iterates.iter().zip(&ql.iterates) {
            let scale = 1.0 + b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            worst = worst.max(shift_spread(a, b) / scale);
        }
    }
    Ok(outcome("rank-one learning shift equivalence", worst, 1e-9))
}

fn reductions(models: &[Mdp<f64>]) -> Result<CheckOutcome> {
    let opts = SolveOptions {
        record_iterates: true,
        ..SolveOptions::default()
    };
    let mut mismatches = 0usize;
    for mdp in models.iter().take(10) {
        let v0 = vec![0.0; mdp.n()];
        let stop = StopRule::iterations(50);
        mismatches += usize::from(run_vi(mdp, &v0, &stop, &opts)?.iterates != run_mpi(mdp, &v0, 0, false, &stop, &opts)?.iterates);
        mismatches += usize::from(
            run_r1vi(mdp, &v0, &RankOneConfig::default(), &stop, &opts)?.iterates
                != run_mpi(mdp, &v0, 0, true, &stop, &opts)?.iterates,
        );
    }
    Ok(CheckOutcome {
        name: "order-zero reductions",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatching runs"),
    })
}

/// Runs every check on 100 generated models.
pub fn run_checks() -> Result<Vec<CheckOutcome>> {
    let models = (0..100).map(model).collect::<Result<Vec<_>>>()?;
    Ok(vec![
        contraction(&models)?,
        operator_shifts(&models)?,
        woodbury()?,
        simplex(&models)?,
        planning_shift(&models)?,
        learning_shift(&models)?,
        reductions(&models)?,
    ])
}
