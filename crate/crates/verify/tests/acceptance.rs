//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! and then asserts. Tests take a shared lock so runtimes are measured one
//! at a time.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankone_bench::config::{BenchConfig, EnvSpec, GAMMA_COLUMNS};
use rankone_bench::suite::reference_value;
use rankone_bench::{run_learning_suite, run_planning_suite, write_csv, ResultRow};
use rankone_core::envs::{gen_graph, gen_gridworld, GridworldSpec, GridworldVariant};
use rankone_core::learning::{empirical_bellman, run_ql, run_r1ql, LearnOptions, LearnerKind, StepSchedule};
use rankone_core::mdp::greedy_policy_q;
use rankone_core::planning::{
    optimal_q, run_mpi, run_r1vi, run_vi, RankOneConfig, SolveOptions, SolveTrace, StopRule,
};
use rankone_core::rank_one::{deflate, exact_stationary, rank_one_correct, second_eigenvalue_modulus, spectral_radius};
use rankone_core::sampling::draw_sample_table;
use rankone_core::scalar::{dist_inf, norm_inf, shift_spread};
use rankone_core::{DistVec, Mdp};

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: &str, passed: bool, detail: &str, elapsed: Duration) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{tag} criterion {id}: {detail} [{:.1}s]", elapsed.as_secs_f64());
}

fn finish(id: &str, passed: bool, detail: String, start: Instant) {
    report(id, passed, &detail, start.elapsed());
    assert!(passed, "criterion {id}: {detail}");
}

/// Dense random model with every kernel entry positive.
fn random_mdp(rng: &mut ChaCha8Rng, n: usize, m: usize, gamma: f64) -> Mdp<f64> {
    let mut kernel = Vec::with_capacity(n * m * n);
    for _ in 0..n * m {
        let row: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let s: f64 = row.iter().sum();
        kernel.extend(row.into_iter().map(|p| p / s));
    }
    let cost = (0..n * m).map(|_| rng.gen::<f64>()).collect();
    Mdp::with_renormalized_rows(n, m, kernel, cost, gamma).unwrap()
}

fn random_sized(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Mdp<f64> {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let gamma = rng.gen_range(0.5..=0.99);
    random_mdp(rng, n, m, gamma)
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| (rng.gen::<f64>() - 0.5) * scale).collect()
}

fn random_simplex(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn garnet() -> EnvSpec {
    EnvSpec::Garnet { n: 200, m: 5, branching: 10 }
}

const MASTER_SEED: u64 = 2024;

#[test]
fn criterion_01_lemma_properties() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut shift, mut contraction, mut woodbury, mut spectral) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut ergodic_cases = 0;
    for _ in 0..100 {
        let mdp = random_sized(&mut rng, 20, 4);
        let (n, m, g) = (mdp.n(), mdp.m(), mdp.gamma());

        let alpha = rng.gen_range(-10.0..10.0);
        let v = random_vec(&mut rng, n, 10.0);
        let tv = mdp.bellman_optimality(&v).unwrap().values;
        let ts = mdp.bellman_optimality(&v.iter().map(|x| x + alpha).collect::<Vec<_>>()).unwrap().values;
        shift = shift.max(tv.iter().zip(ts.iter()).map(|(a, b)| (b - a - g * alpha).abs()).fold(0.0, f64::max));
        let q = random_vec(&mut rng, n * m, 10.0);
        let qs: Vec<f64> = q.iter().map(|x| x + alpha).collect();
        let table = draw_sample_table(&mdp, rng.gen_range(0..1000), rng.gen());
        let a = empirical_bellman(&mdp, &q, &table).unwrap();
        let b = empirical_bellman(&mdp, &qs, &table).unwrap();
        shift = shift.max(a.iter().zip(b.iter()).map(|(x, y)| (y - x - g * alpha).abs()).fold(0.0, f64::max));

        let w = random_vec(&mut rng, n, 10.0);
        let tw = mdp.bellman_optimality(&w).unwrap().values;
        contraction = contraction.max(dist_inf(&tv, &tw) - g * dist_inf(&v, &w));

        let d = DistVec::new(random_simplex(&mut rng, n)).unwrap();
        let r = random_vec(&mut rng, n, 10.0);
        let x = rank_one_correct(&d, g, &r).unwrap();
        // Residual of (I − γ 1 dᵀ) x = r.
        let dx: f64 = d.as_slice().iter().zip(&x).map(|(a, b)| a * b).sum();
        woodbury = woodbury.max(x.iter().zip(&r).map(|(xi, ri)| (xi - g * dx - ri).abs()).fold(0.0, f64::max));

        if n >= 2 && n <= 8 {
            // Strictly positive kernel: every induced chain is ergodic.
            let pi = mdp.greedy_policy(&v).unwrap();
            let p = mdp.induced_chain(&pi).unwrap().p_state;
            let stat = exact_stationary(&p).unwrap();
            let rho = spectral_radius(&deflate(&p, stat.as_slice())).unwrap();
            let lam2 = second_eigenvalue_modulus(&p).unwrap();
            spectral = spectral.max((rho - lam2).abs());
            ergodic_cases += 1;
        }
    }
    let elapsed = start.elapsed();
    let passed = shift <= 1e-12
        && contraction <= 1e-12
        && woodbury <= 1e-10
        && spectral <= 1e-8
        && ergodic_cases > 0
        && elapsed < Duration::from_secs(10);
    finish(
        "1",
        passed,
        format!(
            "shift {shift:.2e} ≤ 1e-12, contraction excess {contraction:.2e} ≤ 1e-12, woodbury {woodbury:.2e} ≤ 1e-10, \
             spectral gap {spectral:.2e} ≤ 1e-8 on {ergodic_cases} chains, runtime < 10 s"
        ),
        start,
    );
}

fn recorded_plan() -> SolveOptions<'static, f64> {
    SolveOptions { record_iterates: true, ..SolveOptions::default() }
}

fn recorded_learn() -> LearnOptions<'static, f64> {
    LearnOptions { record_iterates: true, ..LearnOptions::default() }
}

fn scale_of(v: &[f64]) -> f64 {
    1.0 + norm_inf(v)
}

fn mean_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x - y).sum::<f64>() / a.len() as f64
}

#[test]
fn criterion_02_constant_shift_equivalence() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut spread_plan, mut beta_plan, mut spread_learn, mut beta_learn) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..10u64 {
        let mdp = random_sized(&mut rng, 20, 4);
        let g = mdp.gamma();
        let v0 = vec![0.0; mdp.n()];
        let stop = StopRule::iterations(200);
        let vi = run_vi(&mdp, &v0, &stop, &recorded_plan()).unwrap();
        let r1 = run_r1vi(&mdp, &v0, &RankOneConfig::default(), &stop, &recorded_plan()).unwrap();
        let mut prev = 0.0;
        for (k, (a, b)) in r1.iterates.iter().zip(&vi.iterates).enumerate() {
            let s = scale_of(b);
            spread_plan = spread_plan.max(shift_spread(a, b) / s);
            let beta = mean_diff(a, b);
            if k > 0 {
                beta_plan = beta_plan.max((beta - (g * prev + r1.corrections[k - 1])).abs() / s);
            }
            prev = beta;
        }

        let q0 = vec![0.0; mdp.n() * mdp.m()];
        let ql = run_ql(&mdp, &q0, StepSchedule::Linear, i, 2000, &recorded_learn()).unwrap();
        let rq = run_r1ql(&mdp, &q0, None, StepSchedule::Linear, i, 2000, &recorded_learn()).unwrap();
        let mut prev = 0.0;
        for (k, (a, b)) in rq.iterates.iter().zip(&ql.iterates).enumerate() {
            let s = scale_of(b);
            spread_learn = spread_learn.max(shift_spread(a, b) / s);
            let beta = mean_diff(a, b);
            if k > 0 {
                let lam = StepSchedule::Linear.step::<f64>(k - 1);
                let predicted = (1.0 - lam) * prev + g * lam * prev + rq.corrections[k - 1];
                beta_learn = beta_learn.max((beta - predicted).abs() / s);
            }
            prev = beta;
        }
    }
    let passed = spread_plan <= 1e-9
        && beta_plan <= 1e-9
        && spread_learn <= 1e-9
        && beta_learn <= 1e-9
        && start.elapsed() < Duration::from_secs(30);
    finish(
        "2",
        passed,
        format!(
            "planning spread {spread_plan:.2e}, β residual {beta_plan:.2e}; learning spread {spread_learn:.2e}, \
             β residual {beta_learn:.2e} (all ≤ 1e-9), runtime < 30 s"
        ),
        start,
    );
}

#[test]
fn criterion_03_greedy_policy_identity() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0usize;
    let mut compared = 0usize;
    for i in 0..10u64 {
        let mdp = random_sized(&mut rng, 20, 4);
        let v0 = vec![0.0; mdp.n()];
        let stop = StopRule::iterations(200);
        let vi = run_vi(&mdp, &v0, &stop, &recorded_plan()).unwrap();
        let r1 = run_r1vi(&mdp, &v0, &RankOneConfig::default(), &stop, &recorded_plan()).unwrap();
        for (a, b) in r1.iterates.iter().zip(&vi.iterates) {
            compared += 1;
            mismatches += usize::from(mdp.greedy_policy(a).unwrap() != mdp.greedy_policy(b).unwrap());
        }
        let q0 = vec![0.0; mdp.n() * mdp.m()];
        let ql = run_ql(&mdp, &q0, StepSchedule::Linear, i, 2000, &recorded_learn()).unwrap();
        let rq = run_r1ql(&mdp, &q0, None, StepSchedule::Linear, i, 2000, &recorded_learn()).unwrap();
        for (a, b) in rq.iterates.iter().zip(&ql.iterates) {
            compared += 1;
            mismatches += usize::from(greedy_policy_q(a, mdp.m()).unwrap() != greedy_policy_q(b, mdp.m()).unwrap());
        }
    }
    finish("3", mismatches == 0, format!("{mismatches} of {compared} iterate pairs with differing greedy policies"), start);
}

#[test]
fn criterion_04_rank_one_error_bound() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let gamma = 0.99;
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0usize;
    for instance in 0..25 {
        let mdp = garnet().build(MASTER_SEED, instance, gamma).unwrap();
        let vs = reference_value(&mdp).unwrap();
        let v0 = vec![0.0; mdp.n()];
        let t0 = mdp.bellman_optimality(&v0).unwrap().values;
        let c = dist_inf(&v0, &vs) + dist_inf(&t0, &v0) / (1.0 - gamma);
        let trace = run_r1vi(&mdp, &v0, &RankOneConfig::default(), &StopRule::iterations(500), &SolveOptions::with_reference(&vs))
            .unwrap();
        for (k, r) in trace.records.iter().enumerate() {
            // Rounding in v* and the iterate is ~1e-13 at these magnitudes.
            worst = worst.max(r.value_err.unwrap() - gamma.powi(k as i32) * c - 1e-10);
            checked += 1;
        }
    }
    let passed = worst <= 0.0 && start.elapsed() < Duration::from_secs(120);
    finish("4", passed, format!("max excess over the bound {worst:.2e} across {checked} iterates, runtime < 2 min"), start);
}

#[test]
fn criterion_05_planning_iteration_ordering() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = BenchConfig {
        env: garnet(),
        gammas: GAMMA_COLUMNS.to_vec(),
        instances: 25,
        algos: ["vi", "pi", "r1vi", "nesterov", "anderson"].map(String::from).to_vec(),
        master_seed: MASTER_SEED,
        threads: 1,
        ..BenchConfig::default()
    };
    let rep = run_planning_suite(&cfg).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for &g in &GAMMA_COLUMNS {
        for metric in ["value", "bellman"] {
            let med = |a: &str| rep.median(g, a, metric).unwrap();
            let (pi, r1, vi, ne, an) = (med("pi"), med("r1vi"), med("vi"), med("nesterov"), med("anderson"));
            detail.push(format!("γ={g} {metric}: pi {pi} r1vi {r1} vi {vi} nesterov {ne} anderson {an}"));
            if g >= 0.99 {
                ok &= pi <= r1 && r1 < vi.min(ne).min(an);
            }
        }
    }
    for d in &detail {
        let _ = writeln!(std::io::stderr(), "    {d}");
    }
    let passed = ok && start.elapsed() < Duration::from_secs(600);
    finish("5", passed, "median iterations PI ≤ R1-VI < min(VI, Nesterov, Anderson) at γ ≥ 0.99, runtime < 10 min".into(), start);
}

#[test]
fn criterion_06_learning_error_trend() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = BenchConfig {
        env: garnet(),
        gammas: GAMMA_COLUMNS.to_vec(),
        instances: 5,
        seeds: 5,
        iters: 5000,
        eval_every: 5000,
        algos: vec!["ql".into(), "r1ql".into()],
        master_seed: MASTER_SEED,
        threads: 0,
        ..BenchConfig::default()
    };
    let rep = run_learning_suite(&cfg).unwrap();
    let medians = |algo: &str| -> Vec<f64> {
        GAMMA_COLUMNS.iter().map(|&g| rep.median_final_value_err(g, algo).unwrap()).collect()
    };
    let (ql, r1) = (medians("ql"), medians("r1ql"));
    let spread = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min);
    let passed = r1[3] <= ql[3] && spread(&r1) < spread(&ql) && start.elapsed() < Duration::from_secs(900);
    finish(
        "6",
        passed,
        format!(
            "median final value error by γ: ql [{}], r1ql [{}]; spread ql {:.3e} vs r1ql {:.3e}, runtime < 15 min",
            sci(&ql),
            sci(&r1),
            spread(&ql),
            spread(&r1)
        ),
        start,
    );
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn first_below(trace: &SolveTrace<f64>, value: f64, bellman: f64) -> (Option<usize>, Option<usize>) {
    (trace.first_value_below(value), trace.first_bellman_below(bellman))
}

#[test]
fn criterion_07_gridworld_behaviour() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();

    // Terminal goal: after the estimate has settled on the goal, the
    // correction vanishes relative to the residual.
    let spec = GridworldSpec::default_for(GridworldVariant::TerminalZeroReward);
    let goal = spec.goal_state();
    for &gamma in &GAMMA_COLUMNS {
        let mdp = gen_gridworld(&spec, gamma).unwrap();
        let v0 = vec![0.0; mdp.n()];
        let stop = StopRule::iterations(200);
        let from_uniform = RankOneConfig::default();
        let from_goal = RankOneConfig { d_init: Some(DistVec::point_mass(mdp.n(), goal)), power_iters: 1 };
        for (label, cfg) in [("uniform start", from_uniform), ("goal start", from_goal)] {
            let trace = run_r1vi(&mdp, &v0, &cfg, &stop, &recorded_plan()).unwrap();
            let mut worst = 0.0f64;
            let mut largest = 0.0f64;
            let mut settled = 0usize;
            for (k, d) in trace.distributions.iter().enumerate() {
                if d[goal] <= 1.0 - 1e-6 {
                    continue;
                }
                settled += 1;
                let bound = 1e-6 * trace.records[k].bellman_err;
                let alpha = trace.corrections[k].abs();
                if alpha > bound {
                    worst = worst.max(alpha / trace.records[k].bellman_err);
                    largest = largest.max(alpha);
                }
            }
            ok &= settled > 0 && worst == 0.0;
            notes.push(format!(
                "terminal γ={gamma} ({label}): {settled} settled iterations, first at {:?}, violations max |α|/‖r‖ {worst:.2e} (largest violating |α| {largest:.2e})",
                trace.distributions.iter().position(|d| d[goal] > 1.0 - 1e-6)
            ));
        }
    }

    // Positive absorbing goal: rank-one never needs more iterations than VI.
    let spec = GridworldSpec::default_for(GridworldVariant::AbsorbingPositiveReward);
    let env = EnvSpec::Gridworld {
        rows: spec.rows,
        cols: spec.cols,
        variant: spec.variant,
        goal: Some(spec.goal),
        step_cost: spec.step_cost,
    };
    for &gamma in &GAMMA_COLUMNS {
        let mdp = gen_gridworld(&spec, gamma).unwrap();
        let th = env.default_thresholds(gamma);
        let vs = reference_value(&mdp).unwrap();
        let v0 = vec![0.0; mdp.n()];
        let stop = StopRule::new(Some(th.bellman), Some(th.value), 1_000_000);
        let opts = SolveOptions::with_reference(&vs);
        let vi = run_vi(&mdp, &v0, &stop, &opts).unwrap();
        let r1 = run_r1vi(&mdp, &v0, &RankOneConfig::default(), &stop, &opts).unwrap();
        let (vi_v, vi_b) = first_below(&vi, th.value, th.bellman);
        let (r1_v, r1_b) = first_below(&r1, th.value, th.bellman);
        let no_worse = |r: Option<usize>, v: Option<usize>| matches!((r, v), (Some(a), Some(b)) if a <= b);
        ok &= no_worse(r1_v, vi_v) && no_worse(r1_b, vi_b);
        notes.push(format!("absorbing γ={gamma}: value r1vi {r1_v:?} vi {vi_v:?}, bellman r1vi {r1_b:?} vi {vi_b:?}"));
    }
    for n in &notes {
        let _ = writeln!(std::io::stderr(), "    {n}");
    }
    finish("7", ok, "terminal correction vanishes once settled; absorbing R1-VI ≤ VI iterations".into(), start);
}

#[test]
fn criterion_08_order_zero_reductions() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0usize;
    let same = |a: &SolveTrace<f64>, b: &SolveTrace<f64>| {
        a.iterates == b.iterates
            && a.corrections == b.corrections
            && a.distributions == b.distributions
            && a.final_v == b.final_v
            && a.iterations == b.iterations
            && a.records.iter().zip(&b.records).all(|(x, y)| {
                x.bellman_err.to_bits() == y.bellman_err.to_bits() && x.policy_fingerprint == y.policy_fingerprint
            })
    };
    let mut models: Vec<Mdp<f64>> = (0..10).map(|_| random_sized(&mut rng, 20, 4)).collect();
    models.push(garnet().build(MASTER_SEED, 0, 0.99).unwrap());
    for mdp in &models {
        let v0 = vec![0.0; mdp.n()];
        let stop = StopRule::bellman(1e-9, 3000);
        let a = run_vi(mdp, &v0, &stop, &recorded_plan()).unwrap();
        let b = run_mpi(mdp, &v0, 0, false, &stop, &recorded_plan()).unwrap();
        mismatches += usize::from(!same(&a, &b));
        let a = run_r1vi(mdp, &v0, &RankOneConfig::default(), &stop, &recorded_plan()).unwrap();
        let b = run_mpi(mdp, &v0, 0, true, &stop, &recorded_plan()).unwrap();
        mismatches += usize::from(!same(&a, &b));
    }
    finish("8", mismatches == 0, format!("{mismatches} of {} run pairs differ", 2 * models.len()), start);
}

fn deterministic_models() -> Vec<(String, Mdp<f64>)> {
    let gamma = 0.9;
    let mut out = vec![(
        "m2".to_string(),
        Mdp::new(2, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0], vec![1.0, 2.5, 3.0, 0.0], gamma).unwrap(),
    )];
    for seed in 0..3 {
        out.push((format!("graph{seed}"), gen_graph(6, 0.0, seed, gamma).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..3 {
        let (n, m) = (5, 2);
        let mut kernel = vec![0.0; n * m * n];
        for row in kernel.chunks_exact_mut(n) {
            row[rng.gen_range(0..n)] = 1.0;
        }
        let cost = (0..n * m).map(|_| rng.gen::<f64>()).collect();
        out.push((format!("random{i}"), Mdp::new(n, m, kernel, cost, gamma).unwrap()));
    }
    out
}

#[test]
fn criterion_09_deterministic_learning_oracle() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 4];
    let kinds = [LearnerKind::Ql, LearnerKind::Speedy, LearnerKind::Zap, LearnerKind::R1Ql];
    for (name, mdp) in deterministic_models() {
        let qs = optimal_q(&mdp).unwrap();
        let opts = LearnOptions { reference_q: Some(&qs[..]), eval_every: 5000, ..LearnOptions::default() };
        let q0 = vec![0.0; mdp.n() * mdp.m()];
        for (i, kind) in kinds.iter().enumerate() {
            let t = kind.run(&mdp, &q0, 0, 5000, &opts).unwrap();
            let err = t.records.last().unwrap().value_err.unwrap();
            worst[i] = worst[i].max(err);
            if !(err <= 1e-2) {
                failures.push(format!("{} on {name}: {err:.3e}", kind.name()));
            }
        }
    }
    for f in &failures {
        let _ = writeln!(std::io::stderr(), "    above 1e-2: {f}");
    }
    finish(
        "9",
        failures.is_empty(),
        format!(
            "worst final value error at k=5000: ql {:.3e}, speedy {:.3e}, zap {:.3e}, r1ql {:.3e} (need ≤ 1e-2)",
            worst[0], worst[1], worst[2], worst[3]
        ),
        start,
    );
}

fn csv_body(rows: &[ResultRow]) -> String {
    let mut rows = rows.to_vec();
    rows.iter_mut().for_each(|r| r.wallclock_ns = 0);
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn criterion_10_reproducibility() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let base = BenchConfig {
        env: EnvSpec::Garnet { n: 40, m: 4, branching: 6 },
        gammas: vec![0.9, 0.99],
        instances: 3,
        seeds: 2,
        iters: 500,
        eval_every: 10,
        master_seed: 77,
        policy_value: true,
        ..BenchConfig::default()
    };
    let mut identical = true;
    let plan = |threads| {
        let cfg = BenchConfig {
            threads,
            algos: ["vi", "pi", "r1vi", "nesterov", "anderson", "mpi3", "r1mpi3"].map(String::from).to_vec(),
            ..base.clone()
        };
        csv_body(&run_planning_suite(&cfg).unwrap().rows)
    };
    let p1 = plan(1);
    identical &= p1 == plan(4) && p1 == plan(1);
    let learn = |threads, env: EnvSpec| {
        let cfg = BenchConfig { threads, env, algos: ["ql", "speedy", "zap", "r1ql"].map(String::from).to_vec(), ..base.clone() };
        csv_body(&run_learning_suite(&cfg).unwrap().rows)
    };
    let graph = EnvSpec::from_name("graph").unwrap();
    let l1 = learn(1, graph.clone());
    identical &= l1 == learn(3, graph.clone()) && l1 == learn(1, graph);
    let other_seed = BenchConfig { master_seed: 78, threads: 1, algos: vec!["vi".into()], ..base.clone() };
    let differs = csv_body(&run_planning_suite(&other_seed).unwrap().rows) != plan(1);
    finish(
        "10",
        identical && differs,
        format!("CSV bodies identical across reruns and 1/3/4 threads: {identical}; other seed differs: {differs}"),
        start,
    );
}

