//! Synchronous sample-based learners: Q-learning, Speedy Q-learning, Zap
//! Q-learning and rank-one Q-learning.
//!
//! Each round every state-action pair receives one next-state sample from
//! [`draw_sample_table`], so learners run with the same seed see the same
//! samples. The learners never read the kernel; the true model is consulted
//! only to evaluate errors for the trace.

use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mdp::{argmin, greedy_policy_q, Mdp, QFn};
use crate::rank_one::DistVec;
use crate::sampling::{draw_sample_table, SampleTable};
use crate::scalar::{dist_inf, Scalar};

/// Step sizes `λ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StepSchedule {
    /// `1 / (1 + k)`.
    #[default]
    Linear,
    /// `1 / (1 + k)^ω`, `ω ∈ (½, 1]`.
    Polynomial(f64),
    /// `1 / (1 + τ k)`, `τ ∈ (0, 1]`.
    RescaledLinear(f64),
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Linear => Ok(()),
            StepSchedule::Polynomial(w) if w > 0.5 && w <= 1.0 => Ok(()),
            StepSchedule::RescaledLinear(t) if t > 0.0 && t <= 1.0 => Ok(()),
            other => Err(Error::InvalidSpec(format!("invalid step schedule {other:?}"))),
        }
    }

    pub fn step<T: Scalar>(&self, k: usize) -> T {
        let k1 = T::from_usize_lossy(k) + T::one();
        match *self {
            StepSchedule::Linear => T::one() / k1,
            StepSchedule::Polynomial(w) => T::one() / k1.powf(T::lit(w)),
            StepSchedule::RescaledLinear(t) => {
                T::one() / (T::one() + T::lit(t) * T::from_usize_lossy(k))
            }
        }
    }
}

/// `T̂(q)(s,a) = c(s,a) + γ min_{a⁺} q(ŝ⁺, a⁺)` with the table's samples.
pub fn empirical_bellman<T: Scalar>(mdp: &Mdp<T>, q: &[T], table: &SampleTable) -> Result<QFn<T>> {
    mdp.check_q_len(q)?;
    if table.next_state.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            found: table.next_state.len(),
        });
    }
    let mut out = vec![T::zero(); q.len()];
    sampled_backup(mdp, q, table, &mut out, |_, _, _| ());
    Ok(QFn(out))
}

/// Fills `out` with `T̂(q)` and reports `(pair, ŝ⁺, â⁺)` for every pair.
#[inline]
fn sampled_backup<T: Scalar>(
    mdp: &Mdp<T>,
    q: &[T],
    table: &SampleTable,
    out: &mut [T],
    mut visit: impl FnMut(usize, usize, usize),
) {
    let m = mdp.m();
    let gamma = mdp.gamma();
    let cost = mdp.cost();
    for (i, &sp) in table.next_state.iter().enumerate() {
        let (ap, qmin) = argmin(&q[sp * m..(sp + 1) * m]);
        out[i] = cost[i] + gamma * qmin;
        visit(i, sp, ap);
    }
}

/// One synchronous learner.
pub trait Learner<T: Scalar> {
    /// `q_{k+1}` from `q_k` and the round-`k` table.
    fn step(&mut self, mdp: &Mdp<T>, k: usize, q: &[T], table: &SampleTable) -> Result<Vec<T>>;

    /// Constant shift applied in the last step, for rank-one learners.
    fn last_correction(&self) -> Option<T> {
        None
    }
}

/// Synchronous Q-learning `q_{k+1} = (1 − λ_k) q_k + λ_k T̂_k(q_k)`.
#[derive(Debug, Clone)]
pub struct QLearning {
    pub schedule: StepSchedule,
}

impl<T: Scalar> Learner<T> for QLearning {
    fn step(&mut self, mdp: &Mdp<T>, k: usize, q: &[T], table: &SampleTable) -> Result<Vec<T>> {
        let lambda: T = self.schedule.step(k);
        let keep = T::one() - lambda;
        let mut t = vec![T::zero(); q.len()];
        sampled_backup(mdp, q, table, &mut t, |_, _, _| ());
        Ok(q.iter().zip(&t).map(|(&x, &y)| keep * x + lambda * y).collect())
    }
}

/// Synchronous Speedy Q-learning.
#[derive(Debug, Clone, Default)]
pub struct SpeedyQl<T> {
    prev: Option<Vec<T>>,
}

impl<T: Scalar> Learner<T> for SpeedyQl<T> {
    fn step(&mut self, mdp: &Mdp<T>, k: usize, q: &[T], table: &SampleTable) -> Result<Vec<T>> {
        let prev = self.prev.take().unwrap_or_else(|| q.to_vec());
        let mut z = vec![T::zero(); q.len()];
        let mut zp = vec![T::zero(); q.len()];
        sampled_backup(mdp, q, table, &mut z, |_, _, _| ());
        sampled_backup(mdp, &prev, table, &mut zp, |_, _, _| ());
        let k1 = T::from_usize_lossy(k) + T::one();
        let a = T::one() / k1;
        let b = T::from_usize_lossy(k) / k1;
        let next = (0..q.len())
            .map(|i| q[i] + a * (zp[i] - q[i]) + b * (z[i] - zp[i]))
            .collect();
        self.prev = Some(q.to_vec());
        Ok(next)
    }
}

/// Synchronous Zap Q-learning without eligibility traces.
#[derive(Debug, Clone)]
pub struct ZapQl<T> {
    p_hat: DenseMatrix<T>,
}

impl<T: Scalar> ZapQl<T> {
    /// Starts from the uniform row-stochastic estimate.
    pub fn new(pairs: usize) -> Self {
        let u = T::one() / T::from_usize_lossy(pairs);
        let p_hat = DenseMatrix::from_row_major(pairs, pairs, vec![u; pairs * pairs])
            .expect("square matrix");
        Self { p_hat }
    }

    /// Current `P̂_k`.
    pub fn p_hat(&self) -> &DenseMatrix<T> {
        &self.p_hat
    }
}

impl<T: Scalar> Learner<T> for ZapQl<T> {
    fn step(&mut self, mdp: &Mdp<T>, k: usize, q: &[T], table: &SampleTable) -> Result<Vec<T>> {
        let nm = q.len();
        if self.p_hat.rows() != nm {
            return Err(Error::DimensionMismatch {
                expected: self.p_hat.rows(),
                found: nm,
            });
        }
        let m = mdp.m();
        let mut t = vec![T::zero(); nm];
        let mut cols = vec![0usize; nm];
        sampled_backup(mdp, q, table, &mut t, |i, sp, ap| cols[i] = sp * m + ap);

        // P̂_k = P̂_{k−1} + (F_k − P̂_{k−1}) / (2 + k)
        let rate = T::one() / (T::from_usize_lossy(k) + T::lit(2.0));
        let keep = T::one() - rate;
        for (i, &c) in cols.iter().enumerate() {
            let row = self.p_hat.row_mut(i);
            row.iter_mut().for_each(|x| *x *= keep);
            row[c] += rate;
        }

        let gamma = mdp.gamma();
        let mut a = DenseMatrix::zeros(nm, nm);
        for i in 0..nm {
            for (x, &p) in a.row_mut(i).iter_mut().zip(self.p_hat.row(i)) {
                *x = -gamma * p;
            }
            a[(i, i)] += T::one();
        }
        let residual: Vec<T> = t.iter().zip(q).map(|(&x, &y)| x - y).collect();
        let dir = a.solve(&residual)?;
        let lambda = T::one() / (T::from_usize_lossy(k) + T::one());
        Ok(q.iter().zip(&dir).map(|(&x, &g)| x + lambda * g).collect())
    }
}

/// Rank-one Q-learning.
#[derive(Debug, Clone)]
pub struct RankOneQl<T> {
    pub schedule: StepSchedule,
    d_hat: Vec<T>,
    alpha: Option<T>,
}

impl<T: Scalar> RankOneQl<T> {
    pub fn new(schedule: StepSchedule, d_init: DistVec<T>) -> Self {
        Self {
            schedule,
            d_hat: d_init.into_vec(),
            alpha: None,
        }
    }

    /// Current stationary-distribution estimate `d̂_k`.
    pub fn d_hat(&self) -> &[T] {
        &self.d_hat
    }
}

impl<T: Scalar> Learner<T> for RankOneQl<T> {
    fn step(&mut self, mdp: &Mdp<T>, k: usize, q: &[T], table: &SampleTable) -> Result<Vec<T>> {
        let nm = q.len();
        if self.d_hat.len() != nm {
            return Err(Error::DimensionMismatch {
                expected: self.d_hat.len(),
                found: nm,
            });
        }
        let m = mdp.m();
        let gamma = mdp.gamma();
        let lambda: T = self.schedule.step(k);
        let keep = T::one() - lambda;

        // f = F_kᵀ d̂_{k−1} by scattering mass onto (ŝ⁺, â⁺).
        let mut t = vec![T::zero(); nm];
        let mut f = vec![T::zero(); nm];
        let d_prev = &self.d_hat;
        sampled_backup(mdp, q, table, &mut t, |i, sp, ap| f[sp * m + ap] += d_prev[i]);

        let mixed: Vec<T> = d_prev
            .iter()
            .zip(&f)
            .map(|(&d, &g)| keep * d + lambda * g)
            .collect();
        self.d_hat = DistVec::normalized(mixed)?.into_vec();

        let inner: T = self
            .d_hat
            .iter()
            .zip(t.iter().zip(q))
            .map(|(&d, (&ti, &qi))| d * (ti - qi))
            .sum();
        let alpha = gamma * lambda / (T::one() - gamma) * inner;
        self.alpha = Some(alpha);
        Ok(q.iter()
            .zip(&t)
            .map(|(&x, &y)| (keep * x + lambda * y) + alpha)
            .collect())
    }

    fn last_correction(&self) -> Option<T> {
        self.alpha
    }
}

/// Evaluation settings for a learning run.
#[derive(Debug, Clone, Copy)]
pub struct LearnOptions<'a, T> {
    /// `q*`, enables the value error.
    pub reference_q: Option<&'a [T]>,
    /// `v*`, enables the policy value error when `policy_value` is set.
    pub reference_v: Option<&'a [T]>,
    pub policy_value: bool,
    /// Keep every iterate `q_k`.
    pub record_iterates: bool,
    /// Evaluate errors every `eval_every` rounds (and always at the end).
    pub eval_every: usize,
}

impl<T> Default for LearnOptions<'_, T> {
    fn default() -> Self {
        Self {
            reference_q: None,
            reference_v: None,
            policy_value: false,
            record_iterates: false,
            eval_every: 1,
        }
    }
}

/// Errors of one evaluated iterate `q_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnRecord<T> {
    pub iteration: usize,
    /// `‖T̄(q_k) − q_k‖_∞` on the true model.
    pub bellman_err: T,
    pub value_err: Option<T>,
    pub policy_fingerprint: u64,
    pub policy_value_err: Option<T>,
    /// Time spent computing `q_{k+1}` (zero for the last iterate).
    pub wallclock_ns: u64,
}

/// History of one learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnTrace<T> {
    pub records: Vec<LearnRecord<T>>,
    /// Digest of the sample table used in each round.
    pub sample_digests: Vec<u64>,
    /// `α_k` of rank-one learners, one per round.
    pub corrections: Vec<T>,
    /// `q_0, q_1, …` when requested.
    pub iterates: Vec<Vec<T>>,
    pub final_q: QFn<T>,
    pub seed: u64,
    /// Rounds completed.
    pub iterations: usize,
    /// Set when an iterate became non-finite; the run stops there.
    pub diverged: bool,
}

fn evaluate<T: Scalar>(
    mdp: &Mdp<T>,
    k: usize,
    q: &[T],
    opts: &LearnOptions<'_, T>,
) -> Result<LearnRecord<T>> {
    let tq = mdp.bellman_q(q)?;
    let policy = greedy_policy_q(q, mdp.m())?;
    let policy_value_err = match (opts.policy_value, opts.reference_v) {
        (true, Some(v)) => Some(dist_inf(&mdp.policy_evaluation_exact(&policy)?, v)),
        _ => None,
    };
    Ok(LearnRecord {
        iteration: k,
        bellman_err: dist_inf(&tq, q),
        value_err: opts.reference_q.map(|r| dist_inf(q, r)),
        policy_fingerprint: policy.fingerprint(),
        policy_value_err,
        wallclock_ns: 0,
    })
}

/// Runs `learner` for `iters` rounds from `q0` on the sample stream `seed`.
pub fn run_learner<T: Scalar, L: Learner<T> + ?Sized>(
    mdp: &Mdp<T>,
    learner: &mut L,
    q0: &[T],
    seed: u64,
    iters: usize,
    opts: &LearnOptions<'_, T>,
) -> Result<LearnTrace<T>> {
    mdp.check_q_len(q0)?;
    if let Some(r) = opts.reference_q {
        mdp.check_q_len(r)?;
    }
    if let Some(v) = opts.reference_v {
        mdp.check_value_len(v)?;
    }
    let every = opts.eval_every.max(1);
    let mut trace = LearnTrace {
        records: Vec::new(),
        sample_digests: Vec::with_capacity(iters),
        corrections: Vec::new(),
        iterates: Vec::new(),
        final_q: QFn(Vec::new()),
        seed,
        iterations: 0,
        diverged: false,
    };
    let mut q = q0.to_vec();
    for k in 0..=iters {
        if opts.record_iterates {
            trace.iterates.push(q.clone());
        }
        let evaluated = k % every == 0 || k == iters;
        if evaluated {
            trace.records.push(evaluate(mdp, k, &q, opts)?);
        }
        if k == iters {
            break;
        }
        let started = Instant::now();
        let table = draw_sample_table(mdp, k as u64, seed);
        trace.sample_digests.push(table.digest());
        let next = learner.step(mdp, k, &q, &table)?;
        if let Some(alpha) = learner.last_correction() {
            trace.corrections.push(alpha);
        }
        if evaluated {
            if let Some(r) = trace.records.last_mut() {
                r.wallclock_ns = started.elapsed().as_nanos() as u64;
            }
        }
        trace.iterations = k + 1;
        if next.iter().any(|x| !x.is_finite()) {
            trace.diverged = true;
            break;
        }
        q = next;
    }
    trace.final_q = QFn(q);
    Ok(trace)
}

/// Synchronous Q-learning.
pub fn run_ql<T: Scalar>(
    mdp: &Mdp<T>,
    q0: &[T],
    schedule: StepSchedule,
    seed: u64,
    iters: usize,
    opts: &LearnOptions<'_, T>,
) -> Result<LearnTrace<T>> {
    schedule.validate()?;
    run_learner(mdp, &mut QLearning { schedule }, q0, seed, iters, opts)
}

/// Speedy Q-learning with `q_{−1} = q_0`.
pub fn run_speedy_ql<T: Scalar>(
    mdp: &Mdp<T>,
    q0: &[T],
    seed: u64,
    iters: usize,
    opts: &LearnOptions<'_, T>,
) -> Result<LearnTrace<T>> {
    run_learner(mdp, &mut SpeedyQl::default(), q0, seed, iters, opts)
}

/// Zap Q-learning with a uniform initial `P̂`.
pub fn run_zap_ql<T: Scalar>(
    mdp: &Mdp<T>,
    q0: &[T],
    seed: u64,
    iters: usize,
    opts: &LearnOptions<'_, T>,
) -> Result<LearnTrace<T>> {
    let mut zap = ZapQl::new(mdp.n() * mdp.m());
    run_learner(mdp, &mut zap, q0, seed, iters, opts)
}

/// Rank-one Q-learning; `d_init` defaults to uniform on state-action pairs.
pub fn run_r1ql<T: Scalar>(
    mdp: &Mdp<T>,
    q0: &[T],
    d_init: Option<DistVec<T>>,
    schedule: StepSchedule,
    seed: u64,
    iters: usize,
    opts: &LearnOptions<'_, T>,
) -> Result<LearnTrace<T>> {
    schedule.validate()?;
    let pairs = mdp.n() * mdp.m();
    let d = d_init.unwrap_or_else(|| DistVec::uniform(pairs));
    if d.len() != pairs {
        return Err(Error::DimensionMismatch {
            expected: pairs,
            found: d.len(),
        });
    }
    run_learner(mdp, &mut RankOneQl::new(schedule, d), q0, seed, iters, opts)
}

/// Learning algorithms selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LearnerKind {
    Ql,
    Speedy,
    Zap,
    R1Ql,
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Ql => "ql",
            LearnerKind::Speedy => "speedy",
            LearnerKind::Zap => "zap",
            LearnerKind::R1Ql => "r1ql",
        }
    }

    /// Runs with default settings (`λ_k = 1/(1+k)`, uniform initial
    /// distributions).
    pub fn run<T: Scalar>(
        &self,
        mdp: &Mdp<T>,
        q0: &[T],
        seed: u64,
        iters: usize,
        opts: &LearnOptions<'_, T>,
    ) -> Result<LearnTrace<T>> {
        let sched = StepSchedule::Linear;
        match self {
            LearnerKind::Ql => run_ql(mdp, q0, sched, seed, iters, opts),
            LearnerKind::Speedy => run_speedy_ql(mdp, q0, seed, iters, opts),
            LearnerKind::Zap => run_zap_ql(mdp, q0, seed, iters, opts),
            LearnerKind::R1Ql => run_r1ql(mdp, q0, None, sched, seed, iters, opts),
        }
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ql" => Ok(LearnerKind::Ql),
            "speedy" | "speedy-ql" | "speedyql" => Ok(LearnerKind::Speedy),
            "zap" | "zap-ql" | "zapql" => Ok(LearnerKind::Zap),
            "r1ql" | "r1-ql" => Ok(LearnerKind::R1Ql),
            other => Err(Error::InvalidSpec(format!("unknown learner {other:?}"))),
        }
    }
}
