//! Model-based solvers sharing one iteration driver: value iteration, policy
//! iteration, (rank-one) modified policy iteration, rank-one value iteration,
//! and the Nesterov / Anderson accelerated variants of value iteration.
//!
//! Every solver updates with the generic rule `v_{k+1} = v_k + G_k (T(v_k) − v_k)`
//! for its own gain `G_k`, and records the errors of each iterate `v_k`
//! (record `k` describes `v_k`, so a trace holds `iterations + 1` records).

use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::mdp::{Mdp, Policy, ValueFn};
use crate::rank_one::{rank_one_coefficient, rank_one_shift, DistVec};
use crate::scalar::{dist_inf, dot, Scalar};

/// Termination criteria. The run stops as soon as every active tolerance is
/// met, or after `max_iters` updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule<T> {
    pub bellman_tol: Option<T>,
    /// Requires a reference solution in [`SolveOptions`].
    pub value_tol: Option<T>,
    pub max_iters: usize,
}

impl<T: Scalar> StopRule<T> {
    pub fn new(bellman_tol: Option<T>, value_tol: Option<T>, max_iters: usize) -> Self {
        Self {
            bellman_tol,
            value_tol,
            max_iters,
        }
    }

    pub fn bellman(tol: T, max_iters: usize) -> Self {
        Self::new(Some(tol), None, max_iters)
    }

    pub fn iterations(max_iters: usize) -> Self {
        Self::new(None, None, max_iters)
    }

    pub fn has_tolerance(&self) -> bool {
        self.bellman_tol.is_some() || self.value_tol.is_some()
    }

    fn validate(&self, has_reference: bool) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidSpec("max_iters must be positive".into()));
        }
        for tol in [self.bellman_tol, self.value_tol].into_iter().flatten() {
            if !(tol >= T::zero()) {
                return Err(Error::InvalidSpec(format!("negative tolerance {tol}")));
            }
        }
        if self.value_tol.is_some() && !has_reference {
            return Err(Error::InvalidSpec(
                "value tolerance needs a reference solution".into(),
            ));
        }
        Ok(())
    }

    /// True when every active tolerance holds (false if none is active).
    pub fn satisfied(&self, bellman_err: T, value_err: Option<T>) -> bool {
        if !self.has_tolerance() {
            return false;
        }
        let b = self.bellman_tol.map_or(true, |t| bellman_err <= t);
        let v = match (self.value_tol, value_err) {
            (Some(t), Some(e)) => e <= t,
            (Some(_), None) => false,
            (None, _) => true,
        };
        b && v
    }
}

/// Optional evaluation work attached to a run.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<'a, T> {
    /// `v*`, enables the value error series.
    pub reference: Option<&'a [T]>,
    /// Record `‖v^{π_k} − v*‖_∞` (one `n × n` solve per iteration).
    pub policy_value: bool,
    /// Keep every iterate `v_k` (and `d_k` for rank-one solvers).
    pub record_iterates: bool,
}

impl<T> Default for SolveOptions<'_, T> {
    fn default() -> Self {
        Self {
            reference: None,
            policy_value: false,
            record_iterates: false,
        }
    }
}

impl<'a, T> SolveOptions<'a, T> {
    pub fn with_reference(reference: &'a [T]) -> Self {
        Self {
            reference: Some(reference),
            policy_value: false,
            record_iterates: false,
        }
    }
}

/// Settings of the stationary-distribution estimate used by the rank-one
/// solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneConfig<T> {
    /// `d_{-1}`; uniform when `None`.
    pub d_init: Option<DistVec<T>>,
    /// Warm-started power-method steps per iteration.
    pub power_iters: usize,
}

impl<T> Default for RankOneConfig<T> {
    fn default() -> Self {
        Self {
            d_init: None,
            power_iters: 1,
        }
    }
}

/// Errors and timing of one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord<T> {
    pub bellman_err: T,
    pub value_err: Option<T>,
    pub policy_fingerprint: u64,
    pub policy_value_err: Option<T>,
    pub wallclock_ns: u64,
}

/// Per-iteration history of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace<T> {
    /// `records[k]` describes `v_k`.
    pub records: Vec<IterRecord<T>>,
    /// Constant shifts `α_k` applied by rank-one solvers, one per update.
    pub corrections: Vec<T>,
    /// `v_k` for every record, when requested.
    pub iterates: Vec<Vec<T>>,
    /// `d_k` for every update of a rank-one solver, when requested.
    pub distributions: Vec<Vec<T>>,
    pub final_v: ValueFn<T>,
    /// Number of updates performed.
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> SolveTrace<T> {
    fn new() -> Self {
        Self {
            records: Vec::new(),
            corrections: Vec::new(),
            iterates: Vec::new(),
            distributions: Vec::new(),
            final_v: ValueFn(Vec::new()),
            iterations: 0,
            converged: false,
        }
    }

    /// First `k` whose Bellman error is at most `tol`.
    pub fn first_bellman_below(&self, tol: T) -> Option<usize> {
        self.records.iter().position(|r| r.bellman_err <= tol)
    }

    /// First `k` whose value error is at most `tol`.
    pub fn first_value_below(&self, tol: T) -> Option<usize> {
        self.records
            .iter()
            .position(|r| r.value_err.is_some_and(|e| e <= tol))
    }
}

/// Result of the fused Bellman sweep at `v_k`.
struct Sweep<'s, T> {
    tv: &'s [T],
    actions: &'s [usize],
}

trait Update<T: Scalar> {
    fn update(
        &mut self,
        mdp: &Mdp<T>,
        k: usize,
        v: &[T],
        sweep: Sweep<'_, T>,
        trace: &mut SolveTrace<T>,
        record_iterates: bool,
    ) -> Result<Vec<T>>;

    fn stop_on_stable_policy(&self) -> bool {
        false
    }
}

fn drive<T: Scalar, U: Update<T>>(
    mdp: &Mdp<T>,
    v0: &[T],
    stop: &StopRule<T>,
    opts: &SolveOptions<'_, T>,
    mut updater: U,
) -> Result<SolveTrace<T>> {
    mdp.check_value_len(v0)?;
    if let Some(r) = opts.reference {
        mdp.check_value_len(r)?;
    }
    stop.validate(opts.reference.is_some())?;

    let n = mdp.n();
    let mut trace = SolveTrace::new();
    let mut v = v0.to_vec();
    let mut tv = vec![T::zero(); n];
    let mut actions = vec![0usize; n];
    let mut prev_actions: Option<Vec<usize>> = None;

    for k in 0.. {
        let started = Instant::now();
        mdp.sweep(&v, &mut tv, &mut actions);
        let bellman_err = dist_inf(&tv, &v);
        let value_err = opts.reference.map(|r| dist_inf(&v, r));
        let policy = Policy(actions.clone());
        let policy_value_err = match (opts.policy_value, opts.reference) {
            (true, Some(r)) => Some(dist_inf(&mdp.policy_evaluation_exact(&policy)?, r)),
            _ => None,
        };
        if opts.record_iterates {
            trace.iterates.push(v.clone());
        }

        let stable = prev_actions.as_deref() == Some(&actions[..]);
        let done = stop.satisfied(bellman_err, value_err)
            || (updater.stop_on_stable_policy() && !stop.has_tolerance() && stable);
        let mut record = IterRecord {
            bellman_err,
            value_err,
            policy_fingerprint: policy.fingerprint(),
            policy_value_err,
            wallclock_ns: 0,
        };
        if done || k == stop.max_iters {
            record.wallclock_ns = started.elapsed().as_nanos() as u64;
            trace.records.push(record);
            trace.converged = done;
            trace.iterations = k;
            break;
        }

        let next = updater.update(
            mdp,
            k,
            &v,
            Sweep {
                tv: &tv,
                actions: &actions,
            },
            &mut trace,
            opts.record_iterates,
        )?;
        record.wallclock_ns = started.elapsed().as_nanos() as u64;
        trace.records.push(record);
        v = next;
        prev_actions = Some(actions.clone());
    }
    trace.final_v = ValueFn(v);
    Ok(trace)
}

struct ValueIteration;

impl<T: Scalar> Update<T> for ValueIteration {
    fn update(
        &mut self,
        _: &Mdp<T>,
        _: usize,
        _: &[T],
        sweep: Sweep<'_, T>,
        _: &mut SolveTrace<T>,
        _: bool,
    ) -> Result<Vec<T>> {
        Ok(sweep.tv.to_vec())
    }
}

/// Value iteration `v_{k+1} = T(v_k)`.
pub fn run_vi<T: Scalar>(
    mdp: &Mdp<T>,
    v0: &[T],
    stop: &StopRule<T>,
    opts: &SolveOptions<'_, T>,
) -> Result<SolveTrace<T>> {
    drive(mdp, v0, stop, opts, ValueIteration)
}

struct PolicyIteration;

impl<T: Scalar> Update<T> for PolicyIteration {
    fn update(
        &mut self,
        mdp: &Mdp<T>,
        _: usize,
        v: &[T],
        sweep: Sweep<'_, T>,
        _: &mut SolveTrace<T>,
        _: bool,
    ) -> Result<Vec<T>> {
        let residual: Vec<T> = sweep.tv.iter().zip(v).map(|(&t, &x)| t - x).collect();
        let step = mdp.policy_resolvent(sweep.actions).solve(&residual)?;
        Ok(v.iter().zip(&step).map(|(&x, &s)| x + s).collect())
    }

    fn stop_on_stable_policy(&self) -> bool {
        true
    }
}

/// Policy iteration in resolvent form
/// `v_{k+1} = v_k + (I − γ P_k)⁻¹ (T(v_k) − v_k)`.
///
/// Without any tolerance in `stop`, the run ends when the greedy policy
/// repeats.
pub fn run_pi<T: Scalar>(
    mdp: &Mdp<T>,
    v0: &[T],
    stop: &StopRule<T>,
    opts: &SolveOptions<'_, T>,
) -> Result<SolveTrace<T>> {
    drive(mdp, v0, stop, opts, PolicyIteration)
}

/// Warm-started stationary-distribution estimate `d_k` of the greedy chain.
struct StationaryEstimate<T> {
    d: Vec<T>,
    power_iters: usize,
}

impl<T: Scalar> StationaryEstimate<T> {
    fn new(n: usize, cfg: &RankOneConfig<T>) -> Result<Self> {
        let d = match &cfg.d_init {
            Some(d) if d.len() != n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d.len(),
                })
            }
            Some(d) => d.to_vec(),
            None => DistVec::uniform(n).into_vec(),
        };
        if cfg.power_iters == 0 {
            return Err(Error::InvalidSpec("power_iters must be positive".into()));
        }
        Ok(Self {
            d,
            power_iters: cfg.power_iters,
        })
    }

    fn advance(&mut self, mdp: &Mdp<T>, actions: &[usize]) -> Result<&[T]> {
        for _ in 0..self.power_iters {
            let f = mdp.policy_transpose_apply(actions, &self.d);
            self.d = DistVec::normalized(f)?.into_vec();
        }
        Ok(&self.d)
    }
}

struct RankOneVi<T> {
    estimate: StationaryEstimate<T>,
}

impl<T: Scalar> Update<T> for RankOneVi<T> {
    fn update(
        &mut self,
        mdp: &Mdp<T>,
        _: usize,
        v: &[T],
        sweep: Sweep<'_, T>,
        trace: &mut SolveTrace<T>,
        record_iterates: bool,
    ) -> Result<Vec<T>> {
        let d = self.estimate.advance(mdp, sweep.actions)?;
        let residual: Vec<T> = sweep.tv.iter().zip(v).map(|(&t, &x)| t - x).collect();
        let alpha = rank_one_shift(d, mdp.gamma(), &residual)?;
        if record_iterates {
            trace.distributions.push(d.to_vec());
        }
        trace.corrections.push(alpha);
        Ok(sweep.tv.iter().map(|&t| t + alpha).collect())
    }
}

/// Rank-one value iteration:
/// `v_{k+1} = T(v_k) + γ/(1−γ) ⟨d_k, T(v_k) − v_k⟩ 1`, with `d_k` obtained
/// from `d_{k−1}` by power steps on the greedy chain of `v_k`.
pub fn run_r1vi<T: Scalar>(
    mdp: &Mdp<T>,
    v0: &[T],
    cfg: &RankOneConfig<T>,
    stop: &StopRule<T>,
    opts: &SolveOptions<'_, T>,
) -> Result<SolveTrace<T>> {
    let estimate = StationaryEstimate::new(mdp.n(), cfg)?;
    drive(mdp, v0, stop, opts, RankOneVi { estimate })
}

struct ModifiedPi<T> {
    order: usize,
    estimate: Option<StationaryEstimate<T>>,
}

impl<T: Scalar> Update<T> for ModifiedPi<T> {
    fn update(
        &mut self,
        mdp: &Mdp<T>,
        _: usize,
        v: &[T],
        sweep: Sweep<'_, T>,
        trace: &mut SolveTrace<T>,
        record_iterates: bool,
    ) -> Result<Vec<T>> {
        let gamma = mdp.gamma();
        let mut next = sweep.tv.to_vec();
        let residual: Vec<T> = sweep.tv.iter().zip(v).map(|(&t, &x)| t - x).collect();
        // Σ_{ℓ=1..L} γ^ℓ P_k^ℓ r by repeated products.
        let mut term = residual.clone();
        for _ in 0..self.order {
            term = mdp.policy_apply(sweep.actions, &term);
            term.iter_mut().for_each(|x| *x *= gamma);
            for (o, &t) in next.iter_mut().zip(&term) {
                *o += t;
            }
        }
        if let Some(est) = self.estimate.as_mut() {
            let d = est.advance(mdp, sweep.actions)?;
            let alpha = rank_one_coefficient(gamma, self.order) * dot(d, &residual);
            if record_iterates {
                trace.distributions.push(d.to_vec());
            }
            trace.corrections.push(alpha);
            next.iter_mut().for_each(|x| *x += alpha);
        }
        Ok(next)
    }
}

/// Modified policy iteration with gain `Σ_{ℓ=0..L} γ^ℓ P_k^ℓ`; with
/// `rank_one` the gain gains the term `γ^{L+1}/(1−γ) 1 d_kᵀ` (uniform
/// `d_{−1}`, one power step per iteration).
pub fn run_mpi<T: Scalar>(
    mdp: &Mdp<T>,
    v0: &[T],
    order: usize,
    rank_one: bool,
    stop: &StopRule<T>,
    opts: &SolveOptions<'_, T>,
) -> Result<SolveTrace<T>> {
    let cfg = rank_one.then(RankOneConfig::default);
    run_mpi_with(mdp, v0, order, cfg.as_ref(), stop, opts)
}

/// [`run_mpi`] with an explicit rank-one configuration.
pub fn run_mpi_with<T: Scalar>(
    mdp: &Mdp<T>,
    v0: &[T],
    order: usize,
    rank_one: Option<&RankOneConfig<T>>,
    stop: &StopRule<T>,
    opts: &SolveOptions<'_, T>,
) -> Result<SolveTrace<T>> {
    let estimate = rank_one
        .map(|cfg| StationaryEstimate::new(mdp.n(), cfg))
        .transpose()?;
    drive(mdp, v0, stop, opts, ModifiedPi { order, estimate })
}

/// Momentum coefficient `(1 − √(1 − γ²)) / γ`.
pub fn nesterov_momentum<T: Scalar>(gamma: T) -> T {
    (T::one() - (T::one() - gamma * gamma).sqrt()) / gamma
}

struct NesterovVi<T> {
    prev: Vec<T>,
}

impl<T: Scalar> Update<T> for NesterovVi<T> {
    fn update(
        &mut self,
        mdp: &Mdp<T>,
        k: usize,
        v: &[T],
        sweep: Sweep<'_, T>,
        _: &mut SolveTrace<T>,
        _: bool,
    ) -> Result<Vec<T>> {
        let gamma = mdp.gamma();
        let step = T::one() / (T::one() + gamma);
        let next = if k == 0 {
            // v_{−1} = v_0, so z_0 = v_0 and T(z_0) is the sweep.
            v.iter()
                .zip(sweep.tv)
                .map(|(&z, &tz)| z + step * (tz - z))
                .collect()
        } else {
            let mu = nesterov_momentum(gamma);
            let z: Vec<T> = v
                .iter()
                .zip(&self.prev)
                .map(|(&x, &p)| x + mu * (x - p))
                .collect();
            let tz = mdp.bellman_optimality(&z)?.values;
            z.iter().zip(tz.iter()).map(|(&z, &t)| z + step * (t - z)).collect()
        };
        self.prev = v.to_vec();
        Ok(next)
    }
}

/// Nesterov-accelerated value iteration:
/// `z_k = v_k + μ (v_k − v_{k−1})`, `v_{k+1} = z_k + (T(z_k) − z_k)/(1+γ)`.
pub fn run_nesterov_vi<T: Scalar>(
    mdp: &Mdp<T>,
    v0: &[T],
    stop: &StopRule<T>,
    opts: &SolveOptions<'_, T>,
) -> Result<SolveTrace<T>> {
    drive(mdp, v0, stop, opts, NesterovVi { prev: v0.to_vec() })
}

struct AndersonVi<T> {
    prev_v: Vec<T>,
    prev_tv: Option<Vec<T>>,
}

/// Anderson mixing weight for memory one; zero when the denominator
/// vanishes or is negligible against `‖z‖²`.
pub(crate) fn anderson_delta<T: Scalar>(v: &[T], tv: &[T], prev_v: &[T], prev_tv: &[T]) -> T {
    let mut num = T::zero();
    let mut den = T::zero();
    let mut zz = T::zero();
    for i in 0..v.len() {
        let z = v[i] - prev_v[i];
        let zp = tv[i] - prev_tv[i];
        num += z * (v[i] - tv[i]);
        den += z * (z - zp);
        zz += z * z;
    }
    if den == T::zero() || den.abs() <= T::lit(1e-14) * zz {
        T::zero()
    } else {
        num / den
    }
}

impl<T: Scalar> Update<T> for AndersonVi<T> {
    fn update(
        &mut self,
        _: &Mdp<T>,
        _: usize,
        v: &[T],
        sweep: Sweep<'_, T>,
        _: &mut SolveTrace<T>,
        _: bool,
    ) -> Result<Vec<T>> {
        let prev_tv = self.prev_tv.take().unwrap_or_else(|| sweep.tv.to_vec());
        let delta = anderson_delta(v, sweep.tv, &self.prev_v, &prev_tv);
        let keep = T::one() - delta;
        let next = sweep
            .tv
            .iter()
            .zip(&prev_tv)
            .map(|(&t, &tp)| keep * t + delta * tp)
            .collect();
        self.prev_v = v.to_vec();
        self.prev_tv = Some(sweep.tv.to_vec());
        Ok(next)
    }
}

/// Anderson-accelerated value iteration with memory one:
/// `v_{k+1} = (1 − δ_k) T(v_k) + δ_k T(v_{k−1})`.
pub fn run_anderson_vi<T: Scalar>(
    mdp: &Mdp<T>,
    v0: &[T],
    stop: &StopRule<T>,
    opts: &SolveOptions<'_, T>,
) -> Result<SolveTrace<T>> {
    drive(
        mdp,
        v0,
        stop,
        opts,
        AndersonVi {
            prev_v: v0.to_vec(),
            prev_tv: None,
        },
    )
}

/// Optimal value function and policy by classical policy iteration
/// (evaluate, improve) until the greedy policy repeats.
pub fn optimal_value<T: Scalar>(mdp: &Mdp<T>) -> Result<(ValueFn<T>, Policy)> {
    let mut policy = mdp.greedy_policy(&vec![T::zero(); mdp.n()])?;
    // Policy iteration terminates in finitely many steps; the cap only guards
    // against cycling between equal-value policies under rounding.
    for _ in 0..10_000 {
        let v = mdp.policy_evaluation_exact(&policy)?;
        let next = mdp.greedy_policy(&v)?;
        if next == policy {
            return Ok((v, policy));
        }
        // Keep the incumbent action on numerical ties.
        let improved = Policy(
            (0..mdp.n())
                .map(|s| {
                    let cur = mdp.action_value(&v, s, policy[s]);
                    let new = mdp.action_value(&v, s, next[s]);
                    let slack = T::lit(1e-13) * (T::one() + v[s].abs());
                    if new < cur - slack {
                        next[s]
                    } else {
                        policy[s]
                    }
                })
                .collect(),
        );
        if improved == policy {
            return Ok((v, policy));
        }
        policy = improved;
    }
    Err(Error::ConvergenceFailure)
}

/// Optimal Q-function `q*(s,a) = c(s,a) + γ Σ P(s⁺|s,a) v*(s⁺)`.
pub fn optimal_q<T: Scalar>(mdp: &Mdp<T>) -> Result<crate::mdp::QFn<T>> {
    let (v, _) = optimal_value(mdp)?;
    Ok(crate::mdp::QFn(
        (0..mdp.n() * mdp.m())
            .map(|r| mdp.action_value(&v, r / mdp.m(), r % mdp.m()))
            .collect(),
    ))
}

/// Planning algorithms selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Planner {
    Vi,
    Pi,
    R1Vi,
    Nesterov,
    Anderson,
    Mpi(usize),
    R1Mpi(usize),
}

impl Planner {
    pub fn name(&self) -> String {
        match self {
            Planner::Vi => "vi".into(),
            Planner::Pi => "pi".into(),
            Planner::R1Vi => "r1vi".into(),
            Planner::Nesterov => "nesterov".into(),
            Planner::Anderson => "anderson".into(),
            Planner::Mpi(l) => format!("mpi{l}"),
            Planner::R1Mpi(l) => format!("r1mpi{l}"),
        }
    }

    /// Runs from `v0` with the default rank-one configuration.
    pub fn run<T: Scalar>(
        &self,
        mdp: &Mdp<T>,
        v0: &[T],
        stop: &StopRule<T>,
        opts: &SolveOptions<'_, T>,
    ) -> Result<SolveTrace<T>> {
        match *self {
            Planner::Vi => run_vi(mdp, v0, stop, opts),
            Planner::Pi => run_pi(mdp, v0, stop, opts),
            Planner::R1Vi => run_r1vi(mdp, v0, &RankOneConfig::default(), stop, opts),
            Planner::Nesterov => run_nesterov_vi(mdp, v0, stop, opts),
            Planner::Anderson => run_anderson_vi(mdp, v0, stop, opts),
            Planner::Mpi(l) => run_mpi(mdp, v0, l, false, stop, opts),
            Planner::R1Mpi(l) => run_mpi(mdp, v0, l, true, stop, opts),
        }
    }
}

impl FromStr for Planner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let parse_order = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::InvalidSpec(format!("bad MPI order in {s:?}")))
        };
        Ok(match s.as_str() {
            "vi" => Planner::Vi,
            "pi" => Planner::Pi,
            "r1vi" | "r1-vi" => Planner::R1Vi,
            "nesterov" | "nesterov-vi" => Planner::Nesterov,
            "anderson" | "anderson-vi" => Planner::Anderson,
            _ if s.starts_with("r1mpi") => Planner::R1Mpi(parse_order(&s[5..])?),
            _ if s.starts_with("mpi") => Planner::Mpi(parse_order(&s[3..])?),
            _ => return Err(Error::InvalidSpec(format!("unknown planner {s:?}"))),
        })
    }
}
