//! Finite MDP model, Bellman operators, greedy policies and exact policy
//! evaluation.
//!
//! State-action pairs use the flat index `s * m + a` everywhere. The kernel is
//! stored dense as an `(n·m) × n` row-major array whose row `s * m + a` holds
//! `P(· | s, a)`. Costs are minimized.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{dist_inf, Scalar};

/// Finite discounted MDP `(S, A, P, c, γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp<T> {
    n: usize,
    m: usize,
    kernel: Vec<T>,
    cost: Vec<T>,
    gamma: T,
}

/// Deterministic stationary policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy(pub Vec<usize>);

/// Value function over states.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFn<T>(pub Vec<T>);

/// Action-value function over state-action pairs, flat index `s * m + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct QFn<T>(pub Vec<T>);

/// Output of one application of the Bellman optimality operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Backup<T> {
    pub values: ValueFn<T>,
    pub policy: Policy,
}

/// Markov chains induced by a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedChain<T> {
    /// `P^π`, `n × n`.
    pub p_state: DenseMatrix<T>,
    /// `P̄^π`, `(n·m) × (n·m)`.
    pub p_state_action: DenseMatrix<T>,
    /// `c^π`.
    pub cost_pi: Vec<T>,
}

/// Bellman and value errors of an iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateErrors<T> {
    pub bellman: T,
    pub value: T,
}

macro_rules! vector_newtype {
    ($name:ident) => {
        impl<T> Deref for $name<T> {
            type Target = [T];
            fn deref(&self) -> &[T] {
                &self.0
            }
        }

        impl<T> DerefMut for $name<T> {
            fn deref_mut(&mut self) -> &mut [T] {
                &mut self.0
            }
        }

        impl<T: Scalar> $name<T> {
            pub fn zeros(len: usize) -> Self {
                Self(vec![T::zero(); len])
            }

            /// Returns `self + α·1`.
            pub fn shifted(&self, alpha: T) -> Self {
                Self(self.0.iter().map(|&x| x + alpha).collect())
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|x| x.is_finite())
            }
        }

        impl<'a, T> IntoIterator for &'a $name<T> {
            type Item = &'a T;
            type IntoIter = std::slice::Iter<'a, T>;
            fn into_iter(self) -> Self::IntoIter {
                self.0.iter()
            }
        }

        impl<T> From<Vec<T>> for $name<T> {
            fn from(v: Vec<T>) -> Self {
                Self(v)
            }
        }
    };
}

vector_newtype!(ValueFn);
vector_newtype!(QFn);

impl Deref for Policy {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl Policy {
    /// FNV-1a digest of the action vector, stable across platforms.
    pub fn fingerprint(&self) -> u64 {
        crate::fnv1a(self.0.iter().map(|&a| a as u64))
    }
}

impl<T: Scalar> QFn<T> {
    pub fn get(&self, m: usize, s: usize, a: usize) -> T {
        self.0[s * m + a]
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Index and value of the smallest entry; ties go to the lowest index.
#[inline]
pub(crate) fn argmin<T: Scalar>(xs: &[T]) -> (usize, T) {
    let mut best = 0;
    let mut best_v = xs[0];
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x < best_v {
            best = i;
            best_v = x;
        }
    }
    (best, best_v)
}

/// Checks every model invariant.
pub fn validate_mdp<T: Scalar>(mdp: &Mdp<T>) -> Result<()> {
    validate_parts(mdp.n, mdp.m, &mdp.kernel, &mdp.cost, mdp.gamma)
}

fn validate_parts<T: Scalar>(n: usize, m: usize, kernel: &[T], cost: &[T], gamma: T) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidSpec(format!(
            "state and action counts must be positive (n={n}, m={m})"
        )));
    }
    check_len(n * m * n, kernel.len())?;
    check_len(n * m, cost.len())?;
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(Error::GammaOutOfRange(gamma.as_f64()));
    }
    for (row, probs) in kernel.chunks_exact(n).enumerate() {
        let mut sum = T::zero();
        for &p in probs {
            if !p.is_finite() || p < T::zero() {
                let deviation = if p.is_finite() { p.abs().as_f64() } else { f64::INFINITY };
                return Err(Error::RowNotStochastic { row, deviation });
            }
            sum += p;
        }
        let deviation = (sum - T::one()).abs().as_f64();
        if !(deviation <= T::ROW_SUM_TOL) {
            return Err(Error::RowNotStochastic { row, deviation });
        }
    }
    if let Some(index) = cost.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCost { index });
    }
    Ok(())
}

impl<T: Scalar> Mdp<T> {
    /// Builds and validates a model. `kernel` is the `(n·m) × n` row-major
    /// transition array and `cost` the flat `c(s, a)` vector.
    pub fn new(n: usize, m: usize, kernel: Vec<T>, cost: Vec<T>, gamma: T) -> Result<Self> {
        validate_parts(n, m, &kernel, &cost, gamma)?;
        Ok(Self { n, m, kernel, cost, gamma })
    }

    /// Like [`Mdp::new`] but first rescales every kernel row to sum to one.
    pub fn with_renormalized_rows(
        n: usize,
        m: usize,
        mut kernel: Vec<T>,
        cost: Vec<T>,
        gamma: T,
    ) -> Result<Self> {
        if n > 0 && kernel.len() == n * m * n {
            for row in kernel.chunks_exact_mut(n) {
                let s: T = row.iter().copied().sum();
                if s > T::zero() {
                    row.iter_mut().for_each(|p| *p /= s);
                }
            }
        }
        Self::new(n, m, kernel, cost, gamma)
    }

    /// Same model with another discount factor.
    pub fn with_gamma(&self, gamma: T) -> Result<Self> {
        Self::new(self.n, self.m, self.kernel.clone(), self.cost.clone(), gamma)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn cost(&self) -> &[T] {
        &self.cost
    }

    pub fn kernel(&self) -> &[T] {
        &self.kernel
    }

    /// `P(· | s, a)`.
    #[inline]
    pub fn kernel_row(&self, s: usize, a: usize) -> &[T] {
        let r = s * self.m + a;
        &self.kernel[r * self.n..(r + 1) * self.n]
    }

    /// `c(s, a) + γ Σ P(s⁺|s,a) v(s⁺)`.
    #[inline]
    pub fn action_value(&self, v: &[T], s: usize, a: usize) -> T {
        let ev: T = self
            .kernel_row(s, a)
            .iter()
            .zip(v)
            .map(|(&p, &x)| p * x)
            .sum();
        self.cost[s * self.m + a] + self.gamma * ev
    }

    /// One fused sweep computing `T(v)` and the greedy action of every state.
    pub(crate) fn sweep(&self, v: &[T], values: &mut [T], actions: &mut [usize]) {
        debug_assert_eq!(v.len(), self.n);
        let mut qs = vec![T::zero(); self.m];
        for s in 0..self.n {
            for (a, q) in qs.iter_mut().enumerate() {
                *q = self.action_value(v, s, a);
            }
            let (a, q) = argmin(&qs);
            values[s] = q;
            actions[s] = a;
        }
    }

    pub(crate) fn check_value_len(&self, v: &[T]) -> Result<()> {
        check_len(self.n, v.len())
    }

    pub(crate) fn check_q_len(&self, q: &[T]) -> Result<()> {
        check_len(self.n * self.m, q.len())
    }

    pub(crate) fn check_policy(&self, pi: &Policy) -> Result<()> {
        check_len(self.n, pi.len())?;
        match pi.iter().enumerate().find(|(_, &a)| a >= self.m) {
            Some((state, &action)) => Err(Error::InvalidAction { state, action }),
            None => Ok(()),
        }
    }

    /// `T(v)` together with the greedy policy (lowest-index tie-breaking).
    pub fn bellman_optimality(&self, v: &[T]) -> Result<Backup<T>> {
        self.check_value_len(v)?;
        let mut values = vec![T::zero(); self.n];
        let mut actions = vec![0; self.n];
        self.sweep(v, &mut values, &mut actions);
        Ok(Backup {
            values: ValueFn(values),
            policy: Policy(actions),
        })
    }

    /// `T̄(q)(s,a) = c(s,a) + γ Σ P(s⁺|s,a) min_{a⁺} q(s⁺,a⁺)`.
    pub fn bellman_q(&self, q: &[T]) -> Result<QFn<T>> {
        self.check_q_len(q)?;
        let vmin = state_minima(q, self.m);
        let out = (0..self.n * self.m)
            .map(|r| self.action_value(&vmin, r / self.m, r % self.m))
            .collect();
        Ok(QFn(out))
    }

    /// Greedy policy with respect to `v`.
    pub fn greedy_policy(&self, v: &[T]) -> Result<Policy> {
        Ok(self.bellman_optimality(v)?.policy)
    }

    /// `P^π`, `P̄^π` and `c^π`.
    pub fn induced_chain(&self, pi: &Policy) -> Result<InducedChain<T>> {
        self.check_policy(pi)?;
        let (n, m) = (self.n, self.m);
        let mut p_state = DenseMatrix::zeros(n, n);
        let mut p_state_action = DenseMatrix::zeros(n * m, n * m);
        for s in 0..n {
            p_state.row_mut(s).copy_from_slice(self.kernel_row(s, pi[s]));
            for a in 0..m {
                for (sp, &p) in self.kernel_row(s, a).iter().enumerate() {
                    p_state_action[(s * m + a, sp * m + pi[sp])] = p;
                }
            }
        }
        let cost_pi = (0..n).map(|s| self.cost[s * m + pi[s]]).collect();
        Ok(InducedChain {
            p_state,
            p_state_action,
            cost_pi,
        })
    }

    /// `I − γ P^π` for a policy already known to be valid.
    pub(crate) fn policy_resolvent(&self, actions: &[usize]) -> DenseMatrix<T> {
        let n = self.n;
        let mut a = DenseMatrix::zeros(n, n);
        for s in 0..n {
            let row = a.row_mut(s);
            for (x, &p) in row.iter_mut().zip(self.kernel_row(s, actions[s])) {
                *x = -self.gamma * p;
            }
            row[s] += T::one();
        }
        a
    }

    /// `v^π = (I − γ P^π)⁻¹ c^π` by direct factorization.
    pub fn policy_evaluation_exact(&self, pi: &Policy) -> Result<ValueFn<T>> {
        self.check_policy(pi)?;
        let a = self.policy_resolvent(pi);
        let c: Vec<T> = (0..self.n).map(|s| self.cost[s * self.m + pi[s]]).collect();
        a.solve(&c).map(ValueFn)
    }

    /// `f = P_πᵀ d` for the state chain of `actions`, without forming `P_π`.
    pub(crate) fn policy_transpose_apply(&self, actions: &[usize], d: &[T]) -> Vec<T> {
        let mut f = vec![T::zero(); self.n];
        for (s, &ds) in d.iter().enumerate() {
            if ds == T::zero() {
                continue;
            }
            for (o, &p) in f.iter_mut().zip(self.kernel_row(s, actions[s])) {
                *o += p * ds;
            }
        }
        f
    }

    /// `P_π x`.
    pub(crate) fn policy_apply(&self, actions: &[usize], x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|s| {
                self.kernel_row(s, actions[s])
                    .iter()
                    .zip(x)
                    .map(|(&p, &v)| p * v)
                    .sum()
            })
            .collect()
    }

    /// Serializes to the JSON model document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// `min_a q(s, a)` for every state.
pub(crate) fn state_minima<T: Scalar>(q: &[T], m: usize) -> Vec<T> {
    q.chunks_exact(m).map(|row| argmin(row).1).collect()
}

/// Greedy policy of a Q-function: `π(s) = argmin_a q(s, a)`.
pub fn greedy_policy_q<T: Scalar>(q: &[T], m: usize) -> Result<Policy> {
    if m == 0 || q.is_empty() || q.len() % m != 0 {
        return Err(Error::DimensionMismatch {
            expected: m.max(1) * (q.len() / m.max(1)).max(1),
            found: q.len(),
        });
    }
    Ok(Policy(q.chunks_exact(m).map(|row| argmin(row).0).collect()))
}

/// `(‖T(v) − v‖_∞, ‖v − v_ref‖_∞)`.
pub fn errors_against_reference<T: Scalar>(
    mdp: &Mdp<T>,
    v: &[T],
    reference: &[T],
) -> Result<IterateErrors<T>> {
    check_len(v.len(), reference.len())?;
    let tv = mdp.bellman_optimality(v)?;
    Ok(IterateErrors {
        bellman: dist_inf(&tv.values, v),
        value: dist_inf(v, reference),
    })
}

/// Q-function analogue of [`errors_against_reference`], using `T̄`.
pub fn q_errors_against_reference<T: Scalar>(
    mdp: &Mdp<T>,
    q: &[T],
    reference: &[T],
) -> Result<IterateErrors<T>> {
    check_len(q.len(), reference.len())?;
    let tq = mdp.bellman_q(q)?;
    Ok(IterateErrors {
        bellman: dist_inf(&tq, q),
        value: dist_inf(q, reference),
    })
}

/// On-disk model document. Field names are part of the file format.
#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct MdpDocument<T> {
    n: usize,
    m: usize,
    gamma: T,
    cost: Vec<T>,
    kernel: Vec<Vec<T>>,
}

impl<T: Scalar> Serialize for Mdp<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let doc = MdpDocument {
            n: self.n,
            m: self.m,
            gamma: self.gamma,
            cost: self.cost.clone(),
            kernel: self.kernel.chunks_exact(self.n).map(<[T]>::to_vec).collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Mdp<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = MdpDocument::<T>::deserialize(deserializer)?;
        if doc.kernel.len() != doc.n * doc.m {
            return Err(serde::de::Error::custom(format!(
                "kernel has {} rows, expected n*m = {}",
                doc.kernel.len(),
                doc.n * doc.m
            )));
        }
        if let Some(bad) = doc.kernel.iter().position(|r| r.len() != doc.n) {
            return Err(serde::de::Error::custom(format!(
                "kernel row {bad} has length {}, expected {}",
                doc.kernel[bad].len(),
                doc.n
            )));
        }
        let kernel = doc.kernel.into_iter().flatten().collect();
        Mdp::new(doc.n, doc.m, kernel, doc.cost, doc.gamma).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Two states, two actions, γ = 0.5. Action 0 jumps to state 0 and
    /// action 1 to state 1 from either state.
    pub fn m2() -> Mdp<f64> {
        let kernel = vec![
            1.0, 0.0, // (0,0)
            0.0, 1.0, // (0,1)
            1.0, 0.0, // (1,0)
            0.0, 1.0, // (1,1)
        ];
        Mdp::new(2, 2, kernel, vec![1.0, 2.5, 3.0, 0.0], 0.5).unwrap()
    }
}
