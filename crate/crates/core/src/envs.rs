//! Benchmark model generators: Garnet, Graph and Gridworld.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::scalar::Scalar;

/// Random Garnet model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GarnetSpec {
    pub n: usize,
    pub m: usize,
    /// Successor states per state-action pair.
    pub branching: usize,
    pub seed: u64,
}

/// Garnet model: each `(s, a)` moves to `branching` distinct successors drawn
/// uniformly, with probabilities given by the gaps between sorted uniform
/// cut points; costs are uniform on `[0, 1)`.
pub fn gen_garnet<T: Scalar>(spec: &GarnetSpec, gamma: T) -> Result<Mdp<T>> {
    let GarnetSpec { n, m, branching, seed } = *spec;
    if n == 0 || m == 0 || branching == 0 {
        return Err(Error::InvalidSpec(format!(
            "garnet needs n, m, branching ≥ 1 (got {n}, {m}, {branching})"
        )));
    }
    if branching > n {
        return Err(Error::BranchingTooLarge { branching, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kernel = vec![T::zero(); n * m * n];
    let mut cost = Vec::with_capacity(n * m);
    let mut cuts = Vec::with_capacity(branching + 1);
    for row in kernel.chunks_exact_mut(n) {
        let successors = index::sample(&mut rng, n, branching);
        // Zero-width gaps have probability zero; redraw if one shows up.
        let probs = loop {
            cuts.clear();
            cuts.push(0.0f64);
            cuts.extend((1..branching).map(|_| rng.gen::<f64>()));
            cuts.push(1.0);
            cuts.sort_by(f64::total_cmp);
            let gaps: Vec<f64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
            if gaps.iter().all(|&g| g > 0.0) {
                break gaps;
            }
        };
        for (j, p) in successors.iter().zip(probs) {
            row[j] = T::lit(p);
        }
        cost.push(T::lit(rng.gen::<f64>()));
    }
    Mdp::new(n, m, kernel, cost, gamma)
}

/// Directed graph behind [`gen_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphLayout {
    /// Out-neighbours of every node; the ring edge `i → i+1` comes first.
    pub out_neighbors: Vec<Vec<usize>>,
}

impl GraphLayout {
    pub fn max_out_degree(&self) -> usize {
        self.out_neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Stochastic shortest-path style graph model.
///
/// Node `i` has the ring edge `i → i+1 (mod N)` plus zero to two random chords.
/// Action `a < deg(i)` tries to move along the `a`-th out-edge; actions beyond
/// the out-degree try to stay put. An attempted move succeeds with
/// probability `1 − slip`, otherwise the next node is uniform over the
/// out-neighbours. Costs are uniform on `[0, 1)` per `(s, a)`.
pub fn gen_graph<T: Scalar>(nodes: usize, slip: f64, seed: u64, gamma: T) -> Result<Mdp<T>> {
    gen_graph_with_layout(nodes, slip, seed, gamma).map(|(mdp, _)| mdp)
}

/// [`gen_graph`] also returning the sampled graph.
pub fn gen_graph_with_layout<T: Scalar>(
    nodes: usize,
    slip: f64,
    seed: u64,
    gamma: T,
) -> Result<(Mdp<T>, GraphLayout)> {
    if nodes < 2 {
        return Err(Error::InvalidSpec(format!("graph needs at least 2 nodes, got {nodes}")));
    }
    if !(0.0..1.0).contains(&slip) {
        return Err(Error::InvalidSlip(slip));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out_neighbors = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let ring = (i + 1) % nodes;
        let mut outs = vec![ring];
        let candidates: Vec<usize> = (0..nodes).filter(|&j| j != i && j != ring).collect();
        let chords = rng.gen_range(0..=2usize).min(candidates.len());
        for k in index::sample(&mut rng, candidates.len(), chords).into_iter() {
            outs.push(candidates[k]);
        }
        out_neighbors.push(outs);
    }
    let layout = GraphLayout { out_neighbors };
    let m = layout.max_out_degree();

    let mut kernel = vec![0.0f64; nodes * m * nodes];
    let mut cost = Vec::with_capacity(nodes * m);
    for (s, outs) in layout.out_neighbors.iter().enumerate() {
        let spread = slip / outs.len() as f64;
        for a in 0..m {
            let target = outs.get(a).copied().unwrap_or(s);
            let row = &mut kernel[(s * m + a) * nodes..(s * m + a + 1) * nodes];
            row[target] += 1.0 - slip;
            for &j in outs {
                row[j] += spread;
            }
            cost.push(T::lit(rng.gen::<f64>()));
        }
    }
    let kernel = kernel.into_iter().map(T::lit).collect();
    Ok((Mdp::new(nodes, m, kernel, cost, gamma)?, layout))
}

/// Reward structure at the goal cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridworldVariant {
    /// Staying at the goal earns reward 1 per step (cost −1).
    AbsorbingPositiveReward,
    /// The goal is a zero-cost terminal state.
    TerminalZeroReward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridworldSpec {
    pub rows: usize,
    pub cols: usize,
    pub variant: GridworldVariant,
    /// `(row, col)` of the absorbing goal.
    pub goal: (usize, usize),
    /// Cost of every move outside the goal.
    pub step_cost: f64,
}

impl GridworldSpec {
    /// 5 × 5 grid with the goal in the last cell and unit step cost.
    pub fn default_for(variant: GridworldVariant) -> Self {
        Self {
            rows: 5,
            cols: 5,
            variant,
            goal: (4, 4),
            step_cost: 1.0,
        }
    }

    pub fn goal_state(&self) -> usize {
        self.goal.0 * self.cols + self.goal.1
    }
}

/// Actions of [`gen_gridworld`], in index order.
pub const GRID_ACTIONS: [&str; 4] = ["up", "down", "left", "right"];

/// Deterministic gridworld. States are cells in row-major order; moves into a
/// wall leave the agent in place; every action at the goal self-loops.
pub fn gen_gridworld<T: Scalar>(spec: &GridworldSpec, gamma: T) -> Result<Mdp<T>> {
    let &GridworldSpec {
        rows,
        cols,
        variant,
        goal,
        step_cost,
    } = spec;
    if rows * cols < 2 {
        return Err(Error::InvalidSpec("gridworld needs at least two cells".into()));
    }
    if goal.0 >= rows || goal.1 >= cols {
        return Err(Error::GoalOutOfBounds {
            row: goal.0,
            col: goal.1,
        });
    }
    let n = rows * cols;
    let m = GRID_ACTIONS.len();
    let g = spec.goal_state();
    let goal_cost = match variant {
        GridworldVariant::AbsorbingPositiveReward => -1.0,
        GridworldVariant::TerminalZeroReward => 0.0,
    };
    let mut kernel = vec![T::zero(); n * m * n];
    let mut cost = Vec::with_capacity(n * m);
    for s in 0..n {
        let (r, c) = (s / cols, s % cols);
        for a in 0..m {
            let next = if s == g {
                s
            } else {
                match a {
                    0 if r > 0 => s - cols,
                    1 if r + 1 < rows => s + cols,
                    2 if c > 0 => s - 1,
                    3 if c + 1 < cols => s + 1,
                    _ => s,
                }
            };
            kernel[(s * m + a) * n + next] = T::one();
            cost.push(T::lit(if s == g { goal_cost } else { step_cost }));
        }
    }
    Mdp::new(n, m, kernel, cost, gamma)
}
