//! Environment generators (grid navigation, taxi, chain, torus ring, and an
//! access-control queue), softmax policy parameterizations, policy-value
//! landscape grids, and critical-discount-factor sweeps over environment
//! families.

use ndarray::{Array1, Array2, Array3, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{classify_chain, stationary_distribution};
use crate::error::{Error, Result};
use crate::eval::discounted_values;
use crate::mdp::{induce_chain, Mdp, PolicyTable};
use crate::solve::{blackwell_gamma, BlackwellConfig, BlackwellEstimate};
use crate::transform::{to_reset_model, AbsorbingModel};

/// A differentiable softmax policy family: logits(s, a) = theta . phi(s, a),
/// with the softmax restricted to the actions available in each state.
#[derive(Debug, Clone)]
pub struct PolicyFeaturizer {
    /// features[[s, a, k]] = phi_k(s, a)
    features: Array3<f64>,
}

impl PolicyFeaturizer {
    pub fn new(features: Array3<f64>) -> Result<Self> {
        if features.dim().2 == 0 {
            return Err(Error::Validation("feature dimension must be >= 1".into()));
        }
        Ok(Self { features })
    }

    /// phi_k(s, a) = 1 when a == `action` and s is in `groups[k]`: a compact
    /// two-parameter family used for value landscapes. `k = groups.len()`.
    pub fn state_group_indicator(
        num_states: usize,
        num_actions: usize,
        action: usize,
        groups: &[Vec<usize>],
    ) -> Result<Self> {
        if action >= num_actions {
            return Err(Error::Domain("indicator action out of range".into()));
        }
        let k = groups.len();
        let mut features = Array3::zeros((num_states, num_actions, k));
        for (dim, group) in groups.iter().enumerate() {
            for &s in group {
                if s >= num_states {
                    return Err(Error::Domain(format!("group state {s} out of range")));
                }
                features[[s, action, dim]] = 1.0;
            }
        }
        Self::new(features)
    }

    pub fn param_dim(&self) -> usize {
        self.features.dim().2
    }

    pub fn num_states(&self) -> usize {
        self.features.dim().0
    }

    pub fn num_actions(&self) -> usize {
        self.features.dim().1
    }

    pub fn feature(&self, s: usize, a: usize) -> ArrayView1<'_, f64> {
        self.features.slice(ndarray::s![s, a, ..])
    }

    /// The policy at parameter vector `theta`.
    pub fn policy(&self, mdp: &Mdp, theta: &[f64]) -> Result<PolicyTable> {
        Ok(self.policy_and_grads(mdp, theta)?.0)
    }

    /// Policy plus the exact derivative tensor dpi[[k, s, a]] = d pi(a|s) / d theta_k.
    pub fn policy_and_grads(
        &self,
        mdp: &Mdp,
        theta: &[f64],
    ) -> Result<(PolicyTable, Array3<f64>)> {
        let (ns, na, k) = self.features.dim();
        if ns != mdp.num_states() || na != mdp.num_actions() {
            return Err(Error::Dimension(
                "featurizer shape does not match the MDP".into(),
            ));
        }
        if theta.len() != k {
            return Err(Error::Dimension(format!(
                "theta has {} entries, featurizer expects {k}",
                theta.len()
            )));
        }
        let mut probs = Array2::zeros((ns, na));
        let mut dpi = Array3::zeros((k, ns, na));
        for s in 0..ns {
            let acts = mdp.available_actions(s);
            let logits: Vec<f64> = acts
                .iter()
                .map(|&a| {
                    (0..k)
                        .map(|d| theta[d] * self.features[[s, a, d]])
                        .sum::<f64>()
                })
                .collect();
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            for (i, &a) in acts.iter().enumerate() {
                probs[[s, a]] = exps[i] / z;
            }
            // d pi(a|s)/d theta_k = pi(a|s) (phi_k(s,a) - sum_b pi(b|s) phi_k(s,b))
            for d in 0..k {
                let mean_phi: f64 = acts
                    .iter()
                    .map(|&b| probs[[s, b]] * self.features[[s, b, d]])
                    .sum();
                for &a in &acts {
                    dpi[[d, s, a]] = probs[[s, a]] * (self.features[[s, a, d]] - mean_phi);
                }
            }
        }
        Ok((PolicyTable::new(probs)?, dpi))
    }
}

/// Sample one environment step. Thin wrapper over [`Mdp::sample_transition`]
/// so simulators can stay generic over the generator families here.
pub fn sample_step<R: Rng>(mdp: &Mdp, s: usize, a: usize, rng: &mut R) -> Result<(usize, f64)> {
    mdp.sample_transition(s, a, rng)
}

/// Dense random MDP: transition rows are normalized iid uniforms (so every
/// induced chain is irreducible with probability one), rewards are uniform
/// in [-1, 1]. A workhorse substrate for property tests and oracles.
pub fn random_dense_mdp(num_states: usize, num_actions: usize, seed: u64) -> Mdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_dense_mdp_with(&mut rng, num_states, num_actions, false)
}

/// As [`random_dense_mdp`] with a caller-owned generator;
/// `state_only_rewards` forces r(s, a) to ignore the action.
pub fn random_dense_mdp_with<R: Rng>(
    rng: &mut R,
    num_states: usize,
    num_actions: usize,
    state_only_rewards: bool,
) -> Mdp {
    let mut t = Array3::zeros((num_states, num_actions, num_states));
    let mut r = Array2::zeros((num_states, num_actions));
    for s in 0..num_states {
        let state_reward = rng.random_range(-1.0..1.0);
        for a in 0..num_actions {
            let mut row: Vec<f64> = (0..num_states)
                .map(|_| rng.random_range(1e-3..1.0))
                .collect();
            let z: f64 = row.iter().sum();
            for v in &mut row {
                *v /= z;
            }
            // Renormalize exactly against accumulated rounding.
            let z: f64 = row.iter().sum();
            for (s2, v) in row.iter().enumerate() {
                t[[s, a, s2]] = v / z;
            }
            r[[s, a]] = if state_only_rewards {
                state_reward
            } else {
                rng.random_range(-1.0..1.0)
            };
        }
    }
    let isd = Array1::from_elem(num_states, 1.0 / num_states as f64);
    Mdp::new(t, r, isd).expect("random rows are stochastic by construction")
}

// ------------------------------------------------------------------
// Environment families.

/// Square grid navigation, episodic. `n * n - 1` navigable cells plus the
/// terminal state in the goal slot (bottom-right corner). Four compass
/// actions; the chosen direction is taken with probability `slip_q`,
/// otherwise one of {stay, other three directions} uniformly. Off-grid moves
/// stay in place. Entering the goal pays +1 and terminates; every other
/// movement costs -1. The initial distribution is uniform over navigable
/// cells.
pub fn gridnav(n: usize, slip_q: f64) -> Result<AbsorbingModel> {
    if n < 2 {
        return Err(Error::Domain("grid side must be at least 2".into()));
    }
    if !(0.0..=1.0).contains(&slip_q) {
        return Err(Error::Domain("slip probability must be in [0, 1]".into()));
    }
    let cells = n * n;
    let goal = cells - 1; // bottom-right cell; doubles as the terminal state index
    let num_states = cells;
    let num_actions = 5; // N, E, S, W + terminal self-loop
    let terminal_action = 4;
    let mut t = Array3::zeros((num_states, num_actions, num_states));
    let mut triple = Array3::zeros((num_states, num_actions, num_states));
    let mut available = Array2::from_elem((num_states, num_actions), false);

    let step = |cell: usize, dir: usize| -> usize {
        let (row, col) = (cell / n, cell % n);
        let (r2, c2) = match dir {
            0 => (row.wrapping_sub(1), col), // north
            1 => (row, col + 1),             // east
            2 => (row + 1, col),             // south
            3 => (row, col.wrapping_sub(1)), // west
            _ => (row, col),
        };
        if r2 >= n || c2 >= n {
            cell // off-grid: stay
        } else {
            r2 * n + c2
        }
    };

    for cell in 0..cells {
        if cell == goal {
            continue;
        }
        for dir in 0..4 {
            available[[cell, dir]] = true;
            let mut add = |target: usize, p: f64| {
                t[[cell, dir, target]] += p;
            };
            add(step(cell, dir), slip_q);
            let alt = (1.0 - slip_q) / 4.0;
            add(cell, alt); // stay
            for other in 0..4 {
                if other != dir {
                    add(step(cell, other), alt);
                }
            }
        }
        for dir in 0..4 {
            for s2 in 0..num_states {
                triple[[cell, dir, s2]] = if s2 == goal { 1.0 } else { -1.0 };
            }
        }
        // Masked terminal-action slot: well-formed self-loop at zero reward.
        t[[cell, terminal_action, cell]] = 1.0;
    }
    available[[goal, terminal_action]] = true;
    t[[goal, terminal_action, goal]] = 1.0;
    for dir in 0..4 {
        t[[goal, dir, goal]] = 1.0;
    }
    let mut isd = Array1::zeros(num_states);
    let navigable = (cells - 1) as f64;
    for cell in 0..cells - 1 {
        isd[cell] = 1.0 / navigable;
    }
    let mut reward = Array2::zeros((num_states, num_actions));
    for s in 0..num_states {
        for a in 0..num_actions {
            let mut acc = 0.0;
            for s2 in 0..num_states {
                acc += t[[s, a, s2]] * triple[[s, a, s2]];
            }
            reward[[s, a]] = acc;
        }
    }
    let mdp = Mdp::with_parts(t, reward, Some(triple), isd, available, None, None)?;
    AbsorbingModel::new(mdp, goal, terminal_action)
}

/// Depot positions of the taxi grid: R, G, Y, B.
fn taxi_depots(n: usize) -> [(usize, usize); 4] {
    [(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 2)]
}

/// Vertical barriers of the taxi grid as (row, col) pairs blocking movement
/// between (row, col) and (row, col + 1).
///
/// The 5x5 pattern is the classic layout. For n = 5k the base barrier at
/// (r, c) is scaled to a vertical run of k barriers at rows k*r .. k*r+k-1,
/// column k*c + (k - 1), so the obstacle count grows as 6*k^2 while the four
/// depots stay fixed.
fn taxi_walls(n: usize) -> Vec<(usize, usize)> {
    let base = [(0usize, 1usize), (1, 1), (3, 0), (3, 2), (4, 0), (4, 2)];
    let k = n / 5;
    let mut out = Vec::new();
    for &(r, c) in &base {
        for j in 0..k {
            out.push((k * r + j, k * c + (k - 1)));
        }
    }
    out
}

/// Grid taxi, episodic: the taxi must pick the passenger up at one of four
/// depots and drop them at the destination depot. State encodes
/// (taxi cell, passenger location in {4 depots, in-taxi}, destination depot);
/// the terminal state is appended last. Movement costs -1, illegal pickup or
/// dropoff costs -10, successful dropoff pays +20 and terminates.
pub fn taxi(n: usize) -> Result<AbsorbingModel> {
    if !(n == 5 || n == 10 || n == 15) {
        return Err(Error::Domain("taxi supports n in {5, 10, 15}".into()));
    }
    let depots = taxi_depots(n);
    let walls = taxi_walls(n);
    let cells = n * n;
    let base_states = cells * 5 * 4;
    let num_states = base_states + 1;
    let terminal = base_states;
    let num_actions = 7; // S, N, E, W, pickup, dropoff + terminal self-loop
    let terminal_action = 6;
    let encode = |cell: usize, pass: usize, dest: usize| (cell * 5 + pass) * 4 + dest;
    let wall_between = |r: usize, c: usize| walls.contains(&(r, c));

    let mut t = Array3::zeros((num_states, num_actions, num_states));
    let mut reward = Array2::zeros((num_states, num_actions));
    let mut available = Array2::from_elem((num_states, num_actions), false);

    for cell in 0..cells {
        let (row, col) = (cell / n, cell % n);
        for pass in 0..5 {
            for dest in 0..4 {
                let s = encode(cell, pass, dest);
                for a in 0..6 {
                    available[[s, a]] = true;
                }
                // Moves: 0 south, 1 north, 2 east, 3 west.
                let south = if row + 1 < n { (row + 1, col) } else { (row, col) };
                let north = if row > 0 { (row - 1, col) } else { (row, col) };
                let east = if col + 1 < n && !wall_between(row, col) {
                    (row, col + 1)
                } else {
                    (row, col)
                };
                let west = if col > 0 && !wall_between(row, col - 1) {
                    (row, col - 1)
                } else {
                    (row, col)
                };
                for (a, (r2, c2)) in [(0, south), (1, north), (2, east), (3, west)] {
                    let s2 = encode(r2 * n + c2, pass, dest);
                    t[[s, a, s2]] = 1.0;
                    reward[[s, a]] = -1.0;
                }
                // Pickup.
                let at_pass_depot = pass < 4 && depots[pass] == (row, col);
                if at_pass_depot {
                    t[[s, 4, encode(cell, 4, dest)]] = 1.0;
                    reward[[s, 4]] = -1.0;
                } else {
                    t[[s, 4, s]] = 1.0;
                    reward[[s, 4]] = -10.0;
                }
                // Dropoff.
                let depot_here = depots.iter().position(|&d| d == (row, col));
                match (pass, depot_here) {
                    (4, Some(d)) if d == dest => {
                        t[[s, 5, terminal]] = 1.0;
                        reward[[s, 5]] = 20.0;
                    }
                    (4, Some(d)) => {
                        t[[s, 5, encode(cell, d, dest)]] = 1.0;
                        reward[[s, 5]] = -1.0;
                    }
                    _ => {
                        t[[s, 5, s]] = 1.0;
                        reward[[s, 5]] = -10.0;
                    }
                }
                // Masked terminal-action slot.
                t[[s, terminal_action, s]] = 1.0;
            }
        }
    }
    available[[terminal, terminal_action]] = true;
    for a in 0..num_actions {
        t[[terminal, a, terminal]] = 1.0;
    }
    // Start uniformly: taxi anywhere, passenger waiting at a depot different
    // from the destination.
    let mut isd = Array1::zeros(num_states);
    let starts = (cells * 4 * 3) as f64;
    for cell in 0..cells {
        for pass in 0..4 {
            for dest in 0..4 {
                if pass != dest {
                    isd[encode(cell, pass, dest)] = 1.0 / starts;
                }
            }
        }
    }
    let mdp = Mdp::with_parts(t, reward, None, isd, available, None, None)?;
    AbsorbingModel::new(mdp, terminal, terminal_action)
}

/// Parameters of the linear chain environment.
#[derive(Debug, Clone, Copy)]
pub struct ChainParams {
    /// Probability that the opposite action's effect occurs instead.
    pub slip: f64,
    /// Reward of the self-loop at the far end under the advance effect.
    pub advance_reward: f64,
    /// Reward of every jump back to the first state.
    pub restart_reward: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            slip: 0.2,
            advance_reward: 10.0,
            restart_reward: 2.0,
        }
    }
}

/// Linear chain of `n` states with two actions: advance (one step toward the
/// far end, which self-loops at a large reward) or restart (jump to state 0
/// at a small immediate reward). Each action slips into the other's effect
/// with probability `slip`, which makes every induced chain irreducible.
pub fn chain_env(n: usize, params: ChainParams) -> Result<Mdp> {
    if n < 2 {
        return Err(Error::Domain("chain needs at least 2 states".into()));
    }
    if !(0.0..=0.5).contains(&params.slip) {
        return Err(Error::Domain("slip must be in [0, 0.5]".into()));
    }
    let mut t = Array3::zeros((n, 2, n));
    let mut triple = Array3::zeros((n, 2, n));
    for s in 0..n {
        let advance_target = (s + 1).min(n - 1);
        // action 0 = advance, action 1 = restart; slip swaps the effects.
        t[[s, 0, advance_target]] += 1.0 - params.slip;
        t[[s, 0, 0]] += params.slip;
        t[[s, 1, 0]] += 1.0 - params.slip;
        t[[s, 1, advance_target]] += params.slip;
        for a in 0..2 {
            // Rewards ride on the realized transition: restarts pay the
            // restart reward, the far-end self-loop pays the advance reward.
            triple[[s, a, 0]] = params.restart_reward;
            if s == n - 1 {
                triple[[s, a, n - 1]] = params.advance_reward;
            }
        }
    }
    // State 0's restart effect and advance-from-last overlap are handled by
    // accumulation above; normalize the double-write at s = 0 where the
    // advance target of the restart slip coincides with state 0.
    let isd = Array1::from_elem(n, 1.0 / n as f64);
    Mdp::from_triple_rewards(t, triple, isd)
}

/// Parameters of the ring (torus) environment.
#[derive(Debug, Clone, Copy)]
pub struct TorusParams {
    pub num_states: usize,
    /// Probability of moving in the chosen direction; the opposite direction
    /// otherwise.
    pub slip: f64,
    /// Reward for arriving at state 0.
    pub base_reward: f64,
    /// Reward for arriving at the state opposite to 0 (the swept constant).
    pub opposite_reward: f64,
}

impl Default for TorusParams {
    fn default() -> Self {
        Self {
            num_states: 6,
            slip: 0.9,
            base_reward: 2.0,
            opposite_reward: 1.0,
        }
    }
}

/// Ring of states with clockwise/counterclockwise actions and two reward
/// sites: arriving at state 0 pays `base_reward`, arriving at the opposite
/// site pays `opposite_reward`. Both directions keep positive probability,
/// so every stationary policy induces an irreducible chain.
pub fn torus_env(params: TorusParams) -> Result<Mdp> {
    let k = params.num_states;
    if k < 4 {
        return Err(Error::Domain("ring needs at least 4 states".into()));
    }
    if !(0.5..1.0).contains(&params.slip) {
        return Err(Error::Domain("slip must be in [0.5, 1)".into()));
    }
    let opposite = k / 2;
    let site_reward = |s: usize| -> f64 {
        if s == 0 {
            params.base_reward
        } else if s == opposite {
            params.opposite_reward
        } else {
            0.0
        }
    };
    let mut t = Array3::zeros((k, 2, k));
    let mut triple = Array3::zeros((k, 2, k));
    for s in 0..k {
        let cw = (s + 1) % k;
        let ccw = (s + k - 1) % k;
        t[[s, 0, cw]] += params.slip;
        t[[s, 0, ccw]] += 1.0 - params.slip;
        t[[s, 1, ccw]] += params.slip;
        t[[s, 1, cw]] += 1.0 - params.slip;
        for a in 0..2 {
            triple[[s, a, cw]] = site_reward(cw);
            triple[[s, a, ccw]] = site_reward(ccw);
        }
    }
    let isd = Array1::from_elem(k, 1.0 / k as f64);
    Mdp::from_triple_rewards(t, triple, isd)
}

/// Parameters of the access-control queue.
#[derive(Debug, Clone)]
pub struct AccessControlParams {
    /// Per-step probability that a busy server frees up.
    pub free_prob: f64,
    /// Customer priorities, which double as acceptance rewards.
    pub priorities: Vec<f64>,
}

impl Default for AccessControlParams {
    fn default() -> Self {
        Self {
            free_prob: 0.06,
            priorities: vec![1.0, 2.0, 4.0, 8.0],
        }
    }
}

/// Queueing task: customers of random priority arrive at the head of an
/// infinite queue; each step the head customer is accepted (reward equal to
/// their priority, occupying a server) or rejected (reward 0). Busy servers
/// free independently each step. State = (free servers, head priority);
/// accepting is unavailable when no server is free.
pub fn access_control(n_servers: usize, params: AccessControlParams) -> Result<Mdp> {
    if n_servers == 0 {
        return Err(Error::Domain("need at least one server".into()));
    }
    if !(0.0 < params.free_prob && params.free_prob < 1.0) {
        return Err(Error::Domain("free probability must be in (0, 1)".into()));
    }
    let np = params.priorities.len();
    if np == 0 {
        return Err(Error::Domain("need at least one priority".into()));
    }
    let n_states = (n_servers + 1) * np;
    let encode = |free: usize, pr: usize| free * np + pr;
    let mut t = Array3::zeros((n_states, 2, n_states));
    let mut reward = Array2::zeros((n_states, 2));
    let mut available = Array2::from_elem((n_states, 2), false);
    for free in 0..=n_servers {
        for pr in 0..np {
            let s = encode(free, pr);
            // Action 0: reject.
            available[[s, 0]] = true;
            let busy = n_servers - free;
            for released in 0..=busy {
                let p = binomial_pmf(busy, released, params.free_prob);
                for pr2 in 0..np {
                    t[[s, 0, encode(free + released, pr2)]] += p / np as f64;
                }
            }
            // Action 1: accept, if a server is free.
            if free > 0 {
                available[[s, 1]] = true;
                reward[[s, 1]] = params.priorities[pr];
                let busy = busy + 1;
                for released in 0..=busy {
                    let p = binomial_pmf(busy, released, params.free_prob);
                    for pr2 in 0..np {
                        t[[s, 1, encode(free - 1 + released, pr2)]] += p / np as f64;
                    }
                }
            } else {
                t[[s, 1, s]] = 1.0; // masked filler row
            }
        }
    }
    let mut isd = Array1::zeros(n_states);
    for pr in 0..np {
        isd[encode(n_servers, pr)] = 1.0 / np as f64;
    }
    Mdp::with_parts(t, reward, None, isd, available, None, None)
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let mut c = 1.0f64;
    for i in 0..k {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

// ------------------------------------------------------------------
// Policy-value landscapes and family sweeps.

/// Rectangular grid over two policy parameters.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub theta1: (f64, f64),
    pub theta2: (f64, f64),
    pub resolution: usize,
}

#[derive(Debug, Clone)]
pub struct LandscapeCell {
    pub theta1: f64,
    pub theta2: f64,
    /// Constant gain of the induced chain; None when the cell's chain is not
    /// unichain.
    pub gain: Option<f64>,
    /// (1 - gamma) * v_gamma(s0) per requested gamma.
    pub scaled_discounted: Vec<Option<f64>>,
    pub unichain: bool,
}

#[derive(Debug, Clone)]
pub struct LandscapeGrid {
    pub gammas: Vec<f64>,
    pub resolution: usize,
    pub cells: Vec<LandscapeCell>,
}

/// Which surface of a landscape to query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LandscapeKey {
    Gain,
    /// Index into the grid's gamma list.
    Discounted(usize),
}

impl LandscapeGrid {
    /// Coordinates of the maximizing cell for one surface (first maximum in
    /// row-major order). None when every cell is invalid.
    pub fn argmax_cell(&self, key: LandscapeKey) -> Option<(f64, f64)> {
        let mut best: Option<(f64, (f64, f64))> = None;
        for cell in &self.cells {
            let value = match key {
                LandscapeKey::Gain => cell.gain,
                LandscapeKey::Discounted(i) => cell.scaled_discounted[i],
            };
            if let Some(v) = value {
                if best.map(|(bv, _)| v > bv).unwrap_or(true) {
                    best = Some((v, (cell.theta1, cell.theta2)));
                }
            }
        }
        best.map(|(_, at)| at)
    }

    /// CSV rows `theta1,theta2,key,value` with keys `v_gain` and
    /// `v_gamma_<gamma>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta1,theta2,key,value\n");
        for cell in &self.cells {
            if let Some(g) = cell.gain {
                out.push_str(&format!("{},{},v_gain,{}\n", cell.theta1, cell.theta2, g));
            }
            for (i, v) in cell.scaled_discounted.iter().enumerate() {
                if let Some(v) = v {
                    out.push_str(&format!(
                        "{},{},v_gamma_{},{}\n",
                        cell.theta1, cell.theta2, self.gammas[i], v
                    ));
                }
            }
        }
        out
    }
}

/// Exactly evaluate the gain and scaled discounted values of the softmax
/// policy family over a parameter grid, from start state `s0`. Cells whose
/// induced chain is not unichain are recorded as invalid rather than failing
/// the whole grid.
pub fn landscape_grid(
    mdp: &Mdp,
    feat: &PolicyFeaturizer,
    grid: GridSpec,
    gammas: &[f64],
    s0: usize,
) -> Result<LandscapeGrid> {
    if feat.param_dim() != 2 {
        return Err(Error::Dimension("landscapes use two-parameter policies".into()));
    }
    if grid.resolution < 2 {
        return Err(Error::Domain("grid resolution must be at least 2".into()));
    }
    if s0 >= mdp.num_states() {
        return Err(Error::Domain(format!("start state {s0} out of range")));
    }
    for &g in gammas {
        if !(0.0..1.0).contains(&g) {
            return Err(Error::Domain(format!("gamma {g} out of [0, 1)")));
        }
    }
    let res = grid.resolution;
    let axis = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (res - 1) as f64;
    let indices: Vec<(usize, usize)> =
        (0..res).flat_map(|i| (0..res).map(move |j| (i, j))).collect();
    let cells: Vec<LandscapeCell> = indices
        .par_iter()
        .map(|&(i, j)| {
            let t1 = axis(grid.theta1.0, grid.theta1.1, i);
            let t2 = axis(grid.theta2.0, grid.theta2.1, j);
            let policy = feat.policy(mdp, &[t1, t2])?;
            let chain = induce_chain(mdp, &policy)?;
            let report = classify_chain(&chain);
            if !report.is_unichain() {
                return Ok(LandscapeCell {
                    theta1: t1,
                    theta2: t2,
                    gain: None,
                    scaled_discounted: vec![None; gammas.len()],
                    unichain: false,
                });
            }
            let pstar = stationary_distribution(&chain, s0)?;
            let g = pstar.dot(chain.r());
            let mut scaled = Vec::with_capacity(gammas.len());
            for &gamma in gammas {
                let v = discounted_values(&chain, gamma)?;
                scaled.push(Some((1.0 - gamma) * v[s0]));
            }
            Ok(LandscapeCell {
                theta1: t1,
                theta2: t2,
                gain: Some(g),
                scaled_discounted: scaled,
                unichain: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeGrid {
        gammas: gammas.to_vec(),
        resolution: res,
        cells,
    })
}

/// A two-parameter featurizer splitting the states into low/high halves,
/// each with its own logit for `action`. The default parameterization for
/// landscape plots.
pub fn half_split_featurizer(mdp: &Mdp, action: usize) -> Result<PolicyFeaturizer> {
    let n = mdp.num_states();
    let mid = n / 2;
    PolicyFeaturizer::state_group_indicator(
        n,
        mdp.num_actions(),
        action,
        &[(0..mid).collect(), (mid..n).collect()],
    )
}

/// Environment family selector for critical-discount-factor sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Knob: number of states.
    Chain,
    /// Knob: reward constant at the opposite site.
    Torus,
    /// Knob: number of servers.
    AccessControl,
    /// Knob: grid side; the episodic model is converted to its resetting
    /// form before solving.
    Gridnav,
    /// Knob: self-loop reward (single-policy family, so the critical factor
    /// is identically zero).
    Loop,
}

/// Build one family instance at a knob value.
pub fn family_instance(family: Family, knob: f64) -> Result<Mdp> {
    match family {
        Family::Chain => chain_env(knob as usize, ChainParams::default()),
        Family::Torus => torus_env(TorusParams {
            opposite_reward: knob,
            ..TorusParams::default()
        }),
        Family::AccessControl => access_control(knob as usize, AccessControlParams::default()),
        Family::Gridnav => {
            let model = gridnav(knob as usize, 0.9)?;
            Ok(to_reset_model(&model)?.mdp().clone())
        }
        Family::Loop => Ok(crate::fixtures::single_loop(knob)),
    }
}

/// Estimate the critical discount factor across one environment family,
/// returning (knob, estimate) pairs in input order.
pub fn gamma_bw_family_sweep(
    family: Family,
    knobs: &[f64],
    cfg: BlackwellConfig,
) -> Result<Vec<(f64, BlackwellEstimate)>> {
    let mut out = Vec::with_capacity(knobs.len());
    for &knob in knobs {
        let mdp = family_instance(family, knob)?;
        out.push((knob, blackwell_gamma(&mdp, cfg)?));
    }
    Ok(out)
}
