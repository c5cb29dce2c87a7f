//! Optimal-policy computation under each criterion: discounted value and
//! policy iteration (with full argmax sets), average-reward policy iteration
//! with a gain/bias two-stage improvement, relative value iteration,
//! brute-force n-discount optimal sets over the deterministic policy space,
//! and an empirical estimate of the critical (Blackwell) discount factor.

use ndarray::Array1;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::classify_chain;
use crate::error::{Error, Result};
use crate::eval::{discounted_values, laurent_coefficients, q_from_values};
use crate::linalg::{inf_norm_vec, span};
use crate::mdp::{enumerate_deterministic_policies, induce_chain, Mdp, PolicyTable};

/// Absolute tolerance for "these action values are tied" when assembling
/// optimal-action sets. Deliberately explicit: near gamma = 1 the comparison
/// blurs bias-level differences, so callers can widen or tighten it.
pub const DEFAULT_SET_TOL: f64 = 1e-9;

/// Strict-improvement threshold inside policy iteration; switching below it
/// would chase solver rounding noise instead of real improvements.
const IMPROVEMENT_TOL: f64 = 1e-9;

const MAX_PI_ITERS: usize = 10_000;
const MAX_VI_ITERS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "criterion", rename_all = "kebab-case")]
pub enum Criterion {
    Discounted { gamma: f64 },
    Gain,
    NDiscount { n: i32 },
    Total,
}

/// A set of deterministic policies, either as an explicit list of
/// action-index vectors or in product form (one optimal-action set per
/// state, the set being every combination).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum PolicySet {
    PerStateActions { actions: Vec<Vec<usize>> },
    Policies { policies: Vec<Vec<usize>> },
}

impl PolicySet {
    pub fn count(&self) -> u128 {
        match self {
            PolicySet::Policies { policies } => policies.len() as u128,
            PolicySet::PerStateActions { actions } => actions
                .iter()
                .fold(1u128, |acc, opts| acc.saturating_mul(opts.len() as u128)),
        }
    }

    pub fn contains(&self, policy_actions: &[usize]) -> bool {
        match self {
            PolicySet::Policies { policies } => policies.iter().any(|p| p == policy_actions),
            PolicySet::PerStateActions { actions } => policy_actions
                .iter()
                .zip(actions)
                .all(|(a, opts)| opts.contains(a)),
        }
    }

    /// Materialize as explicit action vectors, refusing above `cap`.
    pub fn materialize(&self, cap: u128) -> Result<Vec<Vec<usize>>> {
        let count = self.count();
        if count > cap {
            return Err(Error::EnumerationCap { count, cap });
        }
        match self {
            PolicySet::Policies { policies } => Ok(policies.clone()),
            PolicySet::PerStateActions { actions } => {
                let mut out: Vec<Vec<usize>> = vec![Vec::new()];
                for opts in actions {
                    let mut next = Vec::with_capacity(out.len() * opts.len());
                    for prefix in &out {
                        for &a in opts {
                            let mut p = prefix.clone();
                            p.push(a);
                            next.push(p);
                        }
                    }
                    out = next;
                }
                Ok(out)
            }
        }
    }
}

/// Output of a solver: the criterion, the optimal value (gain criteria store
/// the constant gain in every entry), the optimal policy set, and
/// convergence metadata.
#[derive(Debug, Clone)]
pub struct OptimalityResult {
    pub criterion: Criterion,
    pub optimal_value: Array1<f64>,
    pub policy_set: PolicySet,
    pub iterations: usize,
    pub residual: f64,
}

impl OptimalityResult {
    /// Constant gain accessor for gain-criterion results.
    pub fn gain(&self) -> f64 {
        self.optimal_value[0]
    }
}

/// One application of the discounted Bellman optimality operator
/// B[v](s) = max_a { r(s,a) + gamma sum_s' p(s'|s,a) v(s') } over available
/// actions; also returns the lowest-index greedy action per state.
pub fn bellman_optimal_backup(mdp: &Mdp, v: &Array1<f64>, gamma: f64) -> (Array1<f64>, Vec<usize>) {
    let n = mdp.num_states();
    let mut out = Array1::zeros(n);
    let mut greedy = vec![0usize; n];
    for s in 0..n {
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0;
        for a in mdp.available_actions(s) {
            let q = mdp.reward()[[s, a]] + gamma * backup_value(mdp, s, a, v);
            if q > best {
                best = q;
                best_a = a;
            }
        }
        out[s] = best;
        greedy[s] = best_a;
    }
    (out, greedy)
}

/// Discounted value iteration to sup-norm residual `tol`; the final value is
/// within tol * gamma / (1 - gamma) of the optimum.
pub fn value_iteration_discounted(mdp: &Mdp, gamma: f64, tol: f64) -> Result<OptimalityResult> {
    check_gamma(gamma)?;
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut v = Array1::zeros(mdp.num_states());
    let mut iterations = 0;
    loop {
        let (next, greedy) = bellman_optimal_backup(mdp, &v, gamma);
        iterations += 1;
        let diff = inf_norm_vec(&(&next - &v));
        v = next;
        if diff <= tol || gamma == 0.0 {
            return Ok(OptimalityResult {
                criterion: Criterion::Discounted { gamma },
                optimal_value: v,
                policy_set: PolicySet::Policies {
                    policies: vec![greedy],
                },
                iterations,
                residual: diff,
            });
        }
        if iterations >= MAX_VI_ITERS {
            return Err(Error::NoConvergence {
                iters: iterations,
                hint: "value iteration did not meet the tolerance".into(),
            });
        }
    }
}

fn evaluate_policy_discounted(mdp: &Mdp, actions: &[usize], gamma: f64) -> Result<Array1<f64>> {
    let policy = PolicyTable::from_actions(actions, mdp.num_actions())?;
    let chain = induce_chain(mdp, &policy)?;
    discounted_values(&chain, gamma)
}

/// Howard policy iteration with exact evaluations. The returned policy set
/// is the full per-state argmax structure of the optimal action values: any
/// combination of listed actions is optimal within `set_tol`.
pub fn policy_iteration_discounted(mdp: &Mdp, gamma: f64) -> Result<OptimalityResult> {
    policy_iteration_discounted_with_tol(mdp, gamma, DEFAULT_SET_TOL)
}

pub fn policy_iteration_discounted_with_tol(
    mdp: &Mdp,
    gamma: f64,
    set_tol: f64,
) -> Result<OptimalityResult> {
    check_gamma(gamma)?;
    let n = mdp.num_states();
    let mut actions: Vec<usize> = (0..n)
        .map(|s| *mdp.available_actions(s).first().expect("validated"))
        .collect();
    let mut seen = std::collections::HashSet::new();
    seen.insert(actions.clone());
    let mut iterations = 0;
    let (v, q) = loop {
        iterations += 1;
        let v = evaluate_policy_discounted(mdp, &actions, gamma)?;
        let q = q_from_values(mdp, &v, gamma);
        let mut next = actions.clone();
        for s in 0..n {
            // Lowest-index action among those that strictly improve on the
            // current one; no switch on ties.
            let mut best = q[[s, actions[s]]];
            let mut best_a = actions[s];
            for a in mdp.available_actions(s) {
                if q[[s, a]] > best + IMPROVEMENT_TOL {
                    best = q[[s, a]];
                    best_a = a;
                }
            }
            next[s] = best_a;
        }
        if next == actions {
            break (v, q);
        }
        if iterations >= MAX_PI_ITERS || !seen.insert(next.clone()) {
            // Revisited policy: remaining differences are below the noise
            // floor; accept the current iterate.
            break (v, q);
        }
        actions = next;
    };
    let sets: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let max = mdp
                .available_actions(s)
                .into_iter()
                .map(|a| q[[s, a]])
                .fold(f64::NEG_INFINITY, f64::max);
            mdp.available_actions(s)
                .into_iter()
                .filter(|&a| q[[s, a]] >= max - set_tol)
                .collect()
        })
        .collect();
    let (backup, _) = bellman_optimal_backup(mdp, &v, gamma);
    let residual = inf_norm_vec(&(&backup - &v));
    Ok(OptimalityResult {
        criterion: Criterion::Discounted { gamma },
        optimal_value: v,
        policy_set: PolicySet::PerStateActions { actions: sets },
        iterations,
        residual,
    })
}

/// Gain-optimal policy iteration for unichain MDPs. Improvement is the
/// two-stage lexicographic test (gain first, then bias), which cannot cycle;
/// the result carries the constant optimal gain and the per-state action
/// sets that stay optimal at the terminal (gain, bias) pair.
pub fn policy_iteration_average(mdp: &Mdp) -> Result<OptimalityResult> {
    let n = mdp.num_states();
    let mut actions: Vec<usize> = (0..n)
        .map(|s| *mdp.available_actions(s).first().expect("validated"))
        .collect();
    let mut seen = std::collections::HashSet::new();
    seen.insert(actions.clone());
    let mut iterations = 0;
    let (gain_vec, bias) = loop {
        iterations += 1;
        let policy = PolicyTable::from_actions(&actions, mdp.num_actions())?;
        let chain = induce_chain(mdp, &policy)?;
        let report = classify_chain(&chain);
        if !report.is_unichain() {
            return Err(Error::Multichain {
                classes: report.num_recurrent_classes,
            });
        }
        let coeffs = laurent_coefficients(&chain, 0)?;
        let g = coeffs.v(-1).clone();
        let h = coeffs.v(0).clone();
        let mut next = actions.clone();
        for s in 0..n {
            let mut best_a = actions[s];
            let mut best_gain = backup_value(mdp, s, actions[s], &g);
            let mut best_bias =
                mdp.reward()[[s, actions[s]]] - g[s] + backup_value(mdp, s, actions[s], &h);
            for a in mdp.available_actions(s) {
                let ga = backup_value(mdp, s, a, &g);
                let ha = mdp.reward()[[s, a]] - g[s] + backup_value(mdp, s, a, &h);
                let better_gain = ga > best_gain + IMPROVEMENT_TOL;
                let tied_gain = (ga - best_gain).abs() <= IMPROVEMENT_TOL;
                if better_gain || (tied_gain && ha > best_bias + IMPROVEMENT_TOL) {
                    best_a = a;
                    best_gain = ga;
                    best_bias = ha;
                }
            }
            next[s] = best_a;
        }
        if next == actions || iterations >= MAX_PI_ITERS || !seen.insert(next.clone()) {
            break (g, h);
        }
        actions = next;
    };
    // Optimal-action sets at the terminal (gain, bias) pair.
    let sets: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let acts = mdp.available_actions(s);
            let max_gain = acts
                .iter()
                .map(|&a| backup_value(mdp, s, a, &gain_vec))
                .fold(f64::NEG_INFINITY, f64::max);
            let gain_tied: Vec<usize> = acts
                .into_iter()
                .filter(|&a| backup_value(mdp, s, a, &gain_vec) >= max_gain - DEFAULT_SET_TOL)
                .collect();
            let max_bias = gain_tied
                .iter()
                .map(|&a| mdp.reward()[[s, a]] - gain_vec[s] + backup_value(mdp, s, a, &bias))
                .fold(f64::NEG_INFINITY, f64::max);
            gain_tied
                .into_iter()
                .filter(|&a| {
                    mdp.reward()[[s, a]] - gain_vec[s] + backup_value(mdp, s, a, &bias)
                        >= max_bias - DEFAULT_SET_TOL
                })
                .collect()
        })
        .collect();
    // Residual of the modified optimality equation max_a[r - g + P h] = h.
    let residual = (0..n)
        .map(|s| {
            let best = mdp
                .available_actions(s)
                .into_iter()
                .map(|a| mdp.reward()[[s, a]] - gain_vec[s] + backup_value(mdp, s, a, &bias))
                .fold(f64::NEG_INFINITY, f64::max);
            (best - bias[s]).abs()
        })
        .fold(0.0f64, f64::max);
    Ok(OptimalityResult {
        criterion: Criterion::Gain,
        optimal_value: gain_vec,
        policy_set: PolicySet::PerStateActions { actions: sets },
        iterations,
        residual,
    })
}

fn backup_value(mdp: &Mdp, s: usize, a: usize, v: &Array1<f64>) -> f64 {
    let n = mdp.num_states();
    let mut acc = 0.0;
    for s2 in 0..n {
        acc += mdp.transition()[[s, a, s2]] * v[s2];
    }
    acc
}

/// Relative value iteration for unichain aperiodic MDPs:
/// v <- B[v] - B[v](s_ref) 1 until the span of the update drops below `tol`.
/// The reported gain is B[v](s_ref) - v(s_ref) at convergence.
pub fn relative_value_iteration(mdp: &Mdp, s_ref: usize, tol: f64) -> Result<OptimalityResult> {
    relative_value_iteration_inner(mdp, s_ref, tol, None)
}

/// As [`relative_value_iteration`], after the gain-preserving aperiodicity
/// transform p <- (1 - kappa) I + kappa p, which leaves stationary
/// distributions, gains, and optimal-action structure unchanged while
/// breaking periodicity (relative values are scaled by 1/kappa internally).
pub fn relative_value_iteration_damped(
    mdp: &Mdp,
    s_ref: usize,
    tol: f64,
    kappa: f64,
) -> Result<OptimalityResult> {
    if !(0.0 < kappa && kappa <= 1.0) {
        return Err(Error::Domain("kappa must be in (0, 1]".into()));
    }
    relative_value_iteration_inner(mdp, s_ref, tol, Some(kappa))
}

fn relative_value_iteration_inner(
    mdp: &Mdp,
    s_ref: usize,
    tol: f64,
    kappa: Option<f64>,
) -> Result<OptimalityResult> {
    let n = mdp.num_states();
    if s_ref >= n {
        return Err(Error::Domain(format!("reference state {s_ref} out of range")));
    }
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let damped;
    let target: &Mdp = match kappa {
        None => mdp,
        Some(k) => {
            let mut t = mdp.transition() * k;
            for s in 0..n {
                for a in 0..mdp.num_actions() {
                    t[[s, a, s]] += 1.0 - k;
                }
            }
            damped = Mdp::with_parts(
                t,
                mdp.reward().clone(),
                None,
                mdp.isd().clone(),
                mdp.availability().clone(),
                None,
                None,
            )?;
            &damped
        }
    };
    let max_iters = 1_000_000usize;
    let mut v = Array1::zeros(n);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (w, _) = bellman_optimal_backup(target, &v, 1.0);
        let sp = span(&(&w - &v));
        let gain = w[s_ref] - v[s_ref];
        let next = &w - w[s_ref];
        if sp <= tol {
            let sets: Vec<Vec<usize>> = (0..n)
                .map(|s| {
                    let acts = target.available_actions(s);
                    let max = acts
                        .iter()
                        .map(|&a| target.reward()[[s, a]] + backup_value(target, s, a, &next))
                        .fold(f64::NEG_INFINITY, f64::max);
                    acts.into_iter()
                        .filter(|&a| {
                            target.reward()[[s, a]] + backup_value(target, s, a, &next)
                                >= max - DEFAULT_SET_TOL
                        })
                        .collect()
                })
                .collect();
            return Ok(OptimalityResult {
                criterion: Criterion::Gain,
                optimal_value: Array1::from_elem(n, gain),
                policy_set: PolicySet::PerStateActions { actions: sets },
                iterations,
                residual: sp,
            });
        }
        if iterations >= max_iters {
            return Err(Error::NoConvergence {
                iters: iterations,
                hint: "relative value iteration stalled; the chain may be periodic; \
                       try the damped aperiodicity transform"
                    .into(),
            });
        }
        v = next;
    }
}

/// Nested n-discount optimal policy sets for n = -1..=n_max, by exhaustive
/// lexicographic comparison of exact Laurent coefficients over the
/// deterministic policy space. Requires a unichain MDP and respects the
/// enumeration cap.
pub fn n_discount_optimal_sets(
    mdp: &Mdp,
    n_max: i32,
    enumeration_cap: u128,
) -> Result<Vec<OptimalityResult>> {
    if n_max < -1 {
        return Err(Error::Domain("n_max must be >= -1".into()));
    }
    let coeff_order = n_max.max(0);
    let policies: Vec<Vec<usize>> = enumerate_deterministic_policies(mdp, enumeration_cap)?
        .map(|p| p.greedy_actions())
        .collect();
    let evaluated: Vec<(Vec<usize>, crate::eval::LaurentCoefficients)> = policies
        .into_par_iter()
        .map(|actions| {
            let policy = PolicyTable::from_actions(&actions, mdp.num_actions())?;
            let chain = induce_chain(mdp, &policy)?;
            let report = classify_chain(&chain);
            if !report.is_unichain() {
                return Err(Error::Multichain {
                    classes: report.num_recurrent_classes,
                });
            }
            let coeffs = laurent_coefficients(&chain, coeff_order)?;
            Ok((actions, coeffs))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_states = mdp.num_states();
    let mut survivors: Vec<usize> = (0..evaluated.len()).collect();
    let mut out = Vec::new();
    for n in -1..=n_max {
        let mut max = Array1::from_elem(n_states, f64::NEG_INFINITY);
        for &i in &survivors {
            let v = evaluated[i].1.v(n);
            for s in 0..n_states {
                max[s] = max[s].max(v[s]);
            }
        }
        survivors.retain(|&i| {
            let v = evaluated[i].1.v(n);
            (0..n_states).all(|s| v[s] >= max[s] - DEFAULT_SET_TOL)
        });
        out.push(OptimalityResult {
            criterion: Criterion::NDiscount { n },
            optimal_value: max,
            policy_set: PolicySet::Policies {
                policies: survivors.iter().map(|&i| evaluated[i].0.clone()).collect(),
            },
            iterations: evaluated.len(),
            residual: DEFAULT_SET_TOL,
        });
    }
    Ok(out)
}

/// Total-reward optimal policies by exhaustive state-wise maximization of
/// total values over the deterministic policy space. Every enumerated policy
/// must have finite total values (zero reward on its recurrent states), as
/// in absorbing-terminal models of episodic environments.
pub fn total_optimal_set(mdp: &Mdp, enumeration_cap: u128) -> Result<OptimalityResult> {
    let policies: Vec<Vec<usize>> = enumerate_deterministic_policies(mdp, enumeration_cap)?
        .map(|p| p.greedy_actions())
        .collect();
    let evaluated: Vec<(Vec<usize>, Array1<f64>)> = policies
        .into_par_iter()
        .map(|actions| {
            let policy = PolicyTable::from_actions(&actions, mdp.num_actions())?;
            let chain = induce_chain(mdp, &policy)?;
            let v = crate::eval::total_values(&chain)?;
            Ok((actions, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_states = mdp.num_states();
    let mut max = Array1::from_elem(n_states, f64::NEG_INFINITY);
    for (_, v) in &evaluated {
        for s in 0..n_states {
            max[s] = max[s].max(v[s]);
        }
    }
    let survivors: Vec<Vec<usize>> = evaluated
        .iter()
        .filter(|(_, v)| (0..n_states).all(|s| v[s] >= max[s] - DEFAULT_SET_TOL))
        .map(|(a, _)| a.clone())
        .collect();
    let total = evaluated.len();
    Ok(OptimalityResult {
        criterion: Criterion::Total,
        optimal_value: max,
        policy_set: PolicySet::Policies { policies: survivors },
        iterations: total,
        residual: DEFAULT_SET_TOL,
    })
}

/// Configuration for [`blackwell_gamma`].
#[derive(Debug, Clone, Copy)]
pub struct BlackwellConfig {
    /// Final bracket width.
    pub tol: f64,
    /// Size of the initial sweep grid over [0, gamma_hi].
    pub grid_size: usize,
    /// Reference discount factor close to 1 whose argmax set defines the
    /// Blackwell set.
    pub gamma_hi: f64,
    /// Action-value tie tolerance for argmax sets.
    pub set_tol: f64,
}

impl Default for BlackwellConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            grid_size: 40,
            gamma_hi: 1.0 - 1e-6,
            set_tol: DEFAULT_SET_TOL,
        }
    }
}

/// Empirical estimate of the critical discount factor: the infimum of the
/// sampled region over which the discounted argmax set stops changing and
/// equals the reference set at `gamma_hi`, refined by bisection.
#[derive(Debug, Clone)]
pub struct BlackwellEstimate {
    pub gamma_bw: f64,
    /// (low, high): the argmax set differs at `low` (when the bracket is
    /// non-degenerate) and matches the reference set from `high` onward
    /// among sampled points.
    pub bracket: (f64, f64),
    /// Per-state optimal action sets at the reference discount factor.
    pub blackwell_set: Vec<Vec<usize>>,
    /// (gamma, argmax-set id) pairs in sweep order; ids index distinct sets
    /// by first appearance.
    pub sweep_log: Vec<(f64, usize)>,
    /// Set when the reference argmax set is unstable under a 10x widening or
    /// narrowing of `set_tol`.
    pub tolerance_warning: bool,
}

fn argmax_sets(mdp: &Mdp, gamma: f64, set_tol: f64) -> Result<Vec<Vec<usize>>> {
    let result = policy_iteration_discounted_with_tol(mdp, gamma, set_tol)?;
    match result.policy_set {
        PolicySet::PerStateActions { actions } => Ok(actions),
        PolicySet::Policies { .. } => unreachable!("policy iteration returns per-state sets"),
    }
}

pub fn blackwell_gamma(mdp: &Mdp, cfg: BlackwellConfig) -> Result<BlackwellEstimate> {
    if cfg.tol <= 0.0 || cfg.grid_size < 2 {
        return Err(Error::Domain(
            "blackwell estimation needs tol > 0 and at least two grid points".into(),
        ));
    }
    if !(0.0 < cfg.gamma_hi && cfg.gamma_hi < 1.0) {
        return Err(Error::Domain("gamma_hi must be in (0, 1)".into()));
    }
    let reference = argmax_sets(mdp, cfg.gamma_hi, cfg.set_tol)?;
    let wide = argmax_sets(mdp, cfg.gamma_hi, cfg.set_tol * 10.0)?;
    let narrow = argmax_sets(mdp, cfg.gamma_hi, cfg.set_tol / 10.0)?;
    let tolerance_warning = wide != reference || narrow != reference;

    let grid: Vec<f64> = (0..cfg.grid_size)
        .map(|i| cfg.gamma_hi * i as f64 / (cfg.grid_size - 1) as f64)
        .collect();
    let sets: Vec<Vec<Vec<usize>>> = grid
        .par_iter()
        .map(|&g| argmax_sets(mdp, g, cfg.set_tol))
        .collect::<Result<Vec<_>>>()?;
    // Assign stable ids by first appearance in gamma order.
    let mut distinct: Vec<&Vec<Vec<usize>>> = Vec::new();
    let mut sweep_log = Vec::with_capacity(grid.len());
    for (g, set) in grid.iter().zip(&sets) {
        let id = match distinct.iter().position(|d| *d == set) {
            Some(i) => i,
            None => {
                distinct.push(set);
                distinct.len() - 1
            }
        };
        sweep_log.push((*g, id));
    }
    // Last grid index whose set differs from the reference.
    let last_bad = grid
        .iter()
        .zip(&sets)
        .rposition(|(_, set)| *set != reference);
    let (mut lo, mut hi) = match last_bad {
        None => {
            // Stable all the way down to gamma = 0.
            return Ok(BlackwellEstimate {
                gamma_bw: 0.0,
                bracket: (0.0, 0.0),
                blackwell_set: reference,
                sweep_log,
                tolerance_warning,
            });
        }
        Some(i) if i + 1 == grid.len() => (grid[i], cfg.gamma_hi),
        Some(i) => (grid[i], grid[i + 1]),
    };
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        let set = argmax_sets(mdp, mid, cfg.set_tol)?;
        if set == reference {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BlackwellEstimate {
        gamma_bw: hi,
        bracket: (lo, hi),
        blackwell_set: reference,
        sweep_log,
        tolerance_warning,
    })
}

/// Configuration for [`gain_threshold_gamma`].
#[derive(Debug, Clone, Copy)]
pub struct GainThresholdConfig {
    /// Final bracket width.
    pub tol: f64,
    /// Sweep grid size over [0, gamma_hi].
    pub grid_size: usize,
    /// Upper end of the sweep.
    pub gamma_hi: f64,
    /// Gain gap below which a greedy policy counts as gain-optimal. The
    /// default of 1e-6 sits above the linear-solve noise floor of
    /// few-hundred-state models while separating real suboptimality.
    pub gain_tol: f64,
}

impl Default for GainThresholdConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            grid_size: 40,
            gamma_hi: 0.999,
            gain_tol: 1e-6,
        }
    }
}

/// Estimate of the discount factor above which discounted-optimal policies
/// become gain-optimal.
#[derive(Debug, Clone)]
pub struct GainThresholdEstimate {
    pub gamma_threshold: f64,
    /// (low, high): greedy gain falls short at `low` (when non-degenerate)
    /// and is optimal from `high` onward among sampled points.
    pub bracket: (f64, f64),
    /// The reference optimal gain.
    pub optimal_gain: f64,
    /// (gamma, greedy-policy gain) per sweep point.
    pub sweep_log: Vec<(f64, f64)>,
}

fn greedy_of(mdp: &Mdp, gamma: f64) -> Result<Vec<usize>> {
    let sets = argmax_sets(mdp, gamma, DEFAULT_SET_TOL)?;
    Ok(sets.iter().map(|opts| opts[0]).collect())
}

fn isd_gain(mdp: &Mdp, actions: &[usize]) -> Result<f64> {
    let policy = PolicyTable::from_actions(actions, mdp.num_actions())?;
    let chain = induce_chain(mdp, &policy)?;
    let star = crate::chain::limiting_matrix(&chain)?;
    Ok(mdp.isd().dot(&star.dot(chain.r())))
}

/// Coarser, numerically robust companion to [`blackwell_gamma`]: the
/// infimum (sampled, bisection-refined) of the region where the lowest-index
/// discounted-greedy policy achieves the optimal gain. This is the quantity
/// large-scale learning-curve sweeps actually resolve; full argmax-set
/// stability may require discount factors much closer to 1 than this (and at
/// hundreds of states set comparisons near gamma = 1 drown in the float
/// noise the `tolerance_warning` flags).
///
/// `reference_gain` defaults to the average-reward policy-iteration optimum;
/// pass it explicitly for models where that solver's unichain precondition
/// is too strict.
pub fn gain_threshold_gamma(
    mdp: &Mdp,
    reference_gain: Option<f64>,
    cfg: GainThresholdConfig,
) -> Result<GainThresholdEstimate> {
    if cfg.tol <= 0.0 || cfg.grid_size < 2 || cfg.gain_tol <= 0.0 {
        return Err(Error::Domain(
            "gain-threshold estimation needs positive tolerances and >= 2 grid points".into(),
        ));
    }
    if !(0.0 < cfg.gamma_hi && cfg.gamma_hi < 1.0) {
        return Err(Error::Domain("gamma_hi must be in (0, 1)".into()));
    }
    let optimal_gain = match reference_gain {
        Some(g) => g,
        None => policy_iteration_average(mdp)?.gain(),
    };
    let grid: Vec<f64> = (0..cfg.grid_size)
        .map(|i| cfg.gamma_hi * i as f64 / (cfg.grid_size - 1) as f64)
        .collect();
    let gains: Vec<f64> = grid
        .par_iter()
        .map(|&g| isd_gain(mdp, &greedy_of(mdp, g)?))
        .collect::<Result<Vec<_>>>()?;
    let sweep_log: Vec<(f64, f64)> = grid.iter().copied().zip(gains.iter().copied()).collect();
    let ok = |g: f64| g >= optimal_gain - cfg.gain_tol;
    let last_bad = gains.iter().rposition(|&g| !ok(g));
    let (mut lo, mut hi) = match last_bad {
        None => {
            return Ok(GainThresholdEstimate {
                gamma_threshold: 0.0,
                bracket: (0.0, 0.0),
                optimal_gain,
                sweep_log,
            });
        }
        Some(i) if i + 1 == grid.len() => (grid[i], cfg.gamma_hi),
        Some(i) => (grid[i], grid[i + 1]),
    };
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        if ok(isd_gain(mdp, &greedy_of(mdp, mid)?)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(GainThresholdEstimate {
        gamma_threshold: hi,
        bracket: (lo, hi),
        optimal_gain,
        sweep_log,
    })
}

/// Evaluate both sides of the discount-misspecification error bound
/// ||v*_hi - v*_lo||_inf <= (hi - lo) r_max / ((1 - lo)(1 - hi)) for
/// 0 <= lo <= hi < 1. Returns (lhs, rhs).
pub fn misspecification_bound_check(mdp: &Mdp, gamma: f64, gamma_bw: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&gamma) || !(0.0..1.0).contains(&gamma_bw) || gamma > gamma_bw {
        return Err(Error::Domain("need 0 <= gamma <= gamma_bw < 1".into()));
    }
    let v_lo = policy_iteration_discounted(mdp, gamma)?.optimal_value;
    let v_hi = policy_iteration_discounted(mdp, gamma_bw)?.optimal_value;
    let lhs = inf_norm_vec(&(&v_hi - &v_lo));
    let rhs = (gamma_bw - gamma) * mdp.r_max() / ((1.0 - gamma) * (1.0 - gamma_bw));
    Ok((lhs, rhs))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "discount factor must be in [0, 1), got {gamma}"
        )))
    }
}
