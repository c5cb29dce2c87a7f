//! Tabular Q-learning under three optimality criteria: discounted,
//! average-reward (relative-value style, with the gain estimated from a
//! fixed reference state), and total-reward. Plus the paired training-scheme
//! comparison for episodic environments encoded as absorbing vs resetting
//! models, and the end-of-training performance metric.
//!
//! Learners are deterministic functions of (model, config): the generator is
//! seeded ChaCha, exploration is epsilon-greedy on top of optimistic
//! initialization (epsilon 0 by default, so optimism alone drives early
//! exploration), and checkpoints record the greedy policy so curves can be
//! re-gauged under any exact metric afterwards.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::limiting_matrix;
use crate::error::{Error, Result};
use crate::mdp::{induce_chain, serialize_mdp, Mdp, PolicyTable};
use crate::transform::{AbsorbingModel, ResetModel};

/// Shared learner configuration.
#[derive(Debug, Clone, Copy)]
pub struct LearnerConfig {
    /// Constant learning rate in (0, 1].
    pub alpha: f64,
    /// Optimistic initial action value.
    pub q_init: f64,
    /// Exploration rate in [0, 1]; 0 relies on optimism alone.
    pub epsilon_greedy: f64,
    /// Reference state whose greedy value estimates the gain (average-reward
    /// learner only).
    pub ref_state: usize,
    /// Total environment-step budget.
    pub max_steps: u64,
    /// Experiment-episode step cap; the agent is transported back to an
    /// initial state when it is hit (and at terminal entry, when a terminal
    /// state is set).
    pub episode_cap: u64,
    /// Checkpoint cadence in steps (a final checkpoint is always taken).
    pub eval_every: u64,
    /// Optional absorbing-terminal state: entering it ends the episode, and
    /// its action values start at zero instead of `q_init`.
    pub terminal_state: Option<usize>,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn new(alpha: f64, q_init: f64, max_steps: u64, seed: u64) -> Self {
        Self {
            alpha,
            q_init,
            epsilon_greedy: 0.0,
            ref_state: 0,
            max_steps,
            episode_cap: 1_000,
            eval_every: (max_steps / 100).max(1),
            terminal_state: None,
            seed,
        }
    }

    fn validate(&self, mdp: &Mdp) -> Result<()> {
        if !(0.0 < self.alpha && self.alpha <= 1.0) {
            return Err(Error::Domain("alpha must be in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon_greedy) {
            return Err(Error::Domain("epsilon must be in [0, 1]".into()));
        }
        if self.episode_cap == 0 {
            return Err(Error::Domain("episode cap must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("step budget must be at least 1".into()));
        }
        if self.ref_state >= mdp.num_states() {
            return Err(Error::Domain("reference state out of range".into()));
        }
        if let Some(t) = self.terminal_state {
            if t >= mdp.num_states() {
                return Err(Error::Domain("terminal state out of range".into()));
            }
        }
        Ok(())
    }
}

/// One recorded point of a learning curve.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub steps: u64,
    /// Exact performance of the greedy policy (metric depends on the
    /// learner; see the constructors).
    pub metric: f64,
    /// Current gain estimate (average-reward learner only).
    pub gain_estimate: Option<f64>,
    /// Greedy action per state at this point.
    pub greedy_actions: Vec<usize>,
}

/// Metric trace of one training run; checkpoints are strictly increasing in
/// `steps` and the final metric repeats the last checkpoint's metric.
#[derive(Debug, Clone)]
pub struct LearningCurve {
    pub checkpoints: Vec<Checkpoint>,
    pub final_metric: f64,
}

impl LearningCurve {
    /// Metric of the last checkpoint at or before `steps`.
    pub fn metric_at(&self, steps: u64) -> Option<f64> {
        self.checkpoints
            .iter()
            .rev()
            .find(|c| c.steps <= steps)
            .map(|c| c.metric)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Update {
    Discounted { gamma: f64 },
    Average,
    Total,
}

/// Greedy action per state (lowest index on ties), restricted to available
/// actions.
pub fn greedy_actions_from_q(mdp: &Mdp, q: &Array2<f64>) -> Vec<usize> {
    (0..mdp.num_states())
        .map(|s| {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in mdp.available_actions(s) {
                if q[[s, a]] > best {
                    best = q[[s, a]];
                    best_a = a;
                }
            }
            best_a
        })
        .collect()
}

/// isd-weighted gain of a deterministic policy, well-defined for any chain
/// structure (multichain greedy policies appear mid-training).
pub fn exact_gain_metric(mdp: &Mdp, actions: &[usize]) -> Result<f64> {
    let policy = PolicyTable::from_actions(actions, mdp.num_actions())?;
    let chain = induce_chain(mdp, &policy)?;
    let star = limiting_matrix(&chain)?;
    let gain = star.dot(chain.r());
    Ok(mdp.isd().dot(&gain))
}

/// isd-weighted expected return of one experiment-episode of `horizon + 1`
/// steps under a deterministic policy (exact, via repeated chain backups).
pub fn exact_finite_horizon_return(mdp: &Mdp, actions: &[usize], horizon: u64) -> Result<f64> {
    let policy = PolicyTable::from_actions(actions, mdp.num_actions())?;
    let chain = induce_chain(mdp, &policy)?;
    let mut v = chain.r().clone();
    for _ in 0..horizon {
        v = chain.r() + &chain.p().dot(&v);
    }
    Ok(mdp.isd().dot(&v))
}

fn sample_isd<R: Rng>(mdp: &Mdp, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (s, &p) in mdp.isd().iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    mdp.num_states() - 1
}

fn train<M>(mdp: &Mdp, update: Update, cfg: &LearnerConfig, metric: M) -> Result<(Array2<f64>, LearningCurve)>
where
    M: Fn(&[usize]) -> Result<f64>,
{
    cfg.validate(mdp)?;
    if let Update::Discounted { gamma } = update {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Domain(format!(
                "discount factor must be in [0, 1), got {gamma}"
            )));
        }
    }
    let n = mdp.num_states();
    let m = mdp.num_actions();
    let mut q = Array2::from_elem((n, m), cfg.q_init);
    if let Some(t) = cfg.terminal_state {
        for a in 0..m {
            q[[t, a]] = 0.0;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = sample_isd(mdp, &mut rng);
    let mut ep_steps = 0u64;
    let mut checkpoints = Vec::new();
    let greedy_at = |q: &Array2<f64>, s: usize| -> usize {
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0;
        for a in mdp.available_actions(s) {
            if q[[s, a]] > best {
                best = q[[s, a]];
                best_a = a;
            }
        }
        best_a
    };
    for step in 1..=cfg.max_steps {
        let a = if cfg.epsilon_greedy > 0.0 && rng.random::<f64>() < cfg.epsilon_greedy {
            let acts = mdp.available_actions(s);
            acts[rng.random_range(0..acts.len())]
        } else {
            greedy_at(&q, s)
        };
        let (s2, r) = mdp.sample_transition(s, a, &mut rng)?;
        let bootstrap = {
            let ga = greedy_at(&q, s2);
            q[[s2, ga]]
        };
        let target = match update {
            Update::Discounted { gamma } => r + gamma * bootstrap,
            Update::Total => r + bootstrap,
            Update::Average => {
                let gain_est = q[[cfg.ref_state, greedy_at(&q, cfg.ref_state)]];
                r - gain_est + bootstrap
            }
        };
        q[[s, a]] = (1.0 - cfg.alpha) * q[[s, a]] + cfg.alpha * target;
        ep_steps += 1;
        let terminal_hit = cfg.terminal_state == Some(s2);
        if terminal_hit || ep_steps >= cfg.episode_cap {
            s = sample_isd(mdp, &mut rng);
            ep_steps = 0;
        } else {
            s = s2;
        }
        if step % cfg.eval_every == 0 || step == cfg.max_steps {
            let greedy = greedy_actions_from_q(mdp, &q);
            let gain_estimate = match update {
                Update::Average => Some(q[[cfg.ref_state, greedy_at(&q, cfg.ref_state)]]),
                _ => None,
            };
            let metric_value = metric(&greedy)?;
            checkpoints.push(Checkpoint {
                steps: step,
                metric: metric_value,
                gain_estimate,
                greedy_actions: greedy,
            });
            if step == cfg.max_steps {
                break;
            }
        }
    }
    let final_metric = checkpoints.last().map(|c| c.metric).unwrap_or(f64::NAN);
    Ok((
        q,
        LearningCurve {
            checkpoints,
            final_metric,
        },
    ))
}

/// Discounted Q-learning:
/// q(s,a) <- (1-alpha) q(s,a) + alpha (r + gamma max_a' q(s',a')).
/// The checkpoint metric is the exact isd-weighted gain of the greedy
/// policy.
pub fn q_gamma_learning(
    mdp: &Mdp,
    gamma: f64,
    cfg: &LearnerConfig,
) -> Result<(Array2<f64>, LearningCurve)> {
    train(mdp, Update::Discounted { gamma }, cfg, |greedy| {
        exact_gain_metric(mdp, greedy)
    })
}

/// Average-reward Q-learning in the relative-value style:
/// q(s,a) <- (1-alpha) q(s,a) + alpha (r - g + max_a' q(s',a')), with the
/// gain estimate g = max_a q(ref_state, a) re-read every step. Returns the
/// final gain estimate along with the table and curve.
pub fn q_b_learning(mdp: &Mdp, cfg: &LearnerConfig) -> Result<(Array2<f64>, f64, LearningCurve)> {
    let (q, curve) = train(mdp, Update::Average, cfg, |greedy| {
        exact_gain_metric(mdp, greedy)
    })?;
    let gain = curve
        .checkpoints
        .last()
        .and_then(|c| c.gain_estimate)
        .unwrap_or(f64::NAN);
    Ok((q, gain, curve))
}

/// Total-reward Q-learning on an absorbing-terminal model:
/// q(s,a) <- (1-alpha) q(s,a) + alpha (r + max_a' q(s',a')); the terminal
/// state's action values are pinned at zero, so bootstrap stops there. The
/// checkpoint metric is the exact expected return of one capped
/// experiment-episode of the greedy policy.
pub fn q_tot_learning(
    model: &AbsorbingModel,
    cfg: &LearnerConfig,
) -> Result<(Array2<f64>, LearningCurve)> {
    let mut cfg = *cfg;
    cfg.terminal_state = Some(model.terminal_state());
    let horizon = cfg.episode_cap;
    train(model.mdp(), Update::Total, &cfg, |greedy| {
        exact_finite_horizon_return(model.mdp(), greedy, horizon)
    })
}

/// Result of the paired-scheme comparison: both curves re-gauged by the same
/// metric (exact isd-weighted gain of the greedy policy on the shared
/// resetting model).
#[derive(Debug, Clone)]
pub struct SchemeComparison {
    /// Total-reward learner on the absorbing model.
    pub scheme_a: LearningCurve,
    /// Average-reward learner on the resetting model.
    pub scheme_b: LearningCurve,
}

/// Train the total-reward learner on the absorbing model and the
/// average-reward learner on its resetting counterpart with identical
/// budgets, rates, caps, and seeds, and gauge both by the exact gain of the
/// greedy policy on the resetting model. The two models must be an exact
/// conversion pair.
pub fn run_scheme_comparison(
    model: &AbsorbingModel,
    reset: &ResetModel,
    cfg: &LearnerConfig,
) -> Result<SchemeComparison> {
    let expected = crate::transform::to_reset_model_unchecked(model)?;
    if serialize_mdp(expected.mdp(), None) != serialize_mdp(reset.mdp(), None)
        || expected.reset_state() != reset.reset_state()
        || expected.reset_action() != reset.reset_action()
    {
        return Err(Error::Validation(
            "the two models are not a conversion pair".into(),
        ));
    }
    let mut cfg_a = *cfg;
    cfg_a.terminal_state = Some(model.terminal_state());
    let (_, curve_a_raw) = train(model.mdp(), Update::Total, &cfg_a, |greedy| {
        exact_gain_metric(reset.mdp(), greedy)
    })?;
    let mut cfg_b = *cfg;
    cfg_b.ref_state = reset.reset_state();
    cfg_b.terminal_state = None;
    let (_, _, curve_b) = q_b_learning_with_metric(reset, &cfg_b)?;
    Ok(SchemeComparison {
        scheme_a: curve_a_raw,
        scheme_b: curve_b,
    })
}

fn q_b_learning_with_metric(
    reset: &ResetModel,
    cfg: &LearnerConfig,
) -> Result<(Array2<f64>, f64, LearningCurve)> {
    let (q, curve) = train(reset.mdp(), Update::Average, cfg, |greedy| {
        exact_gain_metric(reset.mdp(), greedy)
    })?;
    let gain = curve
        .checkpoints
        .last()
        .and_then(|c| c.gain_estimate)
        .unwrap_or(f64::NAN);
    Ok((q, gain, curve))
}

/// End-of-training performance metric: the mean of the last `n_last`
/// experiment-episode returns, normalized by the episode length
/// (horizon + 1) to a per-step average reward.
pub fn final_metric(returns: &[f64], horizon: u64, n_last: usize) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::Domain("no returns given".into()));
    }
    if n_last == 0 || n_last > returns.len() {
        return Err(Error::Domain(format!(
            "n_last must be in 1..={}, got {n_last}",
            returns.len()
        )));
    }
    let tail = &returns[returns.len() - n_last..];
    let mean = tail.iter().sum::<f64>() / n_last as f64;
    Ok(mean / (horizon as f64 + 1.0))
}

/// Sampled experiment-episode returns of a deterministic policy: each
/// episode starts from the initial distribution and runs exactly
/// `horizon + 1` steps (absorbing or resetting states behave naturally).
/// The sampled counterpart of the exact checkpoint metrics.
pub fn sampled_episode_returns(
    mdp: &Mdp,
    actions: &[usize],
    horizon: u64,
    n_episodes: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let policy = PolicyTable::from_actions(actions, mdp.num_actions())?;
    policy.validate_against(mdp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_episodes);
    for _ in 0..n_episodes {
        let mut s = sample_isd(mdp, &mut rng);
        let mut ret = 0.0;
        for _ in 0..=horizon {
            let (s2, r) = mdp.sample_transition(s, actions[s], &mut rng)?;
            ret += r;
            s = s2;
        }
        out.push(ret);
    }
    Ok(out)
}
