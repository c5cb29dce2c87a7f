//! Conversion between the two infinite-horizon encodings of an episodic
//! environment: the absorbing model (a zero-reward terminal state that
//! self-loops forever, the "zrat" kind on the wire) and the resetting model
//! (a terminal state whose single action redistributes over the initial
//! states, making episode repetition part of the chain, the "rst" kind).
//!
//! The conversion copies all original transitions and rewards, rewires only
//! the distinguished state's single action, and requires that termination is
//! inevitable under every stationary policy. It also assumes the episodic
//! environment carries no inherent notion of discounting from step 0 to the
//! episode's end; that premise is not machine-checkable and is the caller's
//! to assert.

use ndarray::Array3;
use serde::Serialize;

use crate::chain::maximal_end_components;
use crate::error::{Error, Result};
use crate::mdp::{Distinguished, Mdp};

/// Episodic environment encoded with a zero-reward absorbing terminal state.
#[derive(Debug, Clone)]
pub struct AbsorbingModel {
    mdp: Mdp,
    terminal_state: usize,
    terminal_action: usize,
}

/// Episodic environment encoded with a resetting state whose single action
/// jumps to the initial-state distribution at zero reward; when the
/// initial-state distribution has full support the model is recurrent.
#[derive(Debug, Clone)]
pub struct ResetModel {
    mdp: Mdp,
    reset_state: usize,
    reset_action: usize,
}

impl AbsorbingModel {
    pub fn new(mdp: Mdp, terminal_state: usize, terminal_action: usize) -> Result<Self> {
        let n = mdp.num_states();
        if terminal_state >= n || terminal_action >= mdp.num_actions() {
            return Err(Error::Domain("distinguished indices out of range".into()));
        }
        let avail = mdp.available_actions(terminal_state);
        if avail != vec![terminal_action] {
            return Err(Error::Validation(format!(
                "terminal state {terminal_state} must have exactly the terminal action \
                 {terminal_action} available, found {avail:?}"
            )));
        }
        if (mdp.transition()[[terminal_state, terminal_action, terminal_state]] - 1.0).abs()
            > 1e-12
        {
            return Err(Error::Validation(
                "terminal state must be absorbing under the terminal action".into(),
            ));
        }
        if mdp.reward()[[terminal_state, terminal_action]].abs() > 1e-12 {
            return Err(Error::Validation(
                "terminal self-loop must have zero reward".into(),
            ));
        }
        // isd(terminal) = 0 is required only for the reset conversion; the
        // degenerate start-equals-terminal case is a legal absorbing model.
        Ok(Self {
            mdp,
            terminal_state,
            terminal_action,
        })
    }

    pub fn mdp(&self) -> &Mdp {
        &self.mdp
    }

    pub fn terminal_state(&self) -> usize {
        self.terminal_state
    }

    pub fn terminal_action(&self) -> usize {
        self.terminal_action
    }

    pub fn distinguished(&self) -> Distinguished {
        Distinguished {
            state: self.terminal_state,
            action: self.terminal_action,
            kind: "zrat".into(),
        }
    }
}

impl ResetModel {
    pub fn new(mdp: Mdp, reset_state: usize, reset_action: usize) -> Result<Self> {
        let n = mdp.num_states();
        if reset_state >= n || reset_action >= mdp.num_actions() {
            return Err(Error::Domain("distinguished indices out of range".into()));
        }
        let avail = mdp.available_actions(reset_state);
        if avail != vec![reset_action] {
            return Err(Error::Validation(format!(
                "reset state {reset_state} must have exactly the reset action \
                 {reset_action} available, found {avail:?}"
            )));
        }
        for s in 0..n {
            let p = mdp.transition()[[reset_state, reset_action, s]];
            if (p - mdp.isd()[s]).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "reset transition to state {s} is {p}, expected the initial probability {}",
                    mdp.isd()[s]
                )));
            }
        }
        if mdp.reward()[[reset_state, reset_action]].abs() > 1e-12 {
            return Err(Error::Validation("reset action must have zero reward".into()));
        }
        if let Some(triple) = mdp.reward_triple() {
            for s in 0..n {
                if mdp.transition()[[reset_state, reset_action, s]] > 0.0
                    && triple[[reset_state, reset_action, s]].abs() > 1e-12
                {
                    return Err(Error::Validation(
                        "reset transitions must carry zero reward".into(),
                    ));
                }
            }
        }
        if mdp.isd()[reset_state].abs() > 1e-12 {
            return Err(Error::Validation(
                "initial-state distribution must not start in the reset state".into(),
            ));
        }
        Ok(Self {
            mdp,
            reset_state,
            reset_action,
        })
    }

    pub fn mdp(&self) -> &Mdp {
        &self.mdp
    }

    pub fn reset_state(&self) -> usize {
        self.reset_state
    }

    pub fn reset_action(&self) -> usize {
        self.reset_action
    }

    pub fn distinguished(&self) -> Distinguished {
        Distinguished {
            state: self.reset_state,
            action: self.reset_action,
            kind: "rst".into(),
        }
    }
}

/// An end component witnessing that termination can be avoided: a state set
/// and, per state, the actions under which the set is closed.
#[derive(Debug, Clone, Serialize)]
pub struct EndComponentWitness {
    pub states: Vec<usize>,
    pub actions: Vec<Vec<usize>>,
}

/// Result of the inevitable-termination check.
#[derive(Debug, Clone, Serialize)]
pub struct TerminationCheck {
    pub inevitable: bool,
    /// A non-terminal end component when termination is avoidable.
    pub witness: Option<EndComponentWitness>,
}

/// Termination is inevitable under every stationary policy iff the terminal
/// state is the unique maximal end component of the model.
pub fn check_inevitable_termination(model: &AbsorbingModel) -> TerminationCheck {
    let mecs = maximal_end_components(model.mdp());
    for (states, actions) in &mecs {
        if states.as_slice() != [model.terminal_state()] {
            return TerminationCheck {
                inevitable: false,
                witness: Some(EndComponentWitness {
                    states: states.clone(),
                    actions: actions.clone(),
                }),
            };
        }
    }
    TerminationCheck {
        inevitable: true,
        witness: None,
    }
}

/// Rewire an absorbing model into its resetting counterpart: identical
/// states, actions, rewards, and initial distribution; only the terminal
/// self-loop becomes a zero-reward jump distributed as the initial states.
/// Refuses models where termination is not inevitable.
pub fn to_reset_model(model: &AbsorbingModel) -> Result<ResetModel> {
    let check = check_inevitable_termination(model);
    if !check.inevitable {
        let witness = check.witness.expect("witness accompanies failure");
        return Err(Error::Validation(format!(
            "termination is not inevitable: states {:?} form an end component that avoids \
             the terminal state",
            witness.states
        )));
    }
    to_reset_model_unchecked(model)
}

/// The rewiring of [`to_reset_model`] without the inevitable-termination
/// precondition. The conversion is mechanical either way; skipping the check
/// is for environments (deterministic-movement ones especially) where some
/// stationary policies wander forever, yet exploring behavior policies
/// terminate almost surely. Chain structure of the result should then be
/// computed, not assumed.
pub fn to_reset_model_unchecked(model: &AbsorbingModel) -> Result<ResetModel> {
    if model.mdp().isd()[model.terminal_state()].abs() > 1e-12 {
        return Err(Error::Validation(
            "cannot convert: initial-state distribution puts mass on the terminal state".into(),
        ));
    }
    let mdp = model.mdp();
    let (term, act) = (model.terminal_state(), model.terminal_action());
    let mut transition = mdp.transition().clone();
    for s in 0..mdp.num_states() {
        transition[[term, act, s]] = mdp.isd()[s];
    }
    let mut reward = mdp.reward().clone();
    reward[[term, act]] = 0.0;
    let reward_triple = mdp.reward_triple().map(|t| {
        let mut t = t.clone();
        for s in 0..mdp.num_states() {
            t[[term, act, s]] = 0.0;
        }
        t
    });
    let rebuilt = Mdp::with_parts(
        transition,
        reward,
        reward_triple,
        mdp.isd().clone(),
        mdp.availability().clone(),
        mdp.state_labels().map(|l| l.to_vec()),
        mdp.action_labels().map(|l| l.to_vec()),
    )?;
    ResetModel::new(rebuilt, term, act)
}

/// Inverse of [`to_reset_model`]: the reset jump becomes a zero-reward
/// self-loop again. Round-tripping reproduces the original model exactly.
pub fn to_absorbing_model(model: &ResetModel) -> Result<AbsorbingModel> {
    let mdp = model.mdp();
    let (reset, act) = (model.reset_state(), model.reset_action());
    let mut transition = mdp.transition().clone();
    for s in 0..mdp.num_states() {
        transition[[reset, act, s]] = 0.0;
    }
    transition[[reset, act, reset]] = 1.0;
    let reward = mdp.reward().clone();
    let reward_triple: Option<Array3<f64>> = mdp.reward_triple().map(|t| {
        let mut t = t.clone();
        for s in 0..mdp.num_states() {
            t[[reset, act, s]] = 0.0;
        }
        t
    });
    let rebuilt = Mdp::with_parts(
        transition,
        reward,
        reward_triple,
        mdp.isd().clone(),
        mdp.availability().clone(),
        mdp.state_labels().map(|l| l.to_vec()),
        mdp.action_labels().map(|l| l.to_vec()),
    )?;
    AbsorbingModel::new(rebuilt, reset, act)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{classify_chain, ChainClass};
    use crate::eval::gain;
    use crate::fixtures;
    use crate::mdp::{induce_chain, serialize_mdp, PolicyTable};
    use ndarray::{array, Array2, Array3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn three_state_absorbing() -> AbsorbingModel {
        AbsorbingModel::new(fixtures::puterman_three_state(), 2, 0).unwrap()
    }

    #[test]
    fn termination_is_inevitable_here() {
        let check = check_inevitable_termination(&three_state_absorbing());
        assert!(check.inevitable);
        assert!(check.witness.is_none());
    }

    #[test]
    fn added_self_loop_breaks_inevitability() {
        // Same three-state structure plus a self-loop action at s0.
        let mut t = Array3::zeros((3, 3, 3));
        let mut r = Array2::zeros((3, 3));
        t[[0, 0, 2]] = 1.0;
        r[[0, 0]] = 2.0;
        t[[0, 1, 1]] = 1.0;
        r[[0, 1]] = 1.0;
        t[[0, 2, 0]] = 1.0; // self-loop escape
        t[[1, 0, 2]] = 1.0;
        r[[1, 0]] = 1.0;
        t[[1, 1, 1]] = 1.0;
        t[[1, 2, 1]] = 1.0;
        t[[2, 0, 2]] = 1.0;
        t[[2, 1, 2]] = 1.0;
        t[[2, 2, 2]] = 1.0;
        let mut available = Array2::from_elem((3, 3), false);
        available[[0, 0]] = true;
        available[[0, 1]] = true;
        available[[0, 2]] = true;
        available[[1, 0]] = true;
        available[[2, 0]] = true;
        let mdp = Mdp::with_parts(t, r, None, array![1.0, 0.0, 0.0], available, None, None)
            .unwrap();
        let model = AbsorbingModel::new(mdp, 2, 0).unwrap();
        let check = check_inevitable_termination(&model);
        assert!(!check.inevitable);
        assert_eq!(check.witness.unwrap().states, vec![0]);
        assert!(to_reset_model(&model).is_err());
    }

    #[test]
    fn single_state_is_vacuously_terminal() {
        let model = AbsorbingModel::new(fixtures::single_loop(0.0), 0, 0).unwrap();
        assert!(check_inevitable_termination(&model).inevitable);
    }

    #[test]
    fn conversion_rewires_only_the_terminal_row() {
        let model = three_state_absorbing();
        let reset = to_reset_model(&model).unwrap();
        let m = reset.mdp();
        // Reset jump follows the initial distribution (a point mass on s0).
        assert_eq!(m.transition()[[2, 0, 0]], 1.0);
        assert_eq!(m.reward()[[2, 0]], 0.0);
        // Original rows intact.
        assert_eq!(m.transition()[[0, 0, 2]], 1.0);
        assert_eq!(m.reward()[[0, 0]], 2.0);
    }

    #[test]
    fn round_trip_is_identity() {
        let model = three_state_absorbing();
        let reset = to_reset_model(&model).unwrap();
        let back = to_absorbing_model(&reset).unwrap();
        assert_eq!(
            serialize_mdp(back.mdp(), Some(&back.distinguished())),
            serialize_mdp(model.mdp(), Some(&model.distinguished()))
        );
    }

    #[test]
    fn second_action_at_reset_state_is_rejected() {
        let model = three_state_absorbing();
        let reset = to_reset_model(&model).unwrap();
        // Un-mask the second action at the reset state.
        let mut avail = reset.mdp().availability().clone();
        avail[[2, 1]] = true;
        let mdp = reset.mdp().clone().with_availability(avail).unwrap();
        assert!(ResetModel::new(mdp, 2, 0).is_err());
    }

    #[test]
    fn converted_three_state_model_stays_unichain_with_point_isd() {
        // The initial distribution is a point mass on s0, so s1 is transient
        // under the blue policy: recurrence is computed, never assumed.
        let reset = to_reset_model(&three_state_absorbing()).unwrap();
        let blue = PolicyTable::from_actions(&[0, 0, 0], 2).unwrap();
        let chain = induce_chain(reset.mdp(), &blue).unwrap();
        assert_eq!(classify_chain(&chain).chain_class, ChainClass::Unichain);
        // Gains: blue loops s0 -> reset -> s0 earning 2 per 2 steps.
        let g = gain(&chain).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
        let red = PolicyTable::from_actions(&[1, 0, 0], 2).unwrap();
        let chain = induce_chain(reset.mdp(), &red).unwrap();
        let g = gain(&chain).unwrap();
        assert!((g[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gain_matches_episode_statistics() {
        // Stochastic absorbing model: from s0/s1 each step either moves or
        // terminates. Gain on the reset model must equal
        // E[episode return] / (E[episode length] + 1).
        let mut t = Array3::zeros((3, 1, 3));
        t[[0, 0, 1]] = 0.6;
        t[[0, 0, 2]] = 0.4;
        t[[1, 0, 0]] = 0.3;
        t[[1, 0, 2]] = 0.7;
        t[[2, 0, 2]] = 1.0;
        let r = array![[0.5], [-1.0], [0.0]];
        let isd = array![0.8, 0.2, 0.0];
        let mdp = Mdp::new(t, r, isd).unwrap();
        let model = AbsorbingModel::new(mdp, 2, 0).unwrap();
        let reset = to_reset_model(&model).unwrap();
        let policy = PolicyTable::from_actions(&[0, 0, 0], 1).unwrap();
        let exact = gain(&induce_chain(reset.mdp(), &policy).unwrap()).unwrap()[0];

        // Batched episode simulation on the absorbing model.
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let batches = 30;
        let per_batch = 400;
        let mut estimates = Vec::new();
        for _ in 0..batches {
            let mut total_return = 0.0;
            let mut total_len = 0u64;
            for _ in 0..per_batch {
                let mut s = if rng.random::<f64>() < 0.8 { 0 } else { 1 };
                loop {
                    let (s2, rew) = model.mdp().sample_transition(s, 0, &mut rng).unwrap();
                    total_return += rew;
                    total_len += 1;
                    if s2 == 2 {
                        break;
                    }
                    s = s2;
                }
            }
            estimates
                .push(total_return / (total_len as f64 + per_batch as f64));
        }
        let mean: f64 = estimates.iter().sum::<f64>() / batches as f64;
        let var: f64 = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
            / (batches as f64 - 1.0);
        let se = (var / batches as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "episode-statistics estimate {mean} vs exact gain {exact} (se {se})"
        );
    }
}
