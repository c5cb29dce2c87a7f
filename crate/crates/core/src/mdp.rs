//! Finite MDP data model: dense transition/reward tensors, stationary
//! policies, induced Markov chains, deterministic-policy enumeration, and
//! the canonical JSON serialization used by the CLI.

use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "rows sum to one" checks on transition matrices, policies,
/// and initial-state distributions.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Default cap on `|A|^|S|` for deterministic-policy enumeration. Can be
/// overridden per call; the CLI also honors `MDPCRIT_MAX_ENUM`.
pub const DEFAULT_ENUM_CAP: u128 = 1_000_000;

/// A finite MDP with a uniform action slot count. States and actions are
/// dense indices; actions that are not meaningful in a state are masked out
/// via the availability table (their transition rows are still well-formed,
/// by convention a self-loop with reward 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    num_states: usize,
    num_actions: usize,
    /// transition[[s, a, s']] = p(s' | s, a)
    transition: Array3<f64>,
    /// reward[[s, a]] = expected immediate reward
    reward: Array2<f64>,
    /// Optional (s, a, s')-resolved rewards; `reward` must equal their
    /// transition-weighted expectation.
    reward_triple: Option<Array3<f64>>,
    /// Initial-state distribution.
    isd: Array1<f64>,
    /// available[[s, a]] = whether action a may be chosen in state s.
    available: Array2<bool>,
    state_labels: Option<Vec<String>>,
    action_labels: Option<Vec<String>>,
    r_max: f64,
}

impl Mdp {
    /// Build and validate an MDP with every action available everywhere.
    pub fn new(transition: Array3<f64>, reward: Array2<f64>, isd: Array1<f64>) -> Result<Self> {
        let (s, a, _) = transition.dim();
        let available = Array2::from_elem((s, a), true);
        Self::with_parts(transition, reward, None, isd, available, None, None)
    }

    /// Build from (s, a, s')-resolved rewards; the expected reward table is
    /// derived as the transition-weighted mean and the triple is retained.
    pub fn from_triple_rewards(
        transition: Array3<f64>,
        reward_triple: Array3<f64>,
        isd: Array1<f64>,
    ) -> Result<Self> {
        let (s, a, s2) = transition.dim();
        if reward_triple.dim() != (s, a, s2) {
            return Err(Error::Dimension(
                "reward_triple shape must match transition shape".into(),
            ));
        }
        let mut reward = Array2::zeros((s, a));
        for i in 0..s {
            for j in 0..a {
                let mut acc = 0.0;
                for k in 0..s2 {
                    acc += transition[[i, j, k]] * reward_triple[[i, j, k]];
                }
                reward[[i, j]] = acc;
            }
        }
        let available = Array2::from_elem((s, a), true);
        Self::with_parts(
            transition,
            reward,
            Some(reward_triple),
            isd,
            available,
            None,
            None,
        )
    }

    /// Full constructor; validates every invariant.
    pub fn with_parts(
        transition: Array3<f64>,
        reward: Array2<f64>,
        reward_triple: Option<Array3<f64>>,
        isd: Array1<f64>,
        available: Array2<bool>,
        state_labels: Option<Vec<String>>,
        action_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let (s, a, s2) = transition.dim();
        if s == 0 || a == 0 {
            return Err(Error::Validation("empty state or action set".into()));
        }
        if s2 != s {
            return Err(Error::Dimension(format!(
                "transition tensor is {s}x{a}x{s2}, expected {s}x{a}x{s}"
            )));
        }
        if reward.dim() != (s, a) {
            return Err(Error::Dimension("reward table must be |S|x|A|".into()));
        }
        if isd.len() != s {
            return Err(Error::Dimension("isd length must be |S|".into()));
        }
        if available.dim() != (s, a) {
            return Err(Error::Dimension("availability mask must be |S|x|A|".into()));
        }
        if let Some(labels) = &state_labels {
            if labels.len() != s {
                return Err(Error::Dimension("state_labels length must be |S|".into()));
            }
        }
        if let Some(labels) = &action_labels {
            if labels.len() != a {
                return Err(Error::Dimension("action_labels length must be |A|".into()));
            }
        }
        for i in 0..s {
            if !available.row(i).iter().any(|&x| x) {
                return Err(Error::Validation(format!(
                    "state {i} has no available action"
                )));
            }
            for j in 0..a {
                let mut sum = 0.0;
                for k in 0..s {
                    let p = transition[[i, j, k]];
                    if p < 0.0 {
                        return Err(Error::Validation(format!(
                            "negative transition probability at ({i}, {j}, {k})"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::NonStochasticRow {
                        state: i,
                        action: j,
                        sum,
                        tol: STOCHASTIC_TOL,
                    });
                }
                if !reward[[i, j]].is_finite() {
                    return Err(Error::Validation(format!(
                        "non-finite reward at ({i}, {j})"
                    )));
                }
            }
        }
        let mut isd_sum = 0.0;
        for (i, &p) in isd.iter().enumerate() {
            if p < 0.0 {
                return Err(Error::Validation(format!("negative isd entry at state {i}")));
            }
            isd_sum += p;
        }
        if (isd_sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Validation(format!(
                "isd sums to {isd_sum}, expected 1"
            )));
        }
        if let Some(triple) = &reward_triple {
            if triple.dim() != (s, a, s) {
                return Err(Error::Dimension(
                    "reward_triple shape must match transition shape".into(),
                ));
            }
            for i in 0..s {
                for j in 0..a {
                    let mut acc = 0.0;
                    for k in 0..s {
                        acc += transition[[i, j, k]] * triple[[i, j, k]];
                    }
                    if (acc - reward[[i, j]]).abs() > 1e-12 {
                        return Err(Error::Validation(format!(
                            "reward[{i}][{j}] = {} does not match the expectation {} of reward_triple",
                            reward[[i, j]], acc
                        )));
                    }
                }
            }
        }
        let mut r_max = 0.0f64;
        for i in 0..s {
            for j in 0..a {
                if available[[i, j]] {
                    r_max = r_max.max(reward[[i, j]].abs());
                }
            }
        }
        Ok(Self {
            num_states: s,
            num_actions: a,
            transition,
            reward,
            reward_triple,
            isd,
            available,
            state_labels,
            action_labels,
            r_max,
        })
    }

    /// Replace the availability mask, re-validating.
    pub fn with_availability(self, available: Array2<bool>) -> Result<Self> {
        Self::with_parts(
            self.transition,
            self.reward,
            self.reward_triple,
            self.isd,
            available,
            self.state_labels,
            self.action_labels,
        )
    }

    pub fn with_labels(
        mut self,
        state_labels: Option<Vec<String>>,
        action_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if let Some(l) = &state_labels {
            if l.len() != self.num_states {
                return Err(Error::Dimension("state_labels length must be |S|".into()));
            }
        }
        if let Some(l) = &action_labels {
            if l.len() != self.num_actions {
                return Err(Error::Dimension("action_labels length must be |A|".into()));
            }
        }
        self.state_labels = state_labels;
        self.action_labels = action_labels;
        Ok(self)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn transition(&self) -> &Array3<f64> {
        &self.transition
    }

    pub fn reward(&self) -> &Array2<f64> {
        &self.reward
    }

    pub fn reward_triple(&self) -> Option<&Array3<f64>> {
        self.reward_triple.as_ref()
    }

    pub fn isd(&self) -> &Array1<f64> {
        &self.isd
    }

    pub fn availability(&self) -> &Array2<bool> {
        &self.available
    }

    pub fn is_available(&self, state: usize, action: usize) -> bool {
        self.available[[state, action]]
    }

    /// Indices of the actions available in `state`, ascending.
    pub fn available_actions(&self, state: usize) -> Vec<usize> {
        (0..self.num_actions)
            .filter(|&a| self.available[[state, a]])
            .collect()
    }

    pub fn state_labels(&self) -> Option<&[String]> {
        self.state_labels.as_deref()
    }

    pub fn action_labels(&self) -> Option<&[String]> {
        self.action_labels.as_deref()
    }

    /// Bound on |r(s, a)| over available pairs.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of deterministic policies, `prod_s |A(s)|`, saturating at u128.
    pub fn deterministic_policy_count(&self) -> u128 {
        let mut count: u128 = 1;
        for s in 0..self.num_states {
            let n = self.available_actions(s).len() as u128;
            count = count.saturating_mul(n);
        }
        count
    }
}

/// A stationary (possibly randomized) policy as a row-stochastic
/// state-by-action matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    probs: Array2<f64>,
}

impl PolicyTable {
    pub fn new(probs: Array2<f64>) -> Result<Self> {
        for (s, row) in probs.rows().into_iter().enumerate() {
            let mut sum = 0.0;
            for &p in row {
                if p < 0.0 {
                    return Err(Error::Validation(format!(
                        "negative action probability in state {s}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NonStochasticPolicy { state: s, sum });
            }
        }
        Ok(Self { probs })
    }

    /// Deterministic policy from one action index per state.
    pub fn from_actions(actions: &[usize], num_actions: usize) -> Result<Self> {
        let mut probs = Array2::zeros((actions.len(), num_actions));
        for (s, &a) in actions.iter().enumerate() {
            if a >= num_actions {
                return Err(Error::Dimension(format!(
                    "action {a} out of range in state {s}"
                )));
            }
            probs[[s, a]] = 1.0;
        }
        Ok(Self { probs })
    }

    /// Uniform over the available actions of each state.
    pub fn uniform_random(mdp: &Mdp) -> Self {
        let mut probs = Array2::zeros((mdp.num_states(), mdp.num_actions()));
        for s in 0..mdp.num_states() {
            let acts = mdp.available_actions(s);
            for &a in &acts {
                probs[[s, a]] = 1.0 / acts.len() as f64;
            }
        }
        Self { probs }
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn num_states(&self) -> usize {
        self.probs.nrows()
    }

    pub fn num_actions(&self) -> usize {
        self.probs.ncols()
    }

    pub fn is_deterministic(&self) -> bool {
        self.probs
            .rows()
            .into_iter()
            .all(|row| row.iter().filter(|&&p| p == 1.0).count() == 1)
    }

    /// Most probable action per state, lowest index winning ties. This is
    /// the documented extraction convention for randomized policies.
    pub fn greedy_actions(&self) -> Vec<usize> {
        self.probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                let mut best_p = f64::NEG_INFINITY;
                for (a, &p) in row.iter().enumerate() {
                    if p > best_p {
                        best_p = p;
                        best = a;
                    }
                }
                best
            })
            .collect()
    }

    /// Check the policy against an MDP: shapes agree and no probability mass
    /// sits on unavailable actions.
    pub fn validate_against(&self, mdp: &Mdp) -> Result<()> {
        if self.num_states() != mdp.num_states() || self.num_actions() != mdp.num_actions() {
            return Err(Error::Dimension(format!(
                "policy is {}x{}, MDP is {}x{}",
                self.num_states(),
                self.num_actions(),
                mdp.num_states(),
                mdp.num_actions()
            )));
        }
        for s in 0..self.num_states() {
            for a in 0..self.num_actions() {
                if self.probs[[s, a]] > 0.0 && !mdp.is_available(s, a) {
                    return Err(Error::Validation(format!(
                        "policy puts probability on unavailable action {a} in state {s}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Convex mixture of two policies (used by linearity checks).
    pub fn mix(&self, other: &PolicyTable, lambda: f64) -> Result<PolicyTable> {
        if self.probs.dim() != other.probs.dim() {
            return Err(Error::Dimension("policy shapes differ".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain("mixture weight must be in [0, 1]".into()));
        }
        PolicyTable::new(&self.probs * (1.0 - lambda) + &other.probs * lambda)
    }
}

/// The Markov chain a fixed policy induces: P_pi and r_pi.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedChain {
    p: Array2<f64>,
    r: Array1<f64>,
}

impl InducedChain {
    pub fn new(p: Array2<f64>, r: Array1<f64>) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n {
            return Err(Error::Dimension("chain matrix must be square".into()));
        }
        if r.len() != n {
            return Err(Error::Dimension("reward vector length must match".into()));
        }
        for (s, row) in p.rows().into_iter().enumerate() {
            let mut sum = 0.0;
            for &x in row {
                if x < 0.0 {
                    return Err(Error::Validation(format!(
                        "negative transition probability in chain row {s}"
                    )));
                }
                sum += x;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NonStochasticRow {
                    state: s,
                    action: 0,
                    sum,
                    tol: STOCHASTIC_TOL,
                });
            }
        }
        Ok(Self { p, r })
    }

    pub fn num_states(&self) -> usize {
        self.p.nrows()
    }

    pub fn p(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn r(&self) -> &Array1<f64> {
        &self.r
    }
}

/// Collapse an MDP and a policy into the induced chain:
/// p(s'|s) = sum_a p(s'|s,a) pi(a|s) and r(s) = sum_a pi(a|s) r(s,a).
pub fn induce_chain(mdp: &Mdp, policy: &PolicyTable) -> Result<InducedChain> {
    policy.validate_against(mdp)?;
    let n = mdp.num_states();
    let m = mdp.num_actions();
    let mut p = Array2::zeros((n, n));
    let mut r = Array1::zeros(n);
    for s in 0..n {
        for a in 0..m {
            let w = policy.probs()[[s, a]];
            if w == 0.0 {
                continue;
            }
            r[s] += w * mdp.reward()[[s, a]];
            for s2 in 0..n {
                p[[s, s2]] += w * mdp.transition()[[s, a, s2]];
            }
        }
    }
    InducedChain::new(p, r)
}

/// Iterator over every deterministic policy of an MDP in lexicographic
/// action order, respecting the availability mask.
pub struct DeterministicPolicies<'a> {
    mdp: &'a Mdp,
    choices: Vec<Vec<usize>>,
    cursor: Vec<usize>,
    done: bool,
}

impl<'a> DeterministicPolicies<'a> {
    fn new(mdp: &'a Mdp) -> Self {
        let choices: Vec<Vec<usize>> = (0..mdp.num_states())
            .map(|s| mdp.available_actions(s))
            .collect();
        let cursor = vec![0; mdp.num_states()];
        Self {
            mdp,
            choices,
            cursor,
            done: false,
        }
    }

    /// Current policy as one action index per state.
    fn current_actions(&self) -> Vec<usize> {
        self.cursor
            .iter()
            .zip(&self.choices)
            .map(|(&c, opts)| opts[c])
            .collect()
    }
}

impl Iterator for DeterministicPolicies<'_> {
    type Item = PolicyTable;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let actions = self.current_actions();
        // Odometer increment, last state fastest.
        let mut i = self.cursor.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.cursor[i] += 1;
            if self.cursor[i] < self.choices[i].len() {
                break;
            }
            self.cursor[i] = 0;
        }
        Some(PolicyTable::from_actions(&actions, self.mdp.num_actions()).expect("valid by construction"))
    }
}

/// Enumerate the deterministic policy set, erroring if it exceeds `cap`.
pub fn enumerate_deterministic_policies(mdp: &Mdp, cap: u128) -> Result<DeterministicPolicies<'_>> {
    let count = mdp.deterministic_policy_count();
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    Ok(DeterministicPolicies::new(mdp))
}

/// The `distinguished` JSON extension marking terminal/reset structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distinguished {
    pub state: usize,
    pub action: usize,
    /// "zrat" for a zero-reward absorbing terminal model, "rst" for a
    /// resetting-state model.
    pub kind: String,
}

#[derive(Serialize, Deserialize)]
struct MdpDocument {
    num_states: usize,
    num_actions: usize,
    transition: Vec<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reward: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reward_triple: Option<Vec<Vec<Vec<f64>>>>,
    isd: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    available: Option<Vec<Vec<u8>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state_labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    action_labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distinguished: Option<Distinguished>,
}

/// An MDP parsed from JSON together with its optional distinguished marker.
#[derive(Debug)]
pub struct ParsedMdp {
    pub mdp: Mdp,
    pub distinguished: Option<Distinguished>,
}

/// Parse the MDP JSON document format.
pub fn parse_mdp(text: &str) -> Result<ParsedMdp> {
    let doc: MdpDocument = serde_json::from_str(text)?;
    let s = doc.num_states;
    let a = doc.num_actions;
    let transition = nested3_to_array(&doc.transition, s, a, "transition")?;
    let isd = Array1::from_vec(doc.isd.clone());
    let reward_triple = match &doc.reward_triple {
        Some(t) => Some(nested3_to_array(t, s, a, "reward_triple")?),
        None => None,
    };
    let reward = match (&doc.reward, &reward_triple) {
        (Some(r), _) => {
            let mut arr = Array2::zeros((s, a));
            if r.len() != s {
                return Err(Error::Dimension("reward outer length must be |S|".into()));
            }
            for (i, row) in r.iter().enumerate() {
                if row.len() != a {
                    return Err(Error::Dimension(format!(
                        "reward row {i} must have |A| entries"
                    )));
                }
                for (j, &v) in row.iter().enumerate() {
                    arr[[i, j]] = v;
                }
            }
            arr
        }
        (None, Some(triple)) => {
            let mut arr = Array2::zeros((s, a));
            for i in 0..s {
                for j in 0..a {
                    let mut acc = 0.0;
                    for k in 0..s {
                        acc += transition[[i, j, k]] * triple[[i, j, k]];
                    }
                    arr[[i, j]] = acc;
                }
            }
            arr
        }
        (None, None) => {
            return Err(Error::Validation(
                "document must contain `reward` or `reward_triple`".into(),
            ))
        }
    };
    let available = match &doc.available {
        Some(rows) => {
            if rows.len() != s {
                return Err(Error::Dimension("available outer length must be |S|".into()));
            }
            let mut mask = Array2::from_elem((s, a), true);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != a {
                    return Err(Error::Dimension(format!(
                        "available row {i} must have |A| entries"
                    )));
                }
                for (j, &v) in row.iter().enumerate() {
                    mask[[i, j]] = v != 0;
                }
            }
            mask
        }
        None => Array2::from_elem((s, a), true),
    };
    let mdp = Mdp::with_parts(
        transition,
        reward,
        reward_triple,
        isd,
        available,
        doc.state_labels,
        doc.action_labels,
    )?;
    Ok(ParsedMdp {
        mdp,
        distinguished: doc.distinguished,
    })
}

/// Serialize to the canonical JSON form: fixed field order, expected rewards
/// always materialized, availability emitted only when some action is masked.
pub fn serialize_mdp(mdp: &Mdp, distinguished: Option<&Distinguished>) -> String {
    let s = mdp.num_states();
    let a = mdp.num_actions();
    let transition = (0..s)
        .map(|i| {
            (0..a)
                .map(|j| (0..s).map(|k| mdp.transition()[[i, j, k]]).collect())
                .collect()
        })
        .collect();
    let reward = (0..s)
        .map(|i| (0..a).map(|j| mdp.reward()[[i, j]]).collect())
        .collect();
    let reward_triple = mdp.reward_triple().map(|t| {
        (0..s)
            .map(|i| {
                (0..a)
                    .map(|j| (0..s).map(|k| t[[i, j, k]]).collect())
                    .collect()
            })
            .collect()
    });
    let any_masked = mdp.availability().iter().any(|&x| !x);
    let available = any_masked.then(|| {
        (0..s)
            .map(|i| {
                (0..a)
                    .map(|j| u8::from(mdp.availability()[[i, j]]))
                    .collect()
            })
            .collect()
    });
    let doc = MdpDocument {
        num_states: s,
        num_actions: a,
        transition,
        reward: Some(reward),
        reward_triple,
        isd: mdp.isd().to_vec(),
        available,
        state_labels: mdp.state_labels().map(|l| l.to_vec()),
        action_labels: mdp.action_labels().map(|l| l.to_vec()),
        distinguished: distinguished.cloned(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
    out.push('\n');
    out
}

fn nested3_to_array(
    data: &[Vec<Vec<f64>>],
    s: usize,
    a: usize,
    name: &str,
) -> Result<Array3<f64>> {
    if data.len() != s {
        return Err(Error::Dimension(format!("{name} outer length must be |S|")));
    }
    let mut arr = Array3::zeros((s, a, s));
    for (i, per_action) in data.iter().enumerate() {
        if per_action.len() != a {
            return Err(Error::Dimension(format!(
                "{name}[{i}] must have |A| rows"
            )));
        }
        for (j, row) in per_action.iter().enumerate() {
            if row.len() != s {
                return Err(Error::Dimension(format!(
                    "{name}[{i}][{j}] must have |S| entries"
                )));
            }
            for (k, &v) in row.iter().enumerate() {
                arr[[i, j, k]] = v;
            }
        }
    }
    Ok(arr)
}
