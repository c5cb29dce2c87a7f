//! State, chain, and MDP classification, plus the stationary and limiting
//! (Cesaro) matrices of a fixed chain.
//!
//! Recurrent classes are the bottom strongly-connected components of the
//! positive-probability digraph; periods are gcds of cycle lengths inside
//! each component. The limiting matrix is assembled algebraically from
//! per-class stationary distributions and absorption probabilities, so it is
//! exact for periodic chains where plain power iteration does not converge.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::LuFactor;
use crate::mdp::{enumerate_deterministic_policies, induce_chain, InducedChain, Mdp};

/// Per-state recurrence label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum StateClass {
    Recurrent { class_id: usize },
    Transient,
}

/// Recurrence and periodicity of every state of a chain.
#[derive(Debug, Clone, Serialize)]
pub struct StateClassification {
    pub classes: Vec<StateClass>,
    /// Per-state period: gcd of the lengths of cycles through the state in
    /// its strongly-connected component, or 1 when the state lies on no cycle.
    pub periods: Vec<usize>,
    /// Members of each recurrent class, ascending state order.
    pub recurrent_classes: Vec<Vec<usize>>,
    /// Shared period of each recurrent class.
    pub class_periods: Vec<usize>,
}

impl StateClassification {
    pub fn is_recurrent(&self, state: usize) -> bool {
        matches!(self.classes[state], StateClass::Recurrent { .. })
    }

    pub fn transient_states(&self) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&s| !self.is_recurrent(s))
            .collect()
    }
}

/// Chain-level label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainClass {
    IrreducibleAperiodic,
    IrreduciblePeriodic,
    Unichain,
    Multichain,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub classification: StateClassification,
    pub chain_class: ChainClass,
    pub num_recurrent_classes: usize,
}

impl ChainReport {
    /// Single recurrent class (irreducible chains included).
    pub fn is_unichain(&self) -> bool {
        self.num_recurrent_classes == 1
    }
}

/// MDP-level chain pattern over all deterministic stationary policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainPattern {
    Recurrent,
    Unichain,
    Multichain,
    /// Enumeration cap exceeded; pattern not determined.
    #[serde(rename = "unknown(structural-bound)")]
    UnknownStructuralBound,
}

/// MDP-level accessibility pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accessibility {
    Communicating,
    WeaklyCommunicating,
    NotWeaklyCommunicating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassificationMethod {
    Enumeration,
    Structural,
}

#[derive(Debug, Clone, Serialize)]
pub struct MdpClassReport {
    pub chain_pattern: ChainPattern,
    pub accessibility: Accessibility,
    pub method: ClassificationMethod,
}

// ------------------------------------------------------------------
// Strongly connected components (Tarjan, iterative to spare the stack).

pub(crate) fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;
    // Explicit DFS stack of (node, edge cursor).
    let mut work: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        work.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut cursor)) = work.last_mut() {
            if *cursor < adj[v].len() {
                let w = adj[v][*cursor];
                *cursor += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

fn chain_digraph(chain: &InducedChain) -> Vec<Vec<usize>> {
    let n = chain.num_states();
    (0..n)
        .map(|s| (0..n).filter(|&s2| chain.p()[[s, s2]] > 0.0).collect())
        .collect()
}

/// gcd of cycle lengths within one SCC via BFS level differences.
fn scc_period(members: &[usize], adj: &[Vec<usize>]) -> usize {
    use std::collections::VecDeque;
    let in_scc: std::collections::HashSet<usize> = members.iter().copied().collect();
    let mut level: std::collections::HashMap<usize, i64> = std::collections::HashMap::new();
    let root = members[0];
    level.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    let mut g: i64 = 0;
    while let Some(v) = queue.pop_front() {
        let lv = level[&v];
        for &w in &adj[v] {
            if !in_scc.contains(&w) {
                continue;
            }
            match level.get(&w) {
                None => {
                    level.insert(w, lv + 1);
                    queue.push_back(w);
                }
                Some(&lw) => {
                    g = gcd(g, (lv + 1 - lw).abs());
                }
            }
        }
    }
    if g == 0 {
        1
    } else {
        g as usize
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Classify every state of a chain as recurrent (with class id) or transient,
/// with periods.
pub fn classify_states(chain: &InducedChain) -> StateClassification {
    let n = chain.num_states();
    let adj = chain_digraph(chain);
    let sccs = tarjan_scc(&adj);
    let mut comp_of = vec![usize::MAX; n];
    for (cid, comp) in sccs.iter().enumerate() {
        for &v in comp {
            comp_of[v] = cid;
        }
    }
    // Bottom SCCs: no edge leaves the component.
    let mut is_bottom = vec![true; sccs.len()];
    for v in 0..n {
        for &w in &adj[v] {
            if comp_of[v] != comp_of[w] {
                is_bottom[comp_of[v]] = false;
            }
        }
    }
    let mut classes = vec![StateClass::Transient; n];
    let mut recurrent_classes = Vec::new();
    let mut class_periods = Vec::new();
    let mut periods = vec![1usize; n];
    for (cid, comp) in sccs.iter().enumerate() {
        let has_cycle = comp.len() > 1 || adj[comp[0]].contains(&comp[0]);
        let period = if has_cycle { scc_period(comp, &adj) } else { 1 };
        for &v in comp {
            periods[v] = period;
        }
        if is_bottom[cid] {
            let class_id = recurrent_classes.len();
            for &v in comp {
                classes[v] = StateClass::Recurrent { class_id };
            }
            recurrent_classes.push(comp.clone());
            class_periods.push(period);
        }
    }
    StateClassification {
        classes,
        periods,
        recurrent_classes,
        class_periods,
    }
}

/// Chain-level report on top of [`classify_states`].
pub fn classify_chain(chain: &InducedChain) -> ChainReport {
    let classification = classify_states(chain);
    let k = classification.recurrent_classes.len();
    let no_transient = classification.transient_states().is_empty();
    let chain_class = if k == 1 && no_transient {
        if classification.class_periods[0] == 1 {
            ChainClass::IrreducibleAperiodic
        } else {
            ChainClass::IrreduciblePeriodic
        }
    } else if k == 1 {
        ChainClass::Unichain
    } else {
        ChainClass::Multichain
    };
    ChainReport {
        classification,
        chain_class,
        num_recurrent_classes: k,
    }
}

/// Classify the MDP: the chain pattern over every deterministic stationary
/// policy (deterministic policies suffice: a randomized policy's digraph is
/// the union of its support's deterministic digraphs, and a multichain
/// witness survives restriction to one support action per state), plus the
/// accessibility pattern from the all-action union digraph and the maximal
/// end components.
pub fn classify_mdp(mdp: &Mdp, enumeration_cap: u128) -> MdpClassReport {
    let accessibility = accessibility_pattern(mdp);
    match enumerate_deterministic_policies(mdp, enumeration_cap) {
        Ok(policies) => {
            let mut all_irreducible = true;
            let mut all_unichain = true;
            for policy in policies {
                let chain = induce_chain(mdp, &policy).expect("enumerated policies are valid");
                let report = classify_chain(&chain);
                match report.chain_class {
                    ChainClass::IrreducibleAperiodic | ChainClass::IrreduciblePeriodic => {}
                    ChainClass::Unichain => all_irreducible = false,
                    ChainClass::Multichain => {
                        all_irreducible = false;
                        all_unichain = false;
                    }
                }
            }
            let chain_pattern = if all_irreducible {
                ChainPattern::Recurrent
            } else if all_unichain {
                ChainPattern::Unichain
            } else {
                ChainPattern::Multichain
            };
            MdpClassReport {
                chain_pattern,
                accessibility,
                method: ClassificationMethod::Enumeration,
            }
        }
        Err(_) => MdpClassReport {
            chain_pattern: ChainPattern::UnknownStructuralBound,
            accessibility,
            method: ClassificationMethod::Structural,
        },
    }
}

fn union_digraph(mdp: &Mdp) -> Vec<Vec<usize>> {
    let n = mdp.num_states();
    (0..n)
        .map(|s| {
            let mut out: Vec<usize> = Vec::new();
            for a in mdp.available_actions(s) {
                for s2 in 0..n {
                    if mdp.transition()[[s, a, s2]] > 0.0 {
                        out.push(s2);
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect()
}

fn accessibility_pattern(mdp: &Mdp) -> Accessibility {
    let union = union_digraph(mdp);
    if tarjan_scc(&union).len() == 1 {
        return Accessibility::Communicating;
    }
    // States inside some maximal end component can be made recurrent; the
    // rest are transient under every policy. Weak communication additionally
    // needs the end-component union to be one closed communicating block.
    let mecs = maximal_end_components(mdp);
    let n = mdp.num_states();
    let mut in_mec = vec![false; n];
    for (states, _) in &mecs {
        for &s in states {
            in_mec[s] = true;
        }
    }
    // Digraph restricted to MEC states, using only actions that stay inside
    // the MEC union (so the block is closed under the realizing policies).
    let mut restricted: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        if !in_mec[s] {
            continue;
        }
        for a in mdp.available_actions(s) {
            let stays = (0..n)
                .all(|s2| mdp.transition()[[s, a, s2]] == 0.0 || in_mec[s2]);
            if !stays {
                continue;
            }
            for s2 in 0..n {
                if mdp.transition()[[s, a, s2]] > 0.0 {
                    restricted[s].push(s2);
                }
            }
        }
    }
    for row in &mut restricted {
        row.sort_unstable();
        row.dedup();
    }
    let mec_states: Vec<usize> = (0..n).filter(|&s| in_mec[s]).collect();
    if strongly_connected_on(&restricted, &mec_states) {
        Accessibility::WeaklyCommunicating
    } else {
        Accessibility::NotWeaklyCommunicating
    }
}

fn strongly_connected_on(adj: &[Vec<usize>], subset: &[usize]) -> bool {
    if subset.is_empty() {
        return false;
    }
    let inside: std::collections::HashSet<usize> = subset.iter().copied().collect();
    let comps = tarjan_scc(adj);
    // The subset is strongly connected iff exactly one SCC covers it.
    comps
        .iter()
        .filter(|c| c.iter().any(|v| inside.contains(v)))
        .count()
        == 1
        && comps
            .iter()
            .find(|c| c.iter().any(|v| inside.contains(v)))
            .map(|c| c.iter().filter(|v| inside.contains(v)).count() == subset.len())
            .unwrap_or(false)
}

/// Maximal end components: the largest sub-MDPs (state set + allowed action
/// sets) that are closed and strongly connected. Computed by the standard
/// iterative SCC-pruning procedure.
///
/// Returns `(states, actions_per_state)` pairs; `actions_per_state[i]` lists
/// the surviving actions of `states[i]`.
pub fn maximal_end_components(mdp: &Mdp) -> Vec<(Vec<usize>, Vec<Vec<usize>>)> {
    let n = mdp.num_states();
    // allowed[s] = candidate actions of s; None once s is discarded.
    let mut allowed: Vec<Option<Vec<usize>>> =
        (0..n).map(|s| Some(mdp.available_actions(s))).collect();
    loop {
        // Digraph under surviving actions.
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|s| match &allowed[s] {
                None => Vec::new(),
                Some(acts) => {
                    let mut out: Vec<usize> = Vec::new();
                    for &a in acts {
                        for s2 in 0..n {
                            if mdp.transition()[[s, a, s2]] > 0.0 {
                                out.push(s2);
                            }
                        }
                    }
                    out.sort_unstable();
                    out.dedup();
                    out
                }
            })
            .collect();
        let comps = tarjan_scc(&adj);
        let mut comp_of = vec![usize::MAX; n];
        for (cid, comp) in comps.iter().enumerate() {
            for &v in comp {
                comp_of[v] = cid;
            }
        }
        let mut changed = false;
        for s in 0..n {
            let Some(acts) = allowed[s].clone() else {
                continue;
            };
            // Keep actions whose support stays inside s's component; the
            // component must also contain a cycle through s.
            let kept: Vec<usize> = acts
                .into_iter()
                .filter(|&a| {
                    (0..n).all(|s2| {
                        mdp.transition()[[s, a, s2]] == 0.0 || comp_of[s2] == comp_of[s]
                    })
                })
                .collect();
            let comp = &comps[comp_of[s]];
            let self_loop_ok = comp.len() > 1
                || kept
                    .iter()
                    .any(|&a| mdp.transition()[[s, a, s]] > 0.0);
            if kept.is_empty() || !self_loop_ok {
                allowed[s] = None;
                changed = true;
            } else if allowed[s].as_ref().map(|v| v.len()) != Some(kept.len()) {
                allowed[s] = Some(kept);
                changed = true;
            } else {
                allowed[s] = Some(kept);
            }
        }
        if !changed {
            // Final components over surviving states are the MECs.
            let mut out = Vec::new();
            for comp in &comps {
                let members: Vec<usize> = comp
                    .iter()
                    .copied()
                    .filter(|&s| allowed[s].is_some())
                    .collect();
                if members.is_empty() || members.len() != comp.len() {
                    continue;
                }
                let acts = members
                    .iter()
                    .map(|&s| allowed[s].clone().unwrap())
                    .collect();
                out.push((members, acts));
            }
            return out;
        }
    }
}

// ------------------------------------------------------------------
// Stationary and limiting matrices.

/// Stationary distribution of a unichain chain. The distribution is
/// independent of `start`; the argument is kept for signature generality and
/// bounds-checked. Errors on multichain input.
pub fn stationary_distribution(chain: &InducedChain, start: usize) -> Result<Array1<f64>> {
    let n = chain.num_states();
    if start >= n {
        return Err(Error::Domain(format!("start state {start} out of range")));
    }
    let classification = classify_states(chain);
    if classification.recurrent_classes.len() != 1 {
        return Err(Error::Multichain {
            classes: classification.recurrent_classes.len(),
        });
    }
    let class = &classification.recurrent_classes[0];
    let pi = class_stationary(chain, class)?;
    let mut full = Array1::zeros(n);
    for (i, &s) in class.iter().enumerate() {
        full[s] = pi[i];
    }
    Ok(full)
}

/// Stationary distribution restricted to one recurrent class.
fn class_stationary(chain: &InducedChain, class: &[usize]) -> Result<Array1<f64>> {
    let k = class.len();
    if k == 1 {
        return Ok(Array1::from_vec(vec![1.0]));
    }
    // Solve x^T (P - I) = 0 with sum(x) = 1: transpose system with the last
    // equation replaced by the normalization row.
    let mut a = Array2::zeros((k, k));
    for (i, &si) in class.iter().enumerate() {
        for (j, &sj) in class.iter().enumerate() {
            // (P^T - I) entry [i, j] = P[j, i] - delta
            a[[i, j]] = chain.p()[[sj, si]] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..k {
        a[[k - 1, j]] = 1.0;
    }
    let mut b = Array1::zeros(k);
    b[k - 1] = 1.0;
    let x = LuFactor::new(&a)?.solve(&b)?;
    Ok(x)
}

/// Limiting (Cesaro) matrix P* of any finite chain: rows of recurrent states
/// carry their class's stationary distribution; transient rows mix class
/// distributions by absorption probability.
pub fn limiting_matrix(chain: &InducedChain) -> Result<Array2<f64>> {
    let n = chain.num_states();
    let classification = classify_states(chain);
    let classes = &classification.recurrent_classes;
    let mut star = Array2::zeros((n, n));
    let mut class_dists = Vec::with_capacity(classes.len());
    for class in classes {
        let pi = class_stationary(chain, class)?;
        for &s in class {
            for (j, &s2) in class.iter().enumerate() {
                star[[s, s2]] = pi[j];
            }
        }
        class_dists.push(pi);
    }
    let transient = classification.transient_states();
    if transient.is_empty() {
        return Ok(star);
    }
    // Absorption probabilities: (I - Q) b_c = P[T, class] 1, one rhs per class.
    let t = transient.len();
    let mut i_minus_q = Array2::zeros((t, t));
    for (i, &si) in transient.iter().enumerate() {
        for (j, &sj) in transient.iter().enumerate() {
            i_minus_q[[i, j]] = (if i == j { 1.0 } else { 0.0 }) - chain.p()[[si, sj]];
        }
    }
    let lu = LuFactor::new(&i_minus_q)?;
    for (cid, class) in classes.iter().enumerate() {
        let mut rhs = Array1::zeros(t);
        for (i, &si) in transient.iter().enumerate() {
            let mut acc = 0.0;
            for &s2 in class {
                acc += chain.p()[[si, s2]];
            }
            rhs[i] = acc;
        }
        let absorb = lu.solve(&rhs)?;
        for (i, &si) in transient.iter().enumerate() {
            for (j, &s2) in class.iter().enumerate() {
                star[[si, s2]] = absorb[i] * class_dists[cid][j];
            }
        }
    }
    Ok(star)
}
