//! Small canonical models used across tests, docs, and the CLI examples.

use ndarray::{Array1, Array2, Array3};

use crate::mdp::{Mdp, PolicyTable};

/// Three-state deterministic MDP with exactly two stationary deterministic
/// policies ("blue" and "red") that differ only in the first state; the last
/// state is a zero-reward absorbing terminal. Classic illustration that the
/// total-reward and low-order sensitive criteria can be underselective
/// (Puterman, "Markov Decision Processes", Fig. 10.1.1).
///
/// Action 0 in s0 is "blue" (straight to s2, reward 2), action 1 is "red"
/// (detour via s1, reward 1 then 1).
pub fn puterman_three_state() -> Mdp {
    let mut t = Array3::zeros((3, 2, 3));
    let mut r = Array2::zeros((3, 2));
    // s0, blue
    t[[0, 0, 2]] = 1.0;
    r[[0, 0]] = 2.0;
    // s0, red
    t[[0, 1, 1]] = 1.0;
    r[[0, 1]] = 1.0;
    // s1, only action: to s2, reward 1
    t[[1, 0, 2]] = 1.0;
    r[[1, 0]] = 1.0;
    t[[1, 1, 1]] = 1.0; // masked filler row
    // s2, only action: absorbing, reward 0
    t[[2, 0, 2]] = 1.0;
    t[[2, 1, 2]] = 1.0; // masked filler row
    let isd = Array1::from_vec(vec![1.0, 0.0, 0.0]);
    let mut available = Array2::from_elem((3, 2), true);
    available[[1, 1]] = false;
    available[[2, 1]] = false;
    Mdp::with_parts(
        t,
        r,
        None,
        isd,
        available,
        Some(vec!["s0".into(), "s1".into(), "s2".into()]),
        Some(vec!["blue".into(), "red".into()]),
    )
    .expect("fixture is valid")
}

/// The "blue" deterministic policy of [`puterman_three_state`].
pub fn blue_policy() -> PolicyTable {
    PolicyTable::from_actions(&[0, 0, 0], 2).expect("valid")
}

/// The "red" deterministic policy of [`puterman_three_state`].
pub fn red_policy() -> PolicyTable {
    PolicyTable::from_actions(&[1, 0, 0], 2).expect("valid")
}

/// One state, one self-loop action with constant reward `c`.
pub fn single_loop(c: f64) -> Mdp {
    let mut t = Array3::zeros((1, 1, 1));
    t[[0, 0, 0]] = 1.0;
    let mut r = Array2::zeros((1, 1));
    r[[0, 0]] = c;
    Mdp::new(t, r, Array1::from_vec(vec![1.0])).expect("fixture is valid")
}

/// Two states deterministically swapping each step, rewards (2, 0); a
/// period-2 irreducible chain with gain 1 from both states.
pub fn two_state_swap() -> Mdp {
    let mut t = Array3::zeros((2, 1, 2));
    t[[0, 0, 1]] = 1.0;
    t[[1, 0, 0]] = 1.0;
    let mut r = Array2::zeros((2, 1));
    r[[0, 0]] = 2.0;
    let isd = Array1::from_vec(vec![1.0, 0.0]);
    Mdp::new(t, r, isd).expect("fixture is valid")
}

/// Ring of `n` states with two actions everywhere: advance or stay. Handy
/// when a test needs exactly `2^n` deterministic policies.
pub fn two_action_ring(n: usize) -> Mdp {
    let mut t = Array3::zeros((n, 2, n));
    let mut r = Array2::zeros((n, 2));
    for s in 0..n {
        t[[s, 0, (s + 1) % n]] = 1.0;
        t[[s, 1, s]] = 1.0;
        r[[s, 1]] = 1.0;
    }
    let isd = Array1::from_elem(n, 1.0 / n as f64);
    Mdp::new(t, r, isd).expect("fixture is valid")
}
