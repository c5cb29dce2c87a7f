#![allow(dead_code)] // each test target compiles its own copy and uses a subset

//! Shared oracles for the integration suites. These stay independent of the
//! library paths they check: finite differences for gradients, explicit
//! power sums for limits, and hand-rolled policy enumeration for
//! classification.

use mdpcrit::envs::PolicyFeaturizer;
use mdpcrit::mdp::{induce_chain, InducedChain, Mdp, PolicyTable};
use ndarray::{Array1, Array2};
use rand::Rng;

/// Central finite-difference gradient of the gain with respect to the
/// policy parameters, via stationary-distribution solves at shifted
/// parameters.
pub fn finite_difference_gain_gradient(
    mdp: &Mdp,
    feat: &PolicyFeaturizer,
    theta: &[f64],
    h: f64,
) -> Array1<f64> {
    let gain_at = |theta: &[f64]| -> f64 {
        let policy = feat.policy(mdp, theta).expect("valid parameters");
        let chain = induce_chain(mdp, &policy).expect("valid policy");
        let pstar = mdpcrit::chain::stationary_distribution(&chain, 0).expect("unichain");
        pstar.dot(chain.r())
    };
    let mut grad = Array1::zeros(theta.len());
    for k in 0..theta.len() {
        let mut up = theta.to_vec();
        up[k] += h;
        let mut dn = theta.to_vec();
        dn[k] -= h;
        grad[k] = (gain_at(&up) - gain_at(&dn)) / (2.0 * h);
    }
    grad
}

/// Partial Cesaro average (1/T) sum_{t<T} P^t computed by explicit
/// accumulation.
pub fn cesaro_average(p: &Array2<f64>, t_max: usize) -> Array2<f64> {
    let n = p.nrows();
    let mut power = Array2::eye(n);
    let mut acc = Array2::zeros((n, n));
    for _ in 0..t_max {
        acc += &power;
        power = power.dot(p);
    }
    acc / t_max as f64
}

/// Random chain drawn from a dense random MDP under a random policy.
pub fn random_chain<R: Rng>(rng: &mut R, num_states: usize) -> InducedChain {
    let mdp = mdpcrit::envs::random_dense_mdp_with(rng, num_states, 2, false);
    let mut probs = Array2::zeros((num_states, 2));
    for s in 0..num_states {
        let p: f64 = rng.random_range(0.05..0.95);
        probs[[s, 0]] = p;
        probs[[s, 1]] = 1.0 - p;
    }
    induce_chain(&mdp, &PolicyTable::new(probs).expect("stochastic rows")).expect("valid")
}
