//! `mdpcrit` compares optimality criteria on finite MDPs: exact policy
//! evaluation under discounted, total, average-reward, and n-discount
//! (sensitive) criteria via Laurent-expansion machinery, Markov chain and
//! MDP classification, optimal-policy-set solvers, Blackwell discount-factor
//! estimation, conversion between absorbing-terminal and resetting models of
//! episodic environments, and tabular Q-learning variants for each criterion.
//!
//! Everything is dense and exact-at-desk-scale: models up to a few thousand
//! states, solved with direct linear algebra rather than sampling, so that
//! questions like "which policies are optimal at this discount factor" have
//! crisp answers.

pub mod chain;
pub mod envs;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod learn;
pub mod linalg;
pub mod mdp;
pub mod solve;
pub mod transform;

pub use error::{Error, Result};
pub use mdp::{induce_chain, InducedChain, Mdp, PolicyTable};
