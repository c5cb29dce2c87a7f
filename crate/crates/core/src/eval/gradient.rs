//! Exact gain gradients for softmax-parameterized policies, via the
//! stationary-distribution sensitivity identity dpstar^T = pstar^T dP D,
//! and the discount-independent two-term gradient identity that rewrites
//! the gain gradient through discounted value functions.

use ndarray::{Array1, Array2};

use crate::chain::{classify_chain, stationary_distribution};
use crate::envs::PolicyFeaturizer;
use crate::error::{Error, Result};
use crate::eval::{deviation_matrix, discounted_values, q_from_values};
use crate::linalg::inf_norm_vec;
use crate::mdp::{induce_chain, Mdp};

type ValueAndQFn = Box<dyn Fn(f64) -> Result<(Array1<f64>, Array2<f64>)>>;

struct Sensitivity {
    r_pi: Array1<f64>,
    pstar: Array1<f64>,
    /// Per parameter: dP[[s, s']].
    dp: Vec<Array2<f64>>,
    /// Per parameter: dr_pi[s].
    dr: Vec<Array1<f64>>,
    /// Per parameter: dpstar[s].
    dpstar: Vec<Array1<f64>>,
    /// Per parameter: dpi[[s, a]].
    dpi: Vec<Array2<f64>>,
    v_of_gamma: ValueAndQFn,
}

fn sensitivity(mdp: &Mdp, feat: &PolicyFeaturizer, theta: &[f64]) -> Result<Sensitivity> {
    let (policy, dpi_all) = feat.policy_and_grads(mdp, theta)?;
    let chain = induce_chain(mdp, &policy)?;
    let report = classify_chain(&chain);
    if !report.is_unichain() {
        return Err(Error::Multichain {
            classes: report.num_recurrent_classes,
        });
    }
    let pstar = stationary_distribution(&chain, 0)?;
    let dev = deviation_matrix(&chain)?;
    let n = mdp.num_states();
    let m = mdp.num_actions();
    let k = feat.param_dim();
    let mut dp = Vec::with_capacity(k);
    let mut dr = Vec::with_capacity(k);
    let mut dpstar = Vec::with_capacity(k);
    let mut dpi = Vec::with_capacity(k);
    for d in 0..k {
        let mut dp_d = Array2::zeros((n, n));
        let mut dr_d = Array1::zeros(n);
        let mut dpi_d = Array2::zeros((n, m));
        for s in 0..n {
            for a in 0..m {
                let w = dpi_all[[d, s, a]];
                dpi_d[[s, a]] = w;
                if w == 0.0 {
                    continue;
                }
                dr_d[s] += w * mdp.reward()[[s, a]];
                for s2 in 0..n {
                    dp_d[[s, s2]] += w * mdp.transition()[[s, a, s2]];
                }
            }
        }
        // dpstar^T = pstar^T dP D; the deviation matrix inverts (I - P) on
        // the complement of the stationary subspace, and pstar^T dP 1 = 0
        // keeps the perturbation inside that complement.
        let lhs = pstar.dot(&dp_d); // row vector pstar^T dP
        let dpstar_d = Array1::from_iter(
            (0..n).map(|j| (0..n).map(|i| lhs[i] * dev.d[[i, j]]).sum::<f64>()),
        );
        dp.push(dp_d);
        dr.push(dr_d);
        dpstar.push(dpstar_d);
        dpi.push(dpi_d);
    }
    let mdp_clone = mdp.clone();
    let chain_clone = chain.clone();
    Ok(Sensitivity {
        r_pi: chain.r().clone(),
        pstar,
        dp,
        dr,
        dpstar,
        dpi,
        v_of_gamma: Box::new(move |gamma| {
            let v = discounted_values(&chain_clone, gamma)?;
            let q = q_from_values(&mdp_clone, &v, gamma);
            Ok((v, q))
        }),
    })
}

fn exact_gradient(sens: &Sensitivity) -> Array1<f64> {
    Array1::from_iter(
        sens.dp
            .iter()
            .zip(&sens.dr)
            .zip(&sens.dpstar)
            .map(|((_, dr_d), dpstar_d)| dpstar_d.dot(&sens.r_pi) + sens.pstar.dot(dr_d)),
    )
}

/// Exact gradient of the gain with respect to the policy parameters, by the
/// product rule on v_g = pstar^T r_pi with the stationary-distribution
/// sensitivity computed through the deviation matrix. Requires the induced
/// chain to be unichain.
pub fn gain_gradient(mdp: &Mdp, feat: &PolicyFeaturizer, theta: &[f64]) -> Result<Array1<f64>> {
    Ok(exact_gradient(&sensitivity(mdp, feat, theta)?))
}

/// Diagnostics of the discounted-value identities for the gain gradient at a
/// fixed discount factor.
#[derive(Debug, Clone)]
pub struct GradientIdentityReport {
    /// Exact gain gradient.
    pub exact: Array1<f64>,
    /// Two-term form: sum_s,a pstar(s) dpi(a|s) q_gamma(s,a)
    /// + (1-gamma) sum_s dpstar(s) v_gamma(s). Equals `exact` at every gamma.
    pub two_term: Array1<f64>,
    /// Score-only inner sum: sum_s pstar(s) sum_s' dP(s'|s) v_gamma(s').
    /// Approaches `exact` only as gamma -> 1 (exactly when rewards are
    /// state-only).
    pub inner_sum: Array1<f64>,
    /// inf-norm of `two_term - exact`.
    pub two_term_gap: f64,
    /// inf-norm of `inner_sum - exact`.
    pub inner_sum_gap: f64,
}

/// Evaluate the two-term gradient identity (exact for all gamma in [0, 1))
/// and the score-only inner sum (exact only in the gamma -> 1 limit) against
/// the exact gain gradient.
pub fn gradient_identity_residual(
    mdp: &Mdp,
    feat: &PolicyFeaturizer,
    theta: &[f64],
    gamma: f64,
) -> Result<GradientIdentityReport> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain(format!(
            "discount factor must be in [0, 1), got {gamma}"
        )));
    }
    let sens = sensitivity(mdp, feat, theta)?;
    let exact = exact_gradient(&sens);
    let (v, q) = (sens.v_of_gamma)(gamma)?;
    let n = mdp.num_states();
    let m = mdp.num_actions();
    let k = sens.dp.len();
    let mut two_term = Array1::zeros(k);
    let mut inner_sum = Array1::zeros(k);
    for d in 0..k {
        let mut t1 = 0.0;
        for s in 0..n {
            for a in 0..m {
                let w = sens.dpi[d][[s, a]];
                if w != 0.0 {
                    t1 += sens.pstar[s] * w * q[[s, a]];
                }
            }
        }
        // (1-gamma) sum_s dpstar(s) v(s); written through dpstar directly so
        // transient states (pstar = 0) need no log-derivative.
        let t2 = (1.0 - gamma) * sens.dpstar[d].dot(&v);
        two_term[d] = t1 + t2;
        let mut isum = 0.0;
        for s in 0..n {
            if sens.pstar[s] == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for s2 in 0..n {
                acc += sens.dp[d][[s, s2]] * v[s2];
            }
            isum += sens.pstar[s] * acc;
        }
        inner_sum[d] = isum;
    }
    let two_term_gap = inf_norm_vec(&(&two_term - &exact));
    let inner_sum_gap = inf_norm_vec(&(&inner_sum - &exact));
    Ok(GradientIdentityReport {
        exact,
        two_term,
        inner_sum,
        two_term_gap,
        inner_sum_gap,
    })
}
