//! Exact evaluation of a fixed policy under every criterion: discounted and
//! total values, gain, bias and higher Laurent-expansion coefficients, the
//! deviation matrix that generates them, discount-independent identities
//! linking gain to discounted values, effective horizons, and a Monte-Carlo
//! check of the geometric-termination interpretation of discounting.

mod gradient;

pub use gradient::{gain_gradient, gradient_identity_residual, GradientIdentityReport};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{classify_states, limiting_matrix, stationary_distribution};
use crate::error::{Error, Result};
use crate::linalg::{inf_norm_vec, LuFactor, COND_LIMIT};
use crate::mdp::{induce_chain, InducedChain, Mdp, PolicyTable};

/// Laurent-expansion coefficients v_{-1} (gain), v_0 (bias), ..., v_{n_max}
/// of a chain's discounted value function.
#[derive(Debug, Clone)]
pub struct LaurentCoefficients {
    coeffs: Vec<Array1<f64>>,
}

impl LaurentCoefficients {
    /// Coefficient v_n for n in -1..=n_max.
    pub fn v(&self, n: i32) -> &Array1<f64> {
        assert!(n >= -1 && n <= self.n_max(), "coefficient index out of range");
        &self.coeffs[(n + 1) as usize]
    }

    pub fn n_max(&self) -> i32 {
        self.coeffs.len() as i32 - 2
    }

    /// The gain term v_{-1}.
    pub fn gain(&self) -> &Array1<f64> {
        self.v(-1)
    }

    /// The bias term v_0.
    pub fn bias(&self) -> &Array1<f64> {
        self.v(0)
    }

    /// Partial-sum reconstruction of the discounted value at `gamma`:
    /// (1/g)[g/(1-g) v_{-1} + v_0 + sum_{n>=1} ((1-g)/g)^n v_n].
    /// Converges to the exact v_gamma as n_max grows, for gamma close
    /// enough to 1 relative to the chain's subdominant eigenvalues.
    pub fn reconstruct(&self, gamma: f64) -> Result<Array1<f64>> {
        if !(0.0..1.0).contains(&gamma) || gamma == 0.0 {
            return Err(Error::Domain(
                "reconstruction needs gamma in (0, 1)".into(),
            ));
        }
        let ratio = (1.0 - gamma) / gamma;
        let mut acc = self.v(-1) * (gamma / (1.0 - gamma)) + self.v(0);
        let mut w = 1.0;
        for n in 1..=self.n_max() {
            w *= ratio;
            acc = acc + self.v(n) * w;
        }
        Ok(acc / gamma)
    }
}

/// The deviation matrix D = (I - P + P*)^{-1} - P*. It annihilates the
/// stationary subspace (P*D = DP* = 0) and satisfies D(I - P + P*) = I - P*,
/// which makes it the generator of the Laurent coefficients: bias = D r and
/// v_{n+1} = -D v_n.
#[derive(Debug, Clone)]
pub struct DeviationMatrix {
    pub d: Array2<f64>,
}

/// Discounted values: the unique solution of (I - gamma P) v = r.
pub fn discounted_values(chain: &InducedChain, gamma: f64) -> Result<Array1<f64>> {
    check_gamma(gamma)?;
    let n = chain.num_states();
    let mut a = chain.p() * (-gamma);
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    LuFactor::new(&a)?.solve(chain.r())
}

/// Discounted action values q(s, a) = r(s, a) + gamma * sum_s' p(s'|s,a) v(s').
/// Rows for unavailable actions are computed from their stored (well-formed)
/// transition rows; callers that extract policies must respect the mask.
pub fn discounted_q(mdp: &Mdp, policy: &PolicyTable, gamma: f64) -> Result<Array2<f64>> {
    let chain = induce_chain(mdp, policy)?;
    let v = discounted_values(&chain, gamma)?;
    Ok(q_from_values(mdp, &v, gamma))
}

/// One-step backup of a state-value vector into action values.
pub fn q_from_values(mdp: &Mdp, v: &Array1<f64>, gamma: f64) -> Array2<f64> {
    let n = mdp.num_states();
    let m = mdp.num_actions();
    let mut q = Array2::zeros((n, m));
    for s in 0..n {
        for a in 0..m {
            let mut acc = 0.0;
            for s2 in 0..n {
                acc += mdp.transition()[[s, a, s2]] * v[s2];
            }
            q[[s, a]] = mdp.reward()[[s, a]] + gamma * acc;
        }
    }
    q
}

/// Expected total (undiscounted, unbounded-horizon) values. Defined only
/// when every recurrent state has zero reward; the values are then zero on
/// recurrent states and solve (I - Q) x = r on the transient block.
pub fn total_values(chain: &InducedChain) -> Result<Array1<f64>> {
    let classification = classify_states(chain);
    for (s, class) in classification.classes.iter().enumerate() {
        if matches!(class, crate::chain::StateClass::Recurrent { .. })
            && chain.r()[s].abs() > 1e-12
        {
            return Err(Error::DivergentTotal {
                state: s,
                reward: chain.r()[s],
            });
        }
    }
    let transient = classification.transient_states();
    let n = chain.num_states();
    let mut v = Array1::zeros(n);
    if transient.is_empty() {
        return Ok(v);
    }
    let t = transient.len();
    let mut i_minus_q = Array2::zeros((t, t));
    let mut r = Array1::zeros(t);
    for (i, &si) in transient.iter().enumerate() {
        r[i] = chain.r()[si];
        for (j, &sj) in transient.iter().enumerate() {
            i_minus_q[[i, j]] = (if i == j { 1.0 } else { 0.0 }) - chain.p()[[si, sj]];
        }
    }
    let x = LuFactor::new(&i_minus_q)?.solve(&r)?;
    for (i, &si) in transient.iter().enumerate() {
        v[si] = x[i];
    }
    Ok(v)
}

/// Long-run average reward per state: v_g = P* r. Constant across states on
/// unichain chains.
pub fn gain(chain: &InducedChain) -> Result<Array1<f64>> {
    let star = limiting_matrix(chain)?;
    Ok(star.dot(chain.r()))
}

/// Compute the deviation matrix of a chain.
pub fn deviation_matrix(chain: &InducedChain) -> Result<DeviationMatrix> {
    let n = chain.num_states();
    let star = limiting_matrix(chain)?;
    let mut a = &star - chain.p();
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    let lu = LuFactor::new(&a)?;
    let cond = lu.cond_estimate()?;
    if cond > COND_LIMIT {
        return Err(Error::IllConditioned { cond });
    }
    let z = lu.inverse()?;
    Ok(DeviationMatrix { d: z - &star })
}

/// Gain, bias, and higher expansion coefficients up to order `n_max`:
/// v_{-1} = P* r, v_0 = D r, v_{n+1} = -D v_n.
pub fn laurent_coefficients(chain: &InducedChain, n_max: i32) -> Result<LaurentCoefficients> {
    if n_max < 0 {
        return Err(Error::Domain("n_max must be >= 0".into()));
    }
    let star = limiting_matrix(chain)?;
    let dev = deviation_matrix(chain)?;
    let mut coeffs = Vec::with_capacity((n_max + 2) as usize);
    coeffs.push(star.dot(chain.r()));
    let mut current = dev.d.dot(chain.r());
    for _ in 0..n_max {
        let next = dev.d.dot(&current) * -1.0;
        coeffs.push(current);
        current = next;
    }
    coeffs.push(current);
    Ok(LaurentCoefficients { coeffs })
}

/// The tail e(pi, gamma) = v_gamma - v_{-1}/(1 - gamma) - v_0 left after the
/// truncated two-term expansion; shrinks to zero as gamma approaches 1.
pub fn truncation_residual(chain: &InducedChain, gamma: f64) -> Result<Array1<f64>> {
    check_gamma(gamma)?;
    let v = discounted_values(chain, gamma)?;
    let coeffs = laurent_coefficients(chain, 0)?;
    Ok(v - coeffs.v(-1) / (1.0 - gamma) - coeffs.v(0))
}

/// Residuals of the two gain/discounted-value identities at one discount
/// factor (see [`gain_from_discounted`]).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GainIdentityResiduals {
    pub gamma: f64,
    /// |(1-gamma) * sum_s pstar(s) v_gamma(s) - v_g|: zero for every gamma on
    /// unichain chains (stationarity makes the weighting exact).
    pub stationary_weighted_gap: f64,
    /// max_s |(1-gamma) v_gamma(s) - v_g(s)|: an O(1-gamma) quantity that
    /// only vanishes in the gamma -> 1 limit.
    pub scaled_value_gap: f64,
}

/// Evaluate, per discount factor, how the scaled discounted value relates to
/// the gain: weighted by the stationary distribution the identity is exact at
/// every gamma, while the plain scaled value only converges as gamma -> 1.
/// Requires a unichain chain.
pub fn gain_from_discounted(
    chain: &InducedChain,
    gammas: &[f64],
) -> Result<Vec<GainIdentityResiduals>> {
    let pstar = stationary_distribution(chain, 0)?;
    let g = gain(chain)?;
    let mut out = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        check_gamma(gamma)?;
        let v = discounted_values(chain, gamma)?;
        let weighted: f64 = pstar.dot(&v);
        let stationary_weighted_gap = ((1.0 - gamma) * weighted - g[0]).abs();
        let scaled_value_gap = inf_norm_vec(&(&v * (1.0 - gamma) - &g));
        out.push(GainIdentityResiduals {
            gamma,
            stationary_weighted_gap,
            scaled_value_gap,
        });
    }
    Ok(out)
}

/// The resolvent-style matrix (I - gamma P)^{-1}, whose rows are improper
/// distributions summing to 1/(1 - gamma); scaled by (1 - gamma) it converges
/// to P* as gamma -> 1.
pub fn improper_discounted_matrix(chain: &InducedChain, gamma: f64) -> Result<Array2<f64>> {
    check_gamma(gamma)?;
    let n = chain.num_states();
    let mut a = chain.p() * (-gamma);
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    LuFactor::new(&a)?.inverse()
}

/// Smallest horizon tau with tail sum_{t>=tau} gamma^t r_max <= epsilon:
/// tau = ceil(log_gamma((1-gamma) epsilon / r_max)).
pub fn effective_horizon(gamma: f64, epsilon: f64, r_max: f64) -> Result<u64> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(Error::Domain("gamma must be in (0, 1)".into()));
    }
    if epsilon <= 0.0 || r_max <= 0.0 {
        return Err(Error::Domain("epsilon and r_max must be positive".into()));
    }
    let x = (1.0 - gamma) * epsilon / r_max;
    if x >= 1.0 {
        return Err(Error::Domain(
            "(1-gamma) * epsilon / r_max must be below 1".into(),
        ));
    }
    Ok((x.ln() / gamma.ln()).ceil() as u64)
}

/// Monte-Carlo estimate of undiscounted returns truncated at a random
/// geometric horizon with continuation probability gamma.
#[derive(Debug, Clone)]
pub struct GeometricEstimate {
    /// Per-start-state mean return.
    pub mean: Array1<f64>,
    /// Per-start-state standard error of the mean.
    pub stderr: Array1<f64>,
}

/// Roll out `n_rollouts` episodes from every start state, each terminated
/// after every step with probability (1 - gamma), and average the
/// undiscounted returns. The estimate converges to the discounted value
/// because the random horizon T has P(T > t) = gamma^t.
pub fn geometric_termination_estimate(
    mdp: &Mdp,
    policy: &PolicyTable,
    gamma: f64,
    n_rollouts: usize,
    seed: u64,
) -> Result<GeometricEstimate> {
    check_gamma(gamma)?;
    if n_rollouts == 0 {
        return Err(Error::Domain("n_rollouts must be at least 1".into()));
    }
    policy.validate_against(mdp)?;
    let n = mdp.num_states();
    let mut mean = Array1::zeros(n);
    let mut stderr = Array1::zeros(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s0 in 0..n {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n_rollouts {
            let mut s = s0;
            let mut ret = 0.0;
            loop {
                let a = sample_action(policy, s, &mut rng);
                let (s2, r) = mdp.sample_transition(s, a, &mut rng)?;
                ret += r;
                s = s2;
                // Continue with probability gamma; the first reward is
                // always collected (the horizon is at least 1).
                if rng.random::<f64>() >= gamma {
                    break;
                }
            }
            sum += ret;
            sum_sq += ret * ret;
        }
        let m = sum / n_rollouts as f64;
        let var = (sum_sq / n_rollouts as f64 - m * m).max(0.0);
        mean[s0] = m;
        stderr[s0] = (var / n_rollouts as f64).sqrt();
    }
    Ok(GeometricEstimate { mean, stderr })
}

fn sample_action<R: Rng>(policy: &PolicyTable, s: usize, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let row = policy.probs().row(s);
    for (a, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return a;
        }
    }
    row.len() - 1
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

impl Mdp {
    /// Sample one environment step: next state from p(.|s, a), reward from
    /// the (s, a, s')-resolved table when present, else the expected reward.
    pub fn sample_transition<R: Rng>(
        &self,
        s: usize,
        a: usize,
        rng: &mut R,
    ) -> Result<(usize, f64)> {
        if s >= self.num_states() || a >= self.num_actions() {
            return Err(Error::Domain(format!("state {s} / action {a} out of range")));
        }
        if !self.is_available(s, a) {
            return Err(Error::Domain(format!(
                "action {a} is not available in state {s}"
            )));
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let n = self.num_states();
        let mut s2 = n - 1;
        for k in 0..n {
            acc += self.transition()[[s, a, k]];
            if u < acc {
                s2 = k;
                break;
            }
        }
        let r = match self.reward_triple() {
            Some(t) => t[[s, a, s2]],
            None => self.reward()[[s, a]],
        };
        Ok((s2, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mdp::induce_chain;

    fn blue_chain() -> InducedChain {
        let mdp = fixtures::puterman_three_state();
        induce_chain(&mdp, &fixtures::blue_policy()).unwrap()
    }

    fn red_chain() -> InducedChain {
        let mdp = fixtures::puterman_three_state();
        induce_chain(&mdp, &fixtures::red_policy()).unwrap()
    }

    fn loop_chain(c: f64) -> InducedChain {
        let mdp = fixtures::single_loop(c);
        let policy = PolicyTable::from_actions(&[0], 1).unwrap();
        induce_chain(&mdp, &policy).unwrap()
    }

    #[test]
    fn discounted_value_examples() {
        // Blue collects 2 then zeros regardless of gamma.
        for &gamma in &[0.0, 0.3, 0.7, 0.99] {
            let v = discounted_values(&blue_chain(), gamma).unwrap();
            assert!((v[0] - 2.0).abs() < 1e-12);
        }
        // Red at gamma = 0.5: 1 + 0.5 * 1.
        let v = discounted_values(&red_chain(), 0.5).unwrap();
        assert!((v[0] - 1.5).abs() < 1e-12);
        // Self-loop: c / (1 - gamma).
        let v = discounted_values(&loop_chain(3.0), 0.5).unwrap();
        assert!((v[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn discounted_rejects_bad_gamma() {
        assert!(discounted_values(&loop_chain(1.0), 1.0).is_err());
        assert!(discounted_values(&loop_chain(1.0), -0.1).is_err());
    }

    #[test]
    fn q_value_examples() {
        let mdp = fixtures::single_loop(3.0);
        let q = discounted_q(&mdp, &PolicyTable::from_actions(&[0], 1).unwrap(), 0.5).unwrap();
        assert!((q[[0, 0]] - 6.0).abs() < 1e-12);

        let mdp = fixtures::puterman_three_state();
        let q = discounted_q(&mdp, &fixtures::red_policy(), 0.5).unwrap();
        assert!((q[[0, 1]] - 1.5).abs() < 1e-12); // red action at s0
        let q = discounted_q(&mdp, &fixtures::blue_policy(), 0.5).unwrap();
        assert!((q[[0, 0]] - 2.0).abs() < 1e-12); // blue action at s0

        // v(s) = E_{a~pi} q(s, a).
        let v = discounted_values(&induce_chain(&mdp, &fixtures::blue_policy()).unwrap(), 0.5)
            .unwrap();
        for s in 0..3 {
            assert!((q_row_expectation(&q, &fixtures::blue_policy(), s) - v[s]).abs() < 1e-10);
        }
    }

    fn q_row_expectation(q: &Array2<f64>, policy: &PolicyTable, s: usize) -> f64 {
        (0..q.ncols()).map(|a| policy.probs()[[s, a]] * q[[s, a]]).sum()
    }

    #[test]
    fn total_value_examples() {
        let v = total_values(&blue_chain()).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12);
        let v = total_values(&red_chain()).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12);
        assert!(matches!(
            total_values(&loop_chain(1.0)),
            Err(Error::DivergentTotal { state: 0, .. })
        ));
    }

    #[test]
    fn gain_examples() {
        assert!((gain(&loop_chain(3.0)).unwrap()[0] - 3.0).abs() < 1e-12);
        for chain in [blue_chain(), red_chain()] {
            let g = gain(&chain).unwrap();
            for s in 0..3 {
                assert!(g[s].abs() < 1e-12);
            }
        }
        let mdp = fixtures::two_state_swap();
        let chain = induce_chain(&mdp, &PolicyTable::from_actions(&[0, 0], 1).unwrap()).unwrap();
        let g = gain(&chain).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deviation_matrix_examples() {
        // For the blue chain, I - P + P* = I, so D = I - P*.
        let chain = blue_chain();
        let dev = deviation_matrix(&chain).unwrap();
        let star = limiting_matrix(&chain).unwrap();
        let expect = Array2::<f64>::eye(3) - &star;
        for i in 0..3 {
            for j in 0..3 {
                assert!((dev.d[[i, j]] - expect[[i, j]]).abs() < 1e-10);
            }
        }
        // Single self-loop: D = 0.
        let dev = deviation_matrix(&loop_chain(5.0)).unwrap();
        assert!(dev.d[[0, 0]].abs() < 1e-12);
        // Identity chain: D = 0.
        let chain = InducedChain::new(Array2::<f64>::eye(3), Array1::zeros(3)).unwrap();
        let dev = deviation_matrix(&chain).unwrap();
        assert!(dev.d.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn deviation_matrix_identities() {
        let chain = red_chain();
        let dev = deviation_matrix(&chain).unwrap();
        let star = limiting_matrix(&chain).unwrap();
        let n = 3;
        let mut a = &star - chain.p();
        for i in 0..n {
            a[[i, i]] += 1.0;
        }
        let lhs = dev.d.dot(&a);
        let rhs = Array2::<f64>::eye(n) - &star;
        for i in 0..n {
            for j in 0..n {
                assert!((lhs[[i, j]] - rhs[[i, j]]).abs() < 1e-9);
            }
        }
        let zero1 = star.dot(&dev.d);
        let zero2 = dev.d.dot(&star);
        assert!(zero1.iter().chain(zero2.iter()).all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn laurent_coefficient_examples() {
        // Blue: v_{-1} = 0, v_0 = (2, 1, 0), v_1 = (-2, -1, 0).
        let lc = laurent_coefficients(&blue_chain(), 1).unwrap();
        assert!(lc.v(-1).iter().all(|x| x.abs() < 1e-10));
        let v0 = lc.v(0);
        assert!((v0[0] - 2.0).abs() < 1e-10 && (v0[1] - 1.0).abs() < 1e-10 && v0[2].abs() < 1e-10);
        let v1 = lc.v(1);
        assert!((v1[0] + 2.0).abs() < 1e-10 && (v1[1] + 1.0).abs() < 1e-10 && v1[2].abs() < 1e-10);

        // Red: v_0 = (2, 1, 0), v_1 = (-3, -1, 0).
        let lc = laurent_coefficients(&red_chain(), 1).unwrap();
        let v0 = lc.v(0);
        assert!((v0[0] - 2.0).abs() < 1e-10 && (v0[1] - 1.0).abs() < 1e-10);
        let v1 = lc.v(1);
        assert!((v1[0] + 3.0).abs() < 1e-10 && (v1[1] + 1.0).abs() < 1e-10);

        // Self-loop: gain 3, all higher coefficients zero.
        let lc = laurent_coefficients(&loop_chain(3.0), 2).unwrap();
        assert!((lc.v(-1)[0] - 3.0).abs() < 1e-12);
        for n in 0..=2 {
            assert!(lc.v(n)[0].abs() < 1e-12);
        }
    }

    #[test]
    fn nested_equations_hold() {
        for chain in [blue_chain(), red_chain(), loop_chain(2.0)] {
            let lc = laurent_coefficients(&chain, 3).unwrap();
            let p = chain.p();
            // v_{-1} = P v_{-1}
            let lhs = p.dot(lc.v(-1));
            for s in 0..chain.num_states() {
                assert!((lhs[s] - lc.v(-1)[s]).abs() < 1e-9);
            }
            // v_0 = r - v_{-1} + P v_0
            let rhs = chain.r() - lc.v(-1) + p.dot(lc.v(0));
            for s in 0..chain.num_states() {
                assert!((rhs[s] - lc.v(0)[s]).abs() < 1e-9);
            }
            // v_{n+1} = -v_n + P v_{n+1}
            for n in 0..=2 {
                let rhs = p.dot(lc.v(n + 1)) - lc.v(n);
                for s in 0..chain.num_states() {
                    assert!((rhs[s] - lc.v(n + 1)[s]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn truncation_residual_examples() {
        // Blue: v_gamma equals v_0 exactly, residual 0.
        let e = truncation_residual(&blue_chain(), 0.7).unwrap();
        assert!(e.iter().all(|x| x.abs() < 1e-10));
        // Red at gamma: v_gamma(s0) = 1 + gamma, v_0(s0) = 2 -> e = gamma - 1.
        let e = truncation_residual(&red_chain(), 0.7).unwrap();
        assert!((e[0] - (0.7 - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn gain_identity_examples() {
        let res = gain_from_discounted(&loop_chain(3.0), &[0.25]).unwrap();
        assert!(res[0].stationary_weighted_gap < 1e-12);
        assert!(res[0].scaled_value_gap < 1e-12);

        let res = gain_from_discounted(&red_chain(), &[0.3]).unwrap();
        assert!(res[0].stationary_weighted_gap < 1e-12);
    }

    #[test]
    fn improper_matrix_examples() {
        let m = improper_discounted_matrix(&loop_chain(1.0), 0.5).unwrap();
        assert!((m[[0, 0]] - 2.0).abs() < 1e-12);

        let chain = red_chain();
        let m = improper_discounted_matrix(&chain, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m[[i, j]] - expect).abs() < 1e-12);
            }
        }
        // Row sums 1/(1-gamma).
        let m = improper_discounted_matrix(&chain, 0.8).unwrap();
        for i in 0..3 {
            let s: f64 = m.row(i).sum();
            assert!((s - 5.0).abs() < 1e-8);
        }
    }

    #[test]
    fn effective_horizon_examples() {
        assert_eq!(effective_horizon(0.9, 0.1, 1.0).unwrap(), 44);
        assert_eq!(effective_horizon(0.5, 1.0, 1.0).unwrap(), 1);
        assert!(effective_horizon(0.5, 10.0, 1.0).is_err()); // (1-g)e/rmax >= 1
        assert!(effective_horizon(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn effective_horizon_tail_bound() {
        // Truncated discounted sum on the unit self-loop differs from the
        // full value by at most epsilon.
        let (gamma, eps) = (0.9f64, 0.1f64);
        let tau = effective_horizon(gamma, eps, 1.0).unwrap();
        let full = 1.0 / (1.0 - gamma);
        let truncated: f64 = (0..tau).map(|t| gamma.powi(t as i32)).sum();
        assert!(full - truncated <= eps + 1e-12);
    }

    #[test]
    fn geometric_estimate_matches_discounted_value() {
        let mdp = fixtures::single_loop(3.0);
        let policy = PolicyTable::from_actions(&[0], 1).unwrap();
        let est = geometric_termination_estimate(&mdp, &policy, 0.5, 100_000, 7).unwrap();
        assert!((est.mean[0] - 6.0).abs() < 3.0 * est.stderr[0].max(1e-9));

        // gamma = 0: every rollout is a single reward.
        let est = geometric_termination_estimate(&mdp, &policy, 0.0, 100, 7).unwrap();
        assert!((est.mean[0] - 3.0).abs() < 1e-12);
        assert!(est.stderr[0] < 1e-12);
    }

    #[test]
    fn reconstruction_converges() {
        // The series converges geometrically at rate (1-g)/g * sr(D); this
        // chain has sr(D) = 1, so the rate is 2/3 and 60 terms reach ~1e-9.
        let chain = red_chain();
        let gamma = 0.6;
        let exact = discounted_values(&chain, gamma).unwrap();
        let mut last = f64::INFINITY;
        for n in [10, 30, 60] {
            let lc = laurent_coefficients(&chain, n).unwrap();
            let approx = lc.reconstruct(gamma).unwrap();
            let res = inf_norm_vec(&(&approx - &exact));
            assert!(res <= last + 1e-15, "residual must shrink with the order");
            last = res;
        }
        assert!(last < 1e-6, "residual {last} at 60 terms");
    }
}
