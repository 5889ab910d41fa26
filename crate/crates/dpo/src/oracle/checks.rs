//! Monte-Carlo verification of the estimator identities and variance
//! results: n-step unbiasedness, the exact variance gap between the unified
//! estimator and its value-baseline special case, and the law-of-total-
//! variance decomposition used as a diagnostic.

use nalgebra::DVector;
use rand::Rng;

use crate::environments::TabularMdp;
use crate::error::{Error, Result};

use super::{joint_transition_matrix, CheckReport, ExactValues, TabularSoftmaxPolicy};

/// Which bootstrap table the estimator plugs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bootstrap {
    /// The exact state-action value.
    Q,
    /// The exact state value.
    V,
}

fn sample_joint<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Monte-Carlo check of n-step unbiasedness: with an exact bootstrap table
/// plugged in, the sample mean of the n-step advantage from each `(s, a)`
/// must match `Q(s, a) - b(s)` within `z_gate` standard errors. One report
/// line per `(state, action, n)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_proposition1<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    policy: &TabularSoftmaxPolicy,
    exact: &ExactValues,
    b_table: &[f64],
    bootstrap: Bootstrap,
    ns: &[usize],
    samples: usize,
    z_gate: f64,
    rng: &mut R,
) -> Result<Vec<CheckReport>> {
    if b_table.len() != mdp.n_states {
        return Err(Error::Dimension("baseline table size mismatch".into()));
    }
    let mut reports = Vec::new();
    for s0 in 0..mdp.n_states {
        for a0 in 0..mdp.n_actions {
            let target = exact.q_at(mdp, s0, a0) - b_table[s0];
            for &n in ns {
                if n == 0 {
                    return Err(Error::Argument("n must be positive".into()));
                }
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for _ in 0..samples {
                    let mut acc = -b_table[s0];
                    let mut disc = 1.0;
                    let (mut s, mut a) = (s0, a0);
                    for _ in 0..n {
                        acc += disc * mdp.reward_at(s, a);
                        disc *= mdp.gamma;
                        s = mdp.sample_next(s, a, rng);
                        a = policy.sample_action(s, rng);
                    }
                    acc += disc
                        * match bootstrap {
                            Bootstrap::Q => exact.q_at(mdp, s, a),
                            Bootstrap::V => exact.v[s],
                        };
                    sum += acc;
                    sum_sq += acc * acc;
                }
                let mean = sum / samples as f64;
                let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
                let z = if var > 0.0 {
                    (mean - target).abs() / (var / samples as f64).sqrt()
                } else if (mean - target).abs() < 1e-10 {
                    0.0
                } else {
                    f64::INFINITY
                };
                let psi = match bootstrap {
                    Bootstrap::Q => "Q",
                    Bootstrap::V => "V",
                };
                reports.push(CheckReport::bounded(
                    format!("prop1[psi={psi}] s{s0} a{a0} n{n}"),
                    z,
                    z_gate,
                ));
            }
        }
    }
    Ok(reports)
}

/// Outcome of the variance-gap check: the Monte-Carlo left side, its
/// standard error, the exact right side, and the z-score of the
/// discrepancy.
#[derive(Debug, Clone)]
pub struct Theorem1Check {
    pub lhs: f64,
    pub standard_error: f64,
    pub rhs: f64,
    pub rhs_irreducible: f64,
    pub rhs_reducible: f64,
    pub z: f64,
}

impl Theorem1Check {
    pub fn passes(&self, z_gate: f64) -> bool {
        self.z.is_finite() && self.z.abs() <= z_gate
    }
}

/// Measures `Var[u A_unified] - Var[u A_gae]` over the normalized
/// discounted state-action distribution by Monte Carlo on common
/// trajectories, and compares against the exact closed form:
/// an irreducible series driven by `(psi - V)^2` (zero when the bootstrap
/// is `V`) plus the reducible baseline term
/// `E[|u|^2 (b^2 - V^2 - 2 Q (b - V))]`.
#[allow(clippy::too_many_arguments)]
pub fn verify_theorem1<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    policy: &TabularSoftmaxPolicy,
    exact: &ExactValues,
    b_table: &[f64],
    bootstrap: Bootstrap,
    lambda: f64,
    samples: usize,
    rng: &mut R,
) -> Result<Theorem1Check> {
    if b_table.len() != mdp.n_states {
        return Err(Error::Dimension("baseline table size mismatch".into()));
    }
    if !(0.0 < lambda && lambda <= 1.0) {
        return Err(Error::Argument("lambda must lie in (0, 1]".into()));
    }
    let gamma = mdp.gamma;
    let gl = gamma * lambda;
    let horizon = ((1e-8f64).ln() / gl.ln()).ceil().max(1.0) as usize;
    let n_sa = mdp.n_states * mdp.n_actions;
    let weights = exact.joint_weights(policy);

    let psi = |s: usize, a: usize| -> f64 {
        match bootstrap {
            Bootstrap::Q => exact.q_at(mdp, s, a),
            Bootstrap::V => exact.v[s],
        }
    };

    // Exact conditional means: E[A_unified | s, a] = Q - b and
    // E[A_gae | s, a] = Q - V, so the mean gradient vectors are exact.
    let dim = n_sa;
    let mut m_unified = vec![0.0; dim];
    let mut m_gae = vec![0.0; dim];
    let mut rhs_reducible = 0.0;
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let w = weights[s * mdp.n_actions + a];
            if w == 0.0 {
                continue;
            }
            let q = exact.q_at(mdp, s, a);
            let u = policy.score(s, a);
            for (i, ui) in u.iter().enumerate() {
                m_unified[i] += w * ui * (q - b_table[s]);
                m_gae[i] += w * ui * (q - exact.v[s]);
            }
            let b = b_table[s];
            let v = exact.v[s];
            rhs_reducible +=
                w * policy.score_sq_norm(s, a) * (b * b - v * v - 2.0 * q * (b - v));
        }
    }

    // Irreducible series via exact distribution propagation.
    let mut rhs_irreducible = 0.0;
    if bootstrap == Bootstrap::Q {
        let m = joint_transition_matrix(mdp, policy);
        let mt = m.transpose();
        let mut gap_sq = vec![0.0; n_sa];
        for s in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                let g = exact.q_at(mdp, s, a) - exact.v[s];
                gap_sq[s * mdp.n_actions + a] = g * g;
            }
        }
        for s in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                let w = weights[s * mdp.n_actions + a];
                if w == 0.0 {
                    continue;
                }
                let mut dist = DVector::zeros(n_sa);
                dist[s * mdp.n_actions + a] = 1.0;
                let mut series = 0.0;
                let mut coef = gamma * gamma * (1.0 - lambda * lambda);
                loop {
                    dist = &mt * dist;
                    let expectation: f64 =
                        dist.iter().zip(&gap_sq).map(|(d, g)| d * g).sum();
                    series += coef * expectation;
                    coef *= gl * gl;
                    if coef < 1e-14 {
                        break;
                    }
                }
                rhs_irreducible += w * policy.score_sq_norm(s, a) * series;
            }
        }
    }
    let rhs = rhs_irreducible + rhs_reducible;

    // Paired Monte Carlo on shared trajectories.
    let mut states = vec![0usize; horizon + 1];
    let mut actions = vec![0usize; horizon + 1];
    let mut sum_d = 0.0;
    let mut sum_d_sq = 0.0;
    for _ in 0..samples {
        let idx = sample_joint(&weights, rng);
        let (s0, a0) = (idx / mdp.n_actions, idx % mdp.n_actions);
        states[0] = s0;
        actions[0] = a0;
        for t in 0..horizon {
            states[t + 1] = mdp.sample_next(states[t], actions[t], rng);
            actions[t + 1] = policy.sample_action(states[t + 1], rng);
        }
        let mut a_unified = 0.0;
        let mut a_gae = 0.0;
        let mut coef = 1.0;
        for l in 0..horizon {
            let r = mdp.reward_at(states[l], actions[l]);
            let own = if l == 0 {
                b_table[s0]
            } else {
                psi(states[l], actions[l])
            };
            a_unified += coef * (r + gamma * psi(states[l + 1], actions[l + 1]) - own);
            a_gae += coef * (r + gamma * exact.v[states[l + 1]] - exact.v[states[l]]);
            coef *= gl;
        }
        let u_sq = policy.score_sq_norm(s0, a0);
        let d = u_sq * (a_unified * a_unified - a_gae * a_gae);
        sum_d += d;
        sum_d_sq += d * d;
    }
    let mean_d = sum_d / samples as f64;
    let var_d = (sum_d_sq / samples as f64 - mean_d * mean_d).max(0.0);
    let standard_error = (var_d / samples as f64).sqrt();

    let norm_sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let lhs = mean_d - (norm_sq(&m_unified) - norm_sq(&m_gae));
    let z = if standard_error > 0.0 {
        (lhs - rhs) / standard_error
    } else if (lhs - rhs).abs() < 1e-10 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(Theorem1Check {
        lhs,
        standard_error,
        rhs,
        rhs_irreducible,
        rhs_reducible,
        z,
    })
}

/// Where trajectory suffixes come from. Only tabular MDPs can replay from
/// an arbitrary `(s, a)`.
#[derive(Debug, Clone, Copy)]
pub enum RolloutSource<'a> {
    Tabular(&'a TabularMdp),
    /// A continuous environment, named for the error message.
    Continuous(&'a str),
}

/// Law-of-total-variance diagnostic: for sampled `(s, a)` pairs two
/// conditionally independent suffixes are drawn and combined into the
/// single-sample trajectory-variance estimator
/// `|u|^2 (A(tau)^2 - A(tau) A(tau'))`; the across-pair variance of
/// `u * mean(A)` estimates the state-action term. Returns
/// `(sigma_trajectory, sigma_state_action)`.
#[allow(clippy::too_many_arguments)]
pub fn variance_decomposition<R: Rng + ?Sized>(
    source: RolloutSource<'_>,
    policy: &TabularSoftmaxPolicy,
    exact: &ExactValues,
    psi_table: &[f64],
    b_table: &[f64],
    lambda: f64,
    horizon: usize,
    pairs: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let mdp = match source {
        RolloutSource::Tabular(mdp) => mdp,
        RolloutSource::Continuous(name) => {
            return Err(Error::Unsupported(format!(
                "environment '{name}' cannot replay suffixes from an arbitrary (s, a)"
            )));
        }
    };
    if psi_table.len() != mdp.n_states * mdp.n_actions || b_table.len() != mdp.n_states {
        return Err(Error::Dimension("table size mismatch".into()));
    }
    if pairs == 0 {
        return Err(Error::Argument("need at least one pair".into()));
    }
    let gamma = mdp.gamma;
    let gl = gamma * lambda;
    let weights = exact.joint_weights(policy);
    let dim = mdp.n_states * mdp.n_actions;

    let advantage = |s0: usize, a0: usize, rng: &mut R| -> f64 {
        let (mut s, mut a) = (s0, a0);
        let mut acc = 0.0;
        let mut coef = 1.0;
        for l in 0..horizon {
            let r = mdp.reward_at(s, a);
            let sp = mdp.sample_next(s, a, rng);
            let ap = policy.sample_action(sp, rng);
            let own = if l == 0 {
                b_table[s0]
            } else {
                psi_table[s * mdp.n_actions + a]
            };
            acc += coef * (r + gamma * psi_table[sp * mdp.n_actions + ap] - own);
            coef *= gl;
            s = sp;
            a = ap;
        }
        acc
    };

    let mut sigma_tau = 0.0;
    let mut pair_means: Vec<Vec<f64>> = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let idx = sample_joint(&weights, rng);
        let (s0, a0) = (idx / mdp.n_actions, idx % mdp.n_actions);
        let a_first = advantage(s0, a0, rng);
        let a_second = advantage(s0, a0, rng);
        let u_sq = policy.score_sq_norm(s0, a0);
        sigma_tau += u_sq * (a_first * a_first - a_first * a_second) / pairs as f64;
        let u = policy.score(s0, a0);
        let mean_a = 0.5 * (a_first + a_second);
        pair_means.push(u.iter().map(|ui| ui * mean_a).collect());
    }
    let mut grand_mean = vec![0.0; dim];
    for m in &pair_means {
        for (g, x) in grand_mean.iter_mut().zip(m) {
            *g += x / pairs as f64;
        }
    }
    let sigma_sa = pair_means
        .iter()
        .map(|m| {
            m.iter()
                .zip(&grand_mean)
                .map(|(x, g)| (x - g) * (x - g))
                .sum::<f64>()
        })
        .sum::<f64>()
        / pairs as f64;
    Ok((sigma_tau, sigma_sa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{optimal_baseline, solve_q};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_b_table(mdp: &TabularMdp, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..mdp.n_states).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn proposition1_deterministic_mdp_is_exact() {
        // Deterministic single-state chain with a deterministic-enough
        // policy realized by one action.
        let mdp = TabularMdp::new(1, 1, vec![1.0], vec![0.3], 0.5, vec![1.0]).unwrap();
        let policy = TabularSoftmaxPolicy::uniform(1, 1);
        let exact = solve_q(&mdp, &policy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let reports = verify_proposition1(
            &mdp,
            &policy,
            &exact,
            &[0.1],
            Bootstrap::Q,
            &[1, 2, 3],
            200,
            4.0,
            &mut rng,
        )
        .unwrap();
        for r in &reports {
            assert!(r.pass, "{r}");
            assert_eq!(r.statistic, 0.0);
        }
    }

    #[test]
    fn proposition1_gae_consistency_with_value_bootstrap() {
        // b = V and psi = V: the mean must equal the true advantage Q - V.
        let mdp = TabularMdp::random(3, 2, 0.8, 7);
        let policy = TabularSoftmaxPolicy::random(3, 2, 8);
        let exact = solve_q(&mdp, &policy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let reports = verify_proposition1(
            &mdp,
            &policy,
            &exact,
            &exact.v.clone(),
            Bootstrap::V,
            &[1, 2, 3],
            30_000,
            4.0,
            &mut rng,
        )
        .unwrap();
        for r in &reports {
            assert!(r.pass, "{r}");
        }
    }

    #[test]
    fn proposition1_random_mdp_all_z_below_gate() {
        let mdp = TabularMdp::random(4, 2, 0.75, 17);
        let policy = TabularSoftmaxPolicy::random(4, 2, 18);
        let exact = solve_q(&mdp, &policy).unwrap();
        let b = random_b_table(&mdp, 19);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let reports = verify_proposition1(
            &mdp, &policy, &exact, &b, Bootstrap::Q, &[1, 2, 3], 30_000, 4.0, &mut rng,
        )
        .unwrap();
        assert_eq!(reports.len(), 4 * 2 * 3);
        for r in &reports {
            assert!(r.pass, "{r}");
        }
    }

    #[test]
    fn theorem1_self_comparison_is_zero() {
        // b = V and psi = V reduces the unified estimator to its value
        // special case: both sides must vanish.
        let mdp = TabularMdp::random(3, 2, 0.8, 27);
        let policy = TabularSoftmaxPolicy::random(3, 2, 28);
        let exact = solve_q(&mdp, &policy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let check = verify_theorem1(
            &mdp,
            &policy,
            &exact,
            &exact.v.clone(),
            Bootstrap::V,
            0.9,
            5_000,
            &mut rng,
        )
        .unwrap();
        assert!(check.rhs.abs() < 1e-12);
        assert!(check.lhs.abs() < 1e-12, "lhs {}", check.lhs);
        assert_eq!(check.rhs_irreducible, 0.0);
    }

    #[test]
    fn theorem1_reducible_term_with_value_bootstrap() {
        let mdp = TabularMdp::random(3, 2, 0.8, 37);
        let policy = TabularSoftmaxPolicy::random(3, 2, 38);
        let exact = solve_q(&mdp, &policy).unwrap();
        let b = random_b_table(&mdp, 39);
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let check = verify_theorem1(
            &mdp, &policy, &exact, &b, Bootstrap::V, 0.9, 150_000, &mut rng,
        )
        .unwrap();
        assert_eq!(check.rhs_irreducible, 0.0);
        assert!(check.passes(3.0), "z = {} (lhs {} rhs {})", check.z, check.lhs, check.rhs);
    }

    #[test]
    fn theorem1_irreducible_series_with_q_bootstrap() {
        let mdp = TabularMdp::random(3, 2, 0.8, 47);
        let policy = TabularSoftmaxPolicy::random(3, 2, 48);
        let exact = solve_q(&mdp, &policy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        let check = verify_theorem1(
            &mdp,
            &policy,
            &exact,
            &exact.v.clone(),
            Bootstrap::Q,
            0.9,
            150_000,
            &mut rng,
        )
        .unwrap();
        assert!(check.rhs_irreducible > 0.0);
        assert!(check.passes(3.0), "z = {} (lhs {} rhs {})", check.z, check.lhs, check.rhs);
    }

    #[test]
    fn corollary_sign_with_optimal_baseline() {
        // psi = V with the variance-optimal baseline: the gap must be
        // non-positive (within Monte-Carlo error), and the exact reducible
        // term is non-positive outright.
        let mdp = TabularMdp::random(3, 2, 0.8, 57);
        let policy = TabularSoftmaxPolicy::random(3, 2, 58);
        let exact = solve_q(&mdp, &policy).unwrap();
        let b: Vec<f64> = (0..3)
            .map(|s| optimal_baseline(&mdp, &policy, &exact, s).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let check =
            verify_theorem1(&mdp, &policy, &exact, &b, Bootstrap::V, 0.9, 60_000, &mut rng)
                .unwrap();
        assert!(check.rhs <= 1e-12, "exact reducible term {}", check.rhs);
        assert!(check.lhs <= 3.0 * check.standard_error);
    }

    #[test]
    fn variance_decomposition_deterministic_mdp_is_zero() {
        // Deterministic transitions and a single action: both suffixes
        // coincide, so the trajectory term is exactly zero.
        let mdp = TabularMdp::new(
            2,
            1,
            vec![0.0, 1.0, 1.0, 0.0],
            vec![0.5, -0.5],
            0.9,
            vec![1.0, 0.0],
        )
        .unwrap();
        let policy = TabularSoftmaxPolicy::uniform(2, 1);
        let exact = solve_q(&mdp, &policy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let (sigma_tau, _) = variance_decomposition(
            RolloutSource::Tabular(&mdp),
            &policy,
            &exact,
            &exact.q.clone(),
            &exact.v.clone(),
            0.95,
            40,
            2_000,
            &mut rng,
        )
        .unwrap();
        assert_eq!(sigma_tau, 0.0);
    }

    #[test]
    fn variance_decomposition_lambda_ordering_on_noisy_chain() {
        // Smaller lambda shrinks the temporal spread of the estimator, so
        // the trajectory term shrinks too.
        let mdp = TabularMdp::random(3, 2, 0.9, 77);
        let policy = TabularSoftmaxPolicy::random(3, 2, 78);
        let exact = solve_q(&mdp, &policy).unwrap();
        let b = random_b_table(&mdp, 79);
        let run = |lambda: f64| {
            let mut rng = ChaCha8Rng::seed_from_u64(80);
            variance_decomposition(
                RolloutSource::Tabular(&mdp),
                &policy,
                &exact,
                &exact.q.clone(),
                &b,
                lambda,
                60,
                30_000,
                &mut rng,
            )
            .unwrap()
            .0
        };
        let low = run(1e-12);
        let high = run(1.0);
        assert!(
            low <= high,
            "sigma_tau(lambda~0) = {low} > sigma_tau(lambda=1) = {high}"
        );
    }

    #[test]
    fn variance_decomposition_matches_exhaustive_enumeration() {
        // Two-step horizon on a tiny MDP: enumerate all trajectories to
        // get the exact conditional variance.
        let mdp = TabularMdp::random(2, 2, 0.8, 87);
        let policy = TabularSoftmaxPolicy::random(2, 2, 88);
        let exact = solve_q(&mdp, &policy).unwrap();
        let b = random_b_table(&mdp, 89);
        let lambda = 0.9;
        let horizon = 2;
        let gl = mdp.gamma * lambda;

        // Exact Sigma_tau = E_{s,a ~ d}[ |u|^2 Var_tau(A | s, a) ].
        let weights = exact.joint_weights(&policy);
        let pi = policy.prob_table();
        let mut exact_sigma = 0.0;
        for s0 in 0..2 {
            for a0 in 0..2 {
                let w0 = weights[s0 * 2 + a0];
                let mut mean = 0.0;
                let mut second = 0.0;
                for s1 in 0..2 {
                    for a1 in 0..2 {
                        for s2 in 0..2 {
                            for a2 in 0..2 {
                                let p = mdp.transition_row(s0, a0)[s1]
                                    * pi[s1 * 2 + a1]
                                    * mdp.transition_row(s1, a1)[s2]
                                    * pi[s2 * 2 + a2];
                                // A = delta_0 + gl * td_1 over two steps.
                                let q = |s: usize, a: usize| exact.q_at(&mdp, s, a);
                                let delta0 =
                                    mdp.reward_at(s0, a0) + mdp.gamma * q(s1, a1) - b[s0];
                                let td1 = mdp.reward_at(s1, a1) + mdp.gamma * q(s2, a2)
                                    - q(s1, a1);
                                let adv = delta0 + gl * td1;
                                mean += p * adv;
                                second += p * adv * adv;
                            }
                        }
                    }
                }
                exact_sigma += w0 * policy.score_sq_norm(s0, a0) * (second - mean * mean);
            }
        }

        // Monte-Carlo estimate with per-pair variance for the error bar.
        let pairs = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let mut samples = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            let idx = {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = 3;
                for (i, &w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                pick
            };
            let (s0, a0) = (idx / 2, idx % 2);
            let mut draw = |rng: &mut ChaCha8Rng| -> f64 {
                let (mut s, mut a) = (s0, a0);
                let mut acc = 0.0;
                let mut coef = 1.0;
                for l in 0..horizon {
                    let r = mdp.reward_at(s, a);
                    let sp = mdp.sample_next(s, a, rng);
                    let ap = policy.sample_action(sp, rng);
                    let own = if l == 0 { b[s0] } else { exact.q_at(&mdp, s, a) };
                    acc += coef * (r + mdp.gamma * exact.q_at(&mdp, sp, ap) - own);
                    coef *= gl;
                    s = sp;
                    a = ap;
                }
                acc
            };
            let a_first = draw(&mut rng);
            let a_second = draw(&mut rng);
            samples.push(policy.score_sq_norm(s0, a0) * (a_first * a_first - a_first * a_second));
        }
        let mean: f64 = samples.iter().sum::<f64>() / pairs as f64;
        let var: f64 =
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / pairs as f64;
        let se = (var / pairs as f64).sqrt();
        assert!(
            (mean - exact_sigma).abs() < 3.0 * se,
            "MC {mean} vs enumeration {exact_sigma} (se {se})"
        );
    }

    #[test]
    fn continuous_sources_are_unsupported() {
        let policy = TabularSoftmaxPolicy::uniform(1, 1);
        let exact = ExactValues {
            q: vec![0.0],
            v: vec![0.0],
            visitation: vec![1.0],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = variance_decomposition(
            RolloutSource::Continuous("pointmass"),
            &policy,
            &exact,
            &[0.0],
            &[0.0],
            0.9,
            10,
            10,
            &mut rng,
        );
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }
}
