//! Return and advantage estimators over rollout arrays: the unified
//! advantage estimator (UAE), GAE, Q-bootstrapped lambda-returns, n-step
//! advantages, and the advantage interpolation used before policy updates.
//!
//! UAE admits any state-dependent baseline `b` and bootstraps through a
//! state-action value `Q`; setting `Q := V` and `b := V` recovers GAE
//! exactly, and `uae == lambda_return_q - b` on every instance.

use crate::error::{Error, Result};

/// One rollout segment of length `T` prepared for advantage estimation.
///
/// `rewards` and `baselines` carry `T` entries; `critic_values` and
/// `terminal_flags` carry `T + 1` (the extra slot holds the bootstrap value
/// at the segment end). `terminal_flags[t]` marks that the episode ended
/// before step `t` — true terminals only, truncation bootstraps through.
#[derive(Debug, Clone)]
pub struct RolloutArrays {
    pub rewards: Vec<f64>,
    pub critic_values: Vec<f64>,
    pub baselines: Vec<f64>,
    pub terminal_flags: Vec<bool>,
    pub gamma: f64,
    pub lambda: f64,
}

impl RolloutArrays {
    /// Validates the length relationships and parameter ranges; returns `T`.
    pub fn validate(&self) -> Result<usize> {
        let t = self.rewards.len();
        if self.baselines.len() != t {
            return Err(Error::Dimension(format!(
                "baselines length {} != rewards length {t}",
                self.baselines.len()
            )));
        }
        if self.critic_values.len() != t + 1 {
            return Err(Error::Dimension(format!(
                "critic_values length {} != T + 1 = {}",
                self.critic_values.len(),
                t + 1
            )));
        }
        if self.terminal_flags.len() != t + 1 {
            return Err(Error::Dimension(format!(
                "terminal_flags length {} != T + 1 = {}",
                self.terminal_flags.len(),
                t + 1
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Argument(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Argument(format!(
                "lambda {} outside [0, 1]",
                self.lambda
            )));
        }
        Ok(t)
    }
}

/// Unified advantage estimator: backward recursion
///
/// ```text
/// delta = r_t + gamma * Q_{t+1} * (1 - d_{t+1}) - b_t
/// z     = Q_t - b_t
/// A_t   = delta + gamma * lambda * (1 - d_{t+1}) * carry
/// carry = (delta - z) + gamma * lambda * (1 - d_{t+1}) * carry
/// ```
pub fn uae(arrays: &RolloutArrays) -> Result<Vec<f64>> {
    let t_len = arrays.validate()?;
    let (r, q, b, d) = (
        &arrays.rewards,
        &arrays.critic_values,
        &arrays.baselines,
        &arrays.terminal_flags,
    );
    let (gamma, lambda) = (arrays.gamma, arrays.lambda);
    let mut advantages = vec![0.0; t_len];
    let mut carry = 0.0;
    for t in (0..t_len).rev() {
        let mask = if d[t + 1] { 0.0 } else { 1.0 };
        let delta = r[t] + gamma * q[t + 1] * mask - b[t];
        let z = q[t] - b[t];
        let discounted = gamma * lambda * mask * carry;
        advantages[t] = delta + discounted;
        carry = (delta - z) + discounted;
    }
    Ok(advantages)
}

/// Generalized advantage estimation on a state-value function:
/// `A_t = sum_l (gamma lambda)^l delta^V_{t+l}` with terminal masking.
/// `values` and `dones` carry `T + 1` entries.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> Result<Vec<f64>> {
    let t_len = rewards.len();
    if values.len() != t_len + 1 || dones.len() != t_len + 1 {
        return Err(Error::Dimension(
            "gae: values and dones must have T + 1 entries".into(),
        ));
    }
    let mut advantages = vec![0.0; t_len];
    let mut carry = 0.0;
    for t in (0..t_len).rev() {
        let mask = if dones[t + 1] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * values[t + 1] * mask - values[t];
        carry = delta + gamma * lambda * mask * carry;
        advantages[t] = carry;
    }
    Ok(advantages)
}

/// Forward-view lambda-return over Q-bootstrapped n-step returns, truncated
/// at `T` with a `Q_T` bootstrap. `q` and `dones` carry `T + 1` entries.
pub fn lambda_return_q(
    rewards: &[f64],
    q: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> Result<Vec<f64>> {
    let t_len = rewards.len();
    if q.len() != t_len + 1 || dones.len() != t_len + 1 {
        return Err(Error::Dimension(
            "lambda_return_q: q and dones must have T + 1 entries".into(),
        ));
    }
    let mut returns = vec![0.0; t_len];
    let mut next_return = q[t_len];
    for t in (0..t_len).rev() {
        let g = if dones[t + 1] {
            rewards[t]
        } else {
            rewards[t] + gamma * ((1.0 - lambda) * q[t + 1] + lambda * next_return)
        };
        returns[t] = g;
        next_return = g;
    }
    Ok(returns)
}

/// The n-step advantage `sum_{k<n} gamma^k r_{t+k} + gamma^n Q_{t+n} - b_t`,
/// with rewards and the bootstrap masked past a true terminal.
pub fn n_step_advantage(arrays: &RolloutArrays, n: usize, t: usize) -> Result<f64> {
    let t_len = arrays.validate()?;
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    if t + n > t_len {
        return Err(Error::Argument(format!(
            "t + n = {} exceeds T = {t_len}",
            t + n
        )));
    }
    let mut acc = -arrays.baselines[t];
    let mut discount = 1.0;
    for k in 0..n {
        acc += discount * arrays.rewards[t + k];
        discount *= arrays.gamma;
        if arrays.terminal_flags[t + k + 1] {
            return Ok(acc);
        }
    }
    Ok(acc + discount * arrays.critic_values[t + n])
}

/// Convex combination `(1 - nu) * a_uae + nu * (q - b)` used before the
/// policy improvement step.
pub fn interpolate_advantage(a_uae: f64, q_minus_b: f64, nu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::Argument(format!("nu {nu} outside [0, 1]")));
    }
    Ok((1.0 - nu) * a_uae + nu * q_minus_b)
}

/// Direct truncated evaluation of the UAE series,
/// `delta_t + sum_{l>=1} (gamma lambda)^l (delta_{t+l} - z_{t+l})`, stopping
/// at the first terminal. Independent of the backward recursion; used as a
/// test oracle and exposed for the verification suites.
pub fn uae_direct_sum(arrays: &RolloutArrays) -> Result<Vec<f64>> {
    let t_len = arrays.validate()?;
    let (r, q, b, d) = (
        &arrays.rewards,
        &arrays.critic_values,
        &arrays.baselines,
        &arrays.terminal_flags,
    );
    let (gamma, lambda) = (arrays.gamma, arrays.lambda);
    let delta = |t: usize| -> f64 {
        let mask = if d[t + 1] { 0.0 } else { 1.0 };
        r[t] + gamma * q[t + 1] * mask - b[t]
    };
    let mut advantages = vec![0.0; t_len];
    for t in 0..t_len {
        let mut acc = delta(t);
        let mut weight = 1.0;
        for l in (t + 1)..t_len {
            if d[l] {
                break;
            }
            weight *= gamma * lambda;
            let z = q[l] - b[l];
            acc += weight * (delta(l) - z);
        }
        advantages[t] = acc;
    }
    Ok(advantages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_arrays(rng: &mut ChaCha8Rng, t_len: usize, with_terminals: bool) -> RolloutArrays {
        let mut terminal_flags = vec![false; t_len + 1];
        if with_terminals {
            for flag in terminal_flags.iter_mut().skip(1) {
                *flag = rng.random_bool(0.15);
            }
        }
        RolloutArrays {
            rewards: (0..t_len).map(|_| rng.random_range(-1.0..1.0)).collect(),
            critic_values: (0..=t_len).map(|_| rng.random_range(-2.0..2.0)).collect(),
            baselines: (0..t_len).map(|_| rng.random_range(-2.0..2.0)).collect(),
            terminal_flags,
            gamma: rng.random_range(0.5..0.999),
            lambda: rng.random_range(0.0..=1.0),
        }
    }

    #[test]
    fn lambda_zero_collapses_to_one_step_delta() {
        let arrays = RolloutArrays {
            rewards: vec![1.0, 2.0],
            critic_values: vec![10.0, 20.0, 30.0],
            baselines: vec![5.0, 5.0],
            terminal_flags: vec![false; 3],
            gamma: 0.5,
            lambda: 0.0,
        };
        assert_eq!(uae(&arrays).unwrap(), vec![6.0, 12.0]);
    }

    #[test]
    fn terminal_masks_bootstrap_and_carry() {
        let arrays = RolloutArrays {
            rewards: vec![3.0, 99.0],
            critic_values: vec![123.0, 456.0, 789.0],
            baselines: vec![1.0, 0.0],
            terminal_flags: vec![false, true, false],
            gamma: 0.9,
            lambda: 0.7,
        };
        let a = uae(&arrays).unwrap();
        assert_eq!(a[0], 3.0 - 1.0);
    }

    #[test]
    fn uae_with_value_arrays_equals_gae_example() {
        let arrays = RolloutArrays {
            rewards: vec![1.0, 1.0],
            critic_values: vec![0.0, 0.0, 0.0],
            baselines: vec![0.0, 0.0],
            terminal_flags: vec![false; 3],
            gamma: 0.9,
            lambda: 1.0,
        };
        let a = uae(&arrays).unwrap();
        assert!((a[0] - 1.9).abs() < 1e-15);
        assert!((a[1] - 1.0).abs() < 1e-15);
        let g = gae(&arrays.rewards, &arrays.critic_values, &arrays.terminal_flags, 0.9, 1.0)
            .unwrap();
        assert_eq!(a, g);
    }

    #[test]
    fn uae_matches_direct_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let arrays = random_arrays(&mut rng, 6, true);
            let recursive = uae(&arrays).unwrap();
            let direct = uae_direct_sum(&arrays).unwrap();
            for (a, b) in recursive.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn gae_specializations() {
        // V = 0, lambda = 1 -> discounted reward-to-go.
        let rewards = vec![1.0, 2.0, 3.0];
        let values = vec![0.0; 4];
        let dones = vec![false; 4];
        let a = gae(&rewards, &values, &dones, 0.5, 1.0).unwrap();
        assert_eq!(a, vec![1.0 + 0.5 * 2.0 + 0.25 * 3.0, 2.0 + 0.5 * 3.0, 3.0]);
        // lambda = 0 -> one-step TD error.
        let values = vec![1.0, 2.0, 3.0, 4.0];
        let a = gae(&rewards, &values, &dones, 0.9, 0.0).unwrap();
        for (t, adv) in a.iter().enumerate() {
            let delta = rewards[t] + 0.9 * values[t + 1] - values[t];
            assert!((adv - delta).abs() < 1e-15);
        }
    }

    #[test]
    fn uae_specializes_to_gae_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let t_len = rng.random_range(1..=32);
            let mut arrays = random_arrays(&mut rng, t_len, true);
            // Tie Q and b to the same value function.
            arrays.baselines = arrays.critic_values[..t_len].to_vec();
            let a = uae(&arrays).unwrap();
            let g = gae(
                &arrays.rewards,
                &arrays.critic_values,
                &arrays.terminal_flags,
                arrays.gamma,
                arrays.lambda,
            )
            .unwrap();
            for (x, y) in a.iter().zip(&g) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lambda_return_endpoints() {
        let rewards = vec![1.0, 2.0];
        let q = vec![5.0, 7.0, 9.0];
        let dones = vec![false; 3];
        // lambda = 1: Monte-Carlo with tail bootstrap.
        let g = lambda_return_q(&rewards, &q, &dones, 0.5, 1.0).unwrap();
        assert_eq!(g[1], 2.0 + 0.5 * 9.0);
        assert_eq!(g[0], 1.0 + 0.5 * g[1]);
        // lambda = 0: one-step.
        let g = lambda_return_q(&rewards, &q, &dones, 0.5, 0.0).unwrap();
        assert_eq!(g, vec![1.0 + 0.5 * 7.0, 2.0 + 0.5 * 9.0]);
    }

    #[test]
    fn lambda_return_minus_baseline_equals_uae() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..500 {
            let t_len = rng.random_range(1..=24);
            let arrays = random_arrays(&mut rng, t_len, true);
            let a = uae(&arrays).unwrap();
            let g = lambda_return_q(
                &arrays.rewards,
                &arrays.critic_values,
                &arrays.terminal_flags,
                arrays.gamma,
                arrays.lambda,
            )
            .unwrap();
            for t in 0..t_len {
                assert!(
                    (g[t] - arrays.baselines[t] - a[t]).abs() < 1e-10,
                    "t={t}: {} vs {}",
                    g[t] - arrays.baselines[t],
                    a[t]
                );
            }
        }
    }

    #[test]
    fn n_step_advantage_cases() {
        let arrays = RolloutArrays {
            rewards: vec![1.0, 1.0],
            critic_values: vec![0.0, 2.0, 3.0],
            baselines: vec![0.0, 0.0],
            terminal_flags: vec![false; 3],
            gamma: 1.0 - 1e-12,
            lambda: 0.5,
        };
        // n = 2, gamma ~ 1: 1 + 1 + Q_2 = 5.
        let a = n_step_advantage(&arrays, 2, 0).unwrap();
        assert!((a - 5.0).abs() < 1e-9);
        // n = 1 is the one-step delta.
        let arrays = RolloutArrays {
            rewards: vec![0.7],
            critic_values: vec![1.0, 2.0],
            baselines: vec![0.3],
            terminal_flags: vec![false, false],
            gamma: 0.9,
            lambda: 0.5,
        };
        let a = n_step_advantage(&arrays, 1, 0).unwrap();
        assert!((a - (0.7 + 0.9 * 2.0 - 0.3)).abs() < 1e-15);
        // Out-of-range index errors.
        assert!(n_step_advantage(&arrays, 2, 0).is_err());
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        assert_eq!(interpolate_advantage(2.0, -1.0, 0.0).unwrap(), 2.0);
        assert_eq!(interpolate_advantage(2.0, -1.0, 1.0).unwrap(), -1.0);
        assert!((interpolate_advantage(2.0, -1.0, 0.3).unwrap() - 1.1).abs() < 1e-15);
        assert!(interpolate_advantage(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn garbage_after_terminal_never_changes_earlier_advantages() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let t_len = rng.random_range(3..=16);
            let mut arrays = random_arrays(&mut rng, t_len, false);
            let cut = rng.random_range(1..t_len);
            arrays.terminal_flags[cut] = true;
            let before = uae(&arrays).unwrap();
            // Scramble everything at and after the terminal.
            for t in cut..t_len {
                arrays.rewards[t] = rng.random_range(-100.0..100.0);
                arrays.baselines[t] = rng.random_range(-100.0..100.0);
            }
            for t in cut..=t_len {
                arrays.critic_values[t] = rng.random_range(-100.0..100.0);
            }
            let after = uae(&arrays).unwrap();
            for t in 0..cut {
                assert_eq!(before[t], after[t], "advantage {t} changed");
            }
        }
    }

    #[test]
    fn truncated_vs_terminal_final_flag() {
        // Identical trajectories differing only in the final flag yield
        // different advantages exactly when gamma * Q_T != 0.
        let base = RolloutArrays {
            rewards: vec![0.5, -0.25, 1.0],
            critic_values: vec![0.3, -0.2, 0.9, 2.0],
            baselines: vec![0.1, 0.0, -0.4],
            terminal_flags: vec![false, false, false, false],
            gamma: 0.9,
            lambda: 0.8,
        };
        let truncated = uae(&base).unwrap();
        let mut term = base.clone();
        term.terminal_flags[3] = true;
        let terminal = uae(&term).unwrap();
        assert!((truncated[2] - terminal[2] - 0.9 * 2.0).abs() < 1e-12);
        // With a zero bootstrap value the flags are indistinguishable.
        let mut zero_q = base;
        zero_q.critic_values[3] = 0.0;
        let trunc_zero = uae(&zero_q).unwrap();
        zero_q.terminal_flags[3] = true;
        let term_zero = uae(&zero_q).unwrap();
        assert_eq!(trunc_zero, term_zero);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let arrays = RolloutArrays {
            rewards: vec![1.0, 2.0],
            critic_values: vec![0.0, 0.0],
            baselines: vec![0.0, 0.0],
            terminal_flags: vec![false; 3],
            gamma: 0.9,
            lambda: 0.5,
        };
        assert!(matches!(uae(&arrays), Err(Error::Dimension(_))));
    }
}
