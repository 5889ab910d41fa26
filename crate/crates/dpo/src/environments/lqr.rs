//! Scalar linear-quadratic regulator with process noise. Its optimal
//! expected return under the evaluation protocol is computable in closed
//! form, which makes it a learning sanity check.

use rand::RngCore;
use rand_distr::Distribution;

use crate::distributions::ActionBounds;
use crate::error::Result;

use super::{check_action, ContinuousEnv, StepOutcome};

pub(crate) const DYN_A: f64 = 0.9;
pub(crate) const DYN_B: f64 = 0.5;
pub(crate) const COST_Q: f64 = 1.0;
pub(crate) const COST_R: f64 = 0.1;
pub(crate) const NOISE_STD: f64 = 0.1;
pub(crate) const HORIZON: usize = 100;
const STATE_LIMIT: f64 = 10.0;
const START_HALF_WIDTH: f64 = 1.0;

/// Dynamics `x' = 0.9 x + 0.5 a + w`, `w ~ N(0, 0.1^2)`, reward
/// `-(x^2 + 0.1 a^2)`, start `x0 ~ U[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Lqr1d {
    x: f64,
    steps: usize,
    bounds: ActionBounds,
}

impl Lqr1d {
    pub fn new() -> Self {
        Self {
            x: 0.0,
            steps: 0,
            bounds: ActionBounds::symmetric(2.0, 1).expect("static bounds"),
        }
    }
}

impl Default for Lqr1d {
    fn default() -> Self {
        Self::new()
    }
}

impl ContinuousEnv for Lqr1d {
    fn observation_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    fn horizon(&self) -> usize {
        HORIZON
    }

    fn reward_bound(&self) -> f64 {
        COST_Q * STATE_LIMIT * STATE_LIMIT + COST_R * 4.0 + 0.1
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.x = rand::Rng::random_range(&mut *rng, -START_HALF_WIDTH..START_HALF_WIDTH);
        self.steps = 0;
        vec![self.x]
    }

    fn step(&mut self, action: &[f64], rng: &mut dyn RngCore) -> Result<StepOutcome> {
        check_action(&self.bounds, action)?;
        let a = action[0];
        let reward = -(COST_Q * self.x * self.x + COST_R * a * a);
        let noise: f64 = rand_distr::Normal::new(0.0, NOISE_STD)
            .expect("static noise params")
            .sample(rng);
        self.x = (DYN_A * self.x + DYN_B * a + noise).clamp(-STATE_LIMIT, STATE_LIMIT);
        self.steps += 1;
        Ok(StepOutcome {
            observation: vec![self.x],
            reward,
            terminal: false,
            truncated: self.steps >= HORIZON,
        })
    }
}

/// Expected episodic return of the finite-horizon optimal controller,
/// computed by the backward Riccati recursion:
///
/// ```text
/// P_t = q + a^2 P_{t+1} - (a b P_{t+1})^2 / (r + b^2 P_{t+1}),  P_H = 0
/// J*  = E[x0^2] P_0 + sigma^2 * sum_{t=1}^{H-1} P_t
/// ```
///
/// The return is `-J*`. This ignores the action clamp, which the optimal
/// policy only rarely hits from the start region, so the value is a tight
/// optimistic bound on any achievable return.
pub fn riccati_optimal_return(horizon: usize) -> f64 {
    let mut p_next = 0.0;
    let mut noise_sum = 0.0;
    for t in (0..horizon).rev() {
        let p = COST_Q + DYN_A * DYN_A * p_next
            - (DYN_A * DYN_B * p_next).powi(2) / (COST_R + DYN_B * DYN_B * p_next);
        if t >= 1 {
            // Noise injected at step t-1 is charged P_t over the remainder.
            noise_sum += p;
        }
        p_next = p;
    }
    let initial_second_moment = START_HALF_WIDTH * START_HALF_WIDTH / 3.0;
    -(initial_second_moment * p_next + NOISE_STD * NOISE_STD * noise_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn riccati_return_is_negative_and_stable_in_horizon() {
        let j100 = riccati_optimal_return(100);
        assert!(j100 < 0.0);
        // P converges quickly, so the per-step optimal cost stabilizes.
        let j200 = riccati_optimal_return(200);
        let per_step_100 = j100 / 100.0;
        let per_step_200 = j200 / 200.0;
        assert!((per_step_100 - per_step_200).abs() < 0.01);
    }

    #[test]
    fn linear_feedback_attains_the_riccati_return() {
        // Simulate u = -K_t x with gains from the same recursion; the mean
        // return over many episodes must match the closed form within
        // Monte-Carlo error. Gains are recomputed here independently.
        let horizon = HORIZON;
        let mut p_next = 0.0;
        let mut gains = vec![0.0; horizon];
        for t in (0..horizon).rev() {
            gains[t] = DYN_A * DYN_B * p_next / (COST_R + DYN_B * DYN_B * p_next);
            p_next = COST_Q + DYN_A * DYN_A * p_next
                - (DYN_A * DYN_B * p_next).powi(2) / (COST_R + DYN_B * DYN_B * p_next);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let episodes = 4000;
        let mut returns = Vec::with_capacity(episodes);
        for _ in 0..episodes {
            let mut env = Lqr1d::new();
            env.reset(&mut rng);
            let mut total = 0.0;
            for g in &gains {
                let u = (-g * env.x).clamp(-2.0, 2.0);
                let out = env.step(&[u], &mut rng).unwrap();
                total += out.reward;
            }
            returns.push(total);
        }
        let mean: f64 = returns.iter().sum::<f64>() / episodes as f64;
        let var: f64 =
            returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / episodes as f64;
        let se = (var / episodes as f64).sqrt();
        let expected = riccati_optimal_return(horizon);
        assert!(
            (mean - expected).abs() < 4.0 * se + 1e-3,
            "simulated {mean} vs riccati {expected} (se {se})"
        );
    }

    #[test]
    fn random_policy_scores_below_optimal() {
        let mut env = Lqr1d::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut total = 0.0;
        let episodes = 50;
        for _ in 0..episodes {
            env.reset(&mut rng);
            loop {
                let a = rand::Rng::random_range(&mut rng, -2.0..2.0);
                let out = env.step(&[a], &mut rng).unwrap();
                total += out.reward;
                if out.episode_over() {
                    break;
                }
            }
        }
        let mean_return = total / episodes as f64;
        assert!(mean_return < riccati_optimal_return(HORIZON));
    }
}
