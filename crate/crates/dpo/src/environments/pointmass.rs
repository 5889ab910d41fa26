//! Planar point mass pushed toward the origin by bounded forces.

use rand::{Rng, RngCore};

use crate::distributions::ActionBounds;
use crate::error::Result;

use super::{check_action, ContinuousEnv, StepOutcome};

const DT: f64 = 0.1;
const POS_LIMIT: f64 = 3.0;
const VEL_LIMIT: f64 = 3.0;
const START_BOX: f64 = 1.5;
const HORIZON: usize = 150;

/// State `(pos, vel)` in the plane, action = force in `[-1, 1]^2`, reward
/// `-(|pos|^2 + 0.01 |a|^2)` with the goal at the origin.
#[derive(Debug, Clone)]
pub struct PointMass2d {
    pos: [f64; 2],
    vel: [f64; 2],
    steps: usize,
    bounds: ActionBounds,
}

impl PointMass2d {
    pub fn new() -> Self {
        Self {
            pos: [0.0; 2],
            vel: [0.0; 2],
            steps: 0,
            bounds: ActionBounds::symmetric(1.0, 2).expect("static bounds"),
        }
    }

    fn observation(&self) -> Vec<f64> {
        vec![self.pos[0], self.pos[1], self.vel[0], self.vel[1]]
    }
}

impl Default for PointMass2d {
    fn default() -> Self {
        Self::new()
    }
}

impl ContinuousEnv for PointMass2d {
    fn observation_dim(&self) -> usize {
        4
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    fn horizon(&self) -> usize {
        HORIZON
    }

    fn reward_bound(&self) -> f64 {
        // |pos|^2 <= 2 * 9, plus the control penalty on |a| <= sqrt(2).
        2.0 * POS_LIMIT * POS_LIMIT + 0.01 * 2.0 + 0.1
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.pos = [
            rng.random_range(-START_BOX..START_BOX),
            rng.random_range(-START_BOX..START_BOX),
        ];
        self.vel = [0.0; 2];
        self.steps = 0;
        self.observation()
    }

    fn step(&mut self, action: &[f64], _rng: &mut dyn RngCore) -> Result<StepOutcome> {
        check_action(&self.bounds, action)?;
        for i in 0..2 {
            self.vel[i] = (self.vel[i] + DT * action[i]).clamp(-VEL_LIMIT, VEL_LIMIT);
            self.pos[i] = (self.pos[i] + DT * self.vel[i]).clamp(-POS_LIMIT, POS_LIMIT);
        }
        let dist_sq = self.pos[0] * self.pos[0] + self.pos[1] * self.pos[1];
        let effort = action[0] * action[0] + action[1] * action[1];
        let reward = -(dist_sq + 0.01 * effort);
        self.steps += 1;
        Ok(StepOutcome {
            observation: self.observation(),
            reward,
            terminal: false,
            truncated: self.steps >= HORIZON,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_action_at_goal_is_an_equilibrium() {
        let mut env = PointMass2d::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        env.reset(&mut rng);
        env.pos = [0.0, 0.0];
        env.vel = [0.0, 0.0];
        let out = env.step(&[0.0, 0.0], &mut rng).unwrap();
        assert_eq!(out.reward, 0.0);
        assert_eq!(&out.observation, &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn truncates_at_horizon_without_terminal() {
        let mut env = PointMass2d::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        env.reset(&mut rng);
        for t in 0..HORIZON {
            let out = env.step(&[0.1, -0.1], &mut rng).unwrap();
            assert!(!out.terminal);
            assert_eq!(out.truncated, t + 1 == HORIZON);
        }
    }
}
