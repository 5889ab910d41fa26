//! Torque-limited pendulum swing-up with the angle measured from upright.

use rand::{Rng, RngCore};

use crate::distributions::ActionBounds;
use crate::error::Result;

use super::{check_action, ContinuousEnv, StepOutcome};

const DT: f64 = 0.05;
const GRAVITY: f64 = 10.0;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;
const OMEGA_LIMIT: f64 = 8.0;
const HORIZON: usize = 200;
const PI: f64 = std::f64::consts::PI;

/// Observation `(cos th, sin th, omega)`, torque in `[-2, 2]`, reward
/// `-(th^2 + 0.1 omega^2 + 0.001 a^2)`. Upright (`th = 0`, `omega = 0`)
/// under zero torque is the reward maximum and an unstable equilibrium.
#[derive(Debug, Clone)]
pub struct Pendulum1d {
    theta: f64,
    omega: f64,
    steps: usize,
    bounds: ActionBounds,
}

impl Pendulum1d {
    pub fn new() -> Self {
        Self {
            theta: 0.0,
            omega: 0.0,
            steps: 0,
            bounds: ActionBounds::symmetric(2.0, 1).expect("static bounds"),
        }
    }

    fn observation(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.omega]
    }
}

impl Default for Pendulum1d {
    fn default() -> Self {
        Self::new()
    }
}

fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = (theta + PI) % two_pi;
    if t < 0.0 {
        t += two_pi;
    }
    t - PI
}

impl ContinuousEnv for Pendulum1d {
    fn observation_dim(&self) -> usize {
        3
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
        PI * PI + 0.1 * OMEGA_LIMIT * OMEGA_LIMIT + 0.001 * 4.0 + 0.1
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.theta = rng.random_range(-PI..PI);
        self.omega = rng.random_range(-1.0..1.0);
        self.steps = 0;
        self.observation()
    }

    fn step(&mut self, action: &[f64], _rng: &mut dyn RngCore) -> Result<StepOutcome> {
        check_action(&self.bounds, action)?;
        let torque = action[0];
        let accel = 3.0 * GRAVITY / (2.0 * LENGTH) * self.theta.sin()
            + 3.0 / (MASS * LENGTH * LENGTH) * torque;
        self.omega = (self.omega + DT * accel).clamp(-OMEGA_LIMIT, OMEGA_LIMIT);
        self.theta = normalize_angle(self.theta + DT * self.omega);
        let reward = -(self.theta * self.theta
            + 0.1 * self.omega * self.omega
            + 0.001 * torque * torque);
        self.steps += 1;
        Ok(StepOutcome {
            observation: self.observation(),
            reward,
            terminal: false,
            truncated: self.steps >= HORIZON,
        })
    }
}
