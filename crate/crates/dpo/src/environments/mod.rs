//! Toy continuous-control tasks with deterministic or lightly noisy
//! dynamics, plus finite MDPs for the oracle suite.
//!
//! None of the continuous tasks has a true terminal state; episodes end by
//! hitting the horizon, which is reported as *truncation* so estimators can
//! bootstrap through it. Terminal and truncated flags are kept distinct
//! throughout the crate.

mod lqr;
mod pendulum;
mod pointmass;
mod tabular;

pub use lqr::{riccati_optimal_return, Lqr1d};
pub use pendulum::Pendulum1d;
pub use pointmass::PointMass2d;
pub use tabular::{mdp_sample_episode, TabularMdp};

use rand::RngCore;

use crate::distributions::ActionBounds;
use crate::error::{Error, Result};

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// The episode reached a true terminal state.
    pub terminal: bool,
    /// The episode was cut by the horizon limit; bootstrap through this.
    pub truncated: bool,
}

impl StepOutcome {
    pub fn episode_over(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// A continuous-control task. `step` with identical internal state, action,
/// and RNG state reproduces identical outcomes.
pub trait ContinuousEnv {
    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn bounds(&self) -> &ActionBounds;
    fn horizon(&self) -> usize;
    /// Per-step reward magnitude bound `R_max`.
    fn reward_bound(&self) -> f64;
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;
    fn step(&mut self, action: &[f64], rng: &mut dyn RngCore) -> Result<StepOutcome>;
}

/// Builds an environment by its CLI name.
pub fn make_env(name: &str) -> Result<Box<dyn ContinuousEnv>> {
    match name {
        "pointmass" => Ok(Box::new(PointMass2d::new())),
        "pendulum" => Ok(Box::new(Pendulum1d::new())),
        "lqr1d" => Ok(Box::new(Lqr1d::new())),
        other => Err(Error::Argument(format!(
            "unknown env '{other}' (expected pointmass|pendulum|lqr1d)"
        ))),
    }
}

pub(crate) fn check_action(bounds: &ActionBounds, action: &[f64]) -> Result<()> {
    if action.len() != bounds.dim() {
        return Err(Error::Dimension(format!(
            "action length {} != action dim {}",
            action.len(),
            bounds.dim()
        )));
    }
    if !bounds.contains(action, 1e-9) {
        return Err(Error::Argument(format!("action {action:?} out of bounds")));
    }
    Ok(())
}
