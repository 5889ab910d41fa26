//! The residual baseline: a network `r(s, a)` whose multiplier `1 + r`
//! reweights critic values under the policy,
//! `b(s) = (1/m) sum_i (1 + r(s, a_i)) * mean(Z(s, a_i))`, `a_i ~ pi(.|s)`,
//! trained fully off-policy by the magnitude-free objective
//! `E[(mean(Z(s, a)) - b(s))^2]` over replayed state-action pairs.
//!
//! The critic is a constant input here: gradients flow through the
//! residual network only.

use rand::Rng;

use crate::critic::GaussianCritic;
use crate::error::{Error, Result};
use crate::funcapprox::{forward_with, init_params, Activation, MlpSpec, ParamVector, Scratch};
use crate::policy::BetaPolicy;

/// Baseline training knobs.
#[derive(Debug, Clone)]
pub struct BaselineConfig {
    /// Actions sampled per state to approximate the outer expectation.
    pub action_samples: usize,
    pub updates_per_iteration: usize,
    pub minibatch: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            action_samples: 30,
            updates_per_iteration: 12,
            minibatch: 256,
        }
    }
}

/// Residual network with a linear (symmetric-range) output head.
#[derive(Debug, Clone)]
pub struct ResidualBaseline {
    pub spec: MlpSpec,
    pub params: ParamVector,
    pub state_dim: usize,
    pub action_dim: usize,
}

impl ResidualBaseline {
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        let spec = MlpSpec::new(
            state_dim + action_dim,
            hidden.to_vec(),
            1,
            Activation::Tanh,
            Activation::Identity,
        )?;
        let params = init_params(&spec, rng);
        Ok(Self {
            spec,
            params,
            state_dim,
            action_dim,
        })
    }

    /// All-zero weights: `r(s, a) = 0` everywhere.
    pub fn zeroed(state_dim: usize, action_dim: usize, hidden: &[usize]) -> Result<Self> {
        let spec = MlpSpec::new(
            state_dim + action_dim,
            hidden.to_vec(),
            1,
            Activation::Tanh,
            Activation::Identity,
        )?;
        Ok(Self {
            spec: spec.clone(),
            params: ParamVector::zeros(spec.param_count()),
            state_dim,
            action_dim,
        })
    }

    fn check_input(&self, state: &[f64], action: &[f64]) -> Result<()> {
        if state.len() != self.state_dim || action.len() != self.action_dim {
            return Err(Error::Dimension(format!(
                "residual input dims ({}, {}) != ({}, {})",
                state.len(),
                action.len(),
                self.state_dim,
                self.action_dim
            )));
        }
        Ok(())
    }

    /// The raw residual `r(s, a)`; downstream code uses `1 + r` as the
    /// multiplier.
    pub fn residual(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        let mut scratch = Scratch::new();
        let mut input = Vec::new();
        self.residual_buffered(state, action, &mut scratch, &mut input)
    }

    pub(crate) fn residual_buffered(
        &self,
        state: &[f64],
        action: &[f64],
        scratch: &mut Scratch,
        input: &mut Vec<f64>,
    ) -> Result<f64> {
        self.check_input(state, action)?;
        input.clear();
        input.extend_from_slice(state);
        input.extend_from_slice(action);
        forward_with(&self.spec, &self.params.values, input, scratch)?;
        Ok(scratch.output()[0])
    }

    fn accumulate(
        &mut self,
        state: &[f64],
        action: &[f64],
        weight: f64,
        scratch: &mut Scratch,
        input: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_input(state, action)?;
        input.clear();
        input.extend_from_slice(state);
        input.extend_from_slice(action);
        let ParamVector { values, grads } = &mut self.params;
        crate::funcapprox::backward_params(&self.spec, values, grads, input, &[weight], scratch)?;
        Ok(())
    }
}

/// Evaluates `b(s) = (1/m) sum_i (1 + r(s, a_i)) * mean(Z(s, a_i))` with
/// `a_i` freshly sampled from the policy.
pub fn baseline_value<R: Rng + ?Sized>(
    baseline: &ResidualBaseline,
    critic: &GaussianCritic,
    policy: &BetaPolicy,
    state: &[f64],
    m: usize,
    rng: &mut R,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::Argument("need at least one action sample".into()));
    }
    let mut scratch = Scratch::new();
    let mut input = Vec::new();
    let mut x = Vec::new();
    let mut action = Vec::new();
    let shapes = policy.shape_params_with(state, &mut scratch)?;
    let mut total = 0.0;
    for _ in 0..m {
        crate::distributions::sample_beta_into(&shapes, rng, &mut x);
        crate::distributions::transform_action_into(&x, &policy.bounds, &mut action);
        let q = critic
            .forward_buffered(state, &action, &mut scratch, &mut input)?
            .mean;
        let r = baseline.residual_buffered(state, &action, &mut scratch, &mut input)?;
        total += (1.0 + r) * q;
    }
    Ok(total / m as f64)
}

/// One stored state-action pair from the replay buffer (observations
/// already normalized).
#[derive(Debug, Clone)]
pub struct BaselineItem {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
}

/// Magnitude-free baseline loss over a replay minibatch,
/// `mean (mean(Z(s, a)) - b(s))^2`, with its gradient accumulated into the
/// residual parameters. Policy actions for `b` are re-sampled fresh here;
/// the stored buffer action only enters through the critic value being
/// matched.
pub fn baseline_loss_and_grad<R: Rng + ?Sized>(
    baseline: &mut ResidualBaseline,
    critic: &GaussianCritic,
    policy: &BetaPolicy,
    minibatch: &[BaselineItem],
    m: usize,
    rng: &mut R,
) -> Result<f64> {
    if minibatch.is_empty() {
        return Err(Error::Argument("empty baseline minibatch".into()));
    }
    if m == 0 {
        return Err(Error::Argument("need at least one action sample".into()));
    }
    let n = minibatch.len();
    let inv_n = 1.0 / n as f64;
    let inv_m = 1.0 / m as f64;
    let mut scratch = Scratch::new();
    let mut input = Vec::new();
    let mut sampled: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m);
    let mut total = 0.0;
    for item in minibatch {
        let q_buffer = critic
            .forward_buffered(&item.state, &item.action, &mut scratch, &mut input)?
            .mean;
        let shapes = policy.shape_params_with(&item.state, &mut scratch)?;
        sampled.clear();
        let mut b = 0.0;
        let mut x = Vec::new();
        for _ in 0..m {
            crate::distributions::sample_beta_into(&shapes, rng, &mut x);
            let (action, _) = crate::distributions::transform_action(&x, &policy.bounds)?;
            let q = critic
                .forward_buffered(&item.state, &action, &mut scratch, &mut input)?
                .mean;
            let r = baseline.residual_buffered(&item.state, &action, &mut scratch, &mut input)?;
            b += (1.0 + r) * q * inv_m;
            sampled.push((action, q));
        }
        let err = q_buffer - b;
        total += err * err;
        // d loss / d r(s, a_i) = -2 (q_buf - b) * q_i / m, averaged over
        // the minibatch.
        let coeff = -2.0 * err * inv_m * inv_n;
        for (action, q) in &sampled {
            baseline.accumulate(&item.state, action, coeff * q, &mut scratch, &mut input)?;
        }
    }
    Ok(total * inv_n)
}
