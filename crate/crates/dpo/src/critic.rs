//! Gaussian distributional critic with a target network.
//!
//! Two update paths coexist: an interaction-level KL step toward the
//! discounted target distribution `N(r + gamma * mean', max(gamma * std',
//! floor))` built from replayed transitions, and a batch-level empirical
//! cross-entropy toward sample target vectors `U = A + 1 * b` derived from
//! the unified advantage estimator. Both heads (mean and stddev) receive
//! gradients from both paths.

use rand::Rng;

use crate::distributions::{gaussian_kl, GaussianValue, SIGMA_FLOOR};
use crate::error::{Error, Result};
use crate::estimators::{uae, RolloutArrays};
use crate::funcapprox::{
    adam_step, forward_with, init_params, sigmoid, softplus, AdamState, Activation, MlpSpec,
    ParamVector, Scratch,
};
use crate::policy::BetaPolicy;

const LN_2PI: f64 = 1.8378770664093453;

/// State-action critic emitting a Gaussian value distribution. The network
/// has two raw outputs: the mean head is linear, the stddev head is
/// `softplus(.) + SIGMA_FLOOR`.
#[derive(Debug, Clone)]
pub struct GaussianCritic {
    pub spec: MlpSpec,
    pub params: ParamVector,
    pub state_dim: usize,
    pub action_dim: usize,
}

impl GaussianCritic {
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        let spec = MlpSpec::new(
            state_dim + action_dim,
            hidden.to_vec(),
            2,
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

    /// All-zero weights: mean 0 and stddev `softplus(0) + floor` everywhere.
    pub fn zeroed(state_dim: usize, action_dim: usize, hidden: &[usize]) -> Result<Self> {
        let spec = MlpSpec::new(
            state_dim + action_dim,
            hidden.to_vec(),
            2,
            Activation::Tanh,
            Activation::Identity,
        )?;
        let params = ParamVector::zeros(spec.param_count());
        Ok(Self {
            spec,
            params,
            state_dim,
            action_dim,
        })
    }

    fn check_input(&self, state: &[f64], action: &[f64]) -> Result<()> {
        if state.len() != self.state_dim || action.len() != self.action_dim {
            return Err(Error::Dimension(format!(
                "critic input dims ({}, {}) != ({}, {})",
                state.len(),
                action.len(),
                self.state_dim,
                self.action_dim
            )));
        }
        Ok(())
    }

    pub fn forward(&self, state: &[f64], action: &[f64]) -> Result<GaussianValue> {
        let mut scratch = Scratch::new();
        let mut input = Vec::with_capacity(self.state_dim + self.action_dim);
        self.forward_buffered(state, action, &mut scratch, &mut input)
    }

    pub(crate) fn forward_buffered(
        &self,
        state: &[f64],
        action: &[f64],
        scratch: &mut Scratch,
        input: &mut Vec<f64>,
    ) -> Result<GaussianValue> {
        self.check_input(state, action)?;
        cat_into(input, state, action);
        head_values(&self.spec, &self.params.values, input, scratch)
    }

    pub fn mean(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        Ok(self.forward(state, action)?.mean)
    }

    /// Accumulates head gradients `(d_mean, d_std)` through the softplus
    /// stddev head into the parameter gradients.
    pub fn backward_heads(
        &mut self,
        state: &[f64],
        action: &[f64],
        d_mean: f64,
        d_std: f64,
        scratch: &mut Scratch,
        input: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_input(state, action)?;
        cat_into(input, state, action);
        forward_with(&self.spec, &self.params.values, input, scratch)?;
        let raw_std = scratch.output()[1];
        let out_grad = [d_mean, d_std * sigmoid(raw_std)];
        let ParamVector { values, grads } = &mut self.params;
        crate::funcapprox::backward_params(&self.spec, values, grads, input, &out_grad, scratch)?;
        Ok(())
    }

    /// `l` i.i.d. draws from the value distribution at `(state, action)`.
    pub fn sample_value_vector<R: Rng + ?Sized>(
        &self,
        state: &[f64],
        action: &[f64],
        l: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if l == 0 {
            return Err(Error::Argument("need at least one critic sample".into()));
        }
        let dist = self.forward(state, action)?;
        Ok((0..l).map(|_| dist.sample(rng)).collect())
    }
}

fn cat_into(buf: &mut Vec<f64>, state: &[f64], action: &[f64]) {
    buf.clear();
    buf.extend_from_slice(state);
    buf.extend_from_slice(action);
}

/// Forward through arbitrary parameter values (used for the target network)
/// with the mean/stddev head convention applied.
fn head_values(
    spec: &MlpSpec,
    values: &[f64],
    input: &[f64],
    scratch: &mut Scratch,
) -> Result<GaussianValue> {
    forward_with(spec, values, input, scratch)?;
    let out = scratch.output();
    Ok(GaussianValue {
        mean: out[0],
        stddev: softplus(out[1]) + SIGMA_FLOOR,
    })
}

/// Online critic plus its slowly tracked target copy.
#[derive(Debug, Clone)]
pub struct CriticPair {
    pub online: GaussianCritic,
    pub target: ParamVector,
    pub tau: f64,
}

impl CriticPair {
    pub fn new(online: GaussianCritic, tau: f64) -> Result<Self> {
        if !(0.0 < tau && tau <= 1.0) {
            return Err(Error::Argument(format!("tau {tau} outside (0, 1]")));
        }
        let target = online.params.clone();
        Ok(Self { online, target, tau })
    }

    pub fn target_forward(&self, state: &[f64], action: &[f64]) -> Result<GaussianValue> {
        self.online.check_input(state, action)?;
        let mut scratch = Scratch::new();
        let mut input = Vec::new();
        cat_into(&mut input, state, action);
        head_values(&self.online.spec, &self.target.values, &input, &mut scratch)
    }
}

/// `target <- tau * online + (1 - tau) * target`, elementwise.
pub fn polyak_update(pair: &mut CriticPair) {
    let tau = pair.tau;
    for (t, &w) in pair.target.values.iter_mut().zip(&pair.online.params.values) {
        *t = tau * w + (1.0 - tau) * *t;
    }
}

/// One replayed transition prepared for the critic (observations already
/// normalized, reward already scaled).
#[derive(Debug, Clone)]
pub struct TransitionItem {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Interaction-level critic update: for each transition the target is
/// `N(r + gamma * mean(Z'(s', a')), max(gamma * std(Z'(s', a')), floor))`
/// with `a'` freshly sampled from the policy (terminals use `N(r, floor)`),
/// and one adaptive-moment step is taken on the mean KL toward the online
/// distribution. The target network is untouched here.
pub fn kl_td_update<R: Rng + ?Sized>(
    pair: &mut CriticPair,
    adam: &mut AdamState,
    batch: &[TransitionItem],
    policy: &BetaPolicy,
    gamma: f64,
    rng: &mut R,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Argument("empty critic minibatch".into()));
    }
    let n = batch.len();
    let inv_n = 1.0 / n as f64;
    let mut scratch = Scratch::new();
    let mut input = Vec::new();
    let mut next_action = Vec::new();
    let mut total = 0.0;
    for item in batch {
        let target = if item.terminal {
            GaussianValue {
                mean: item.reward,
                stddev: SIGMA_FLOOR,
            }
        } else {
            policy.sample_bounded_action_into(&item.next_state, rng, &mut scratch, &mut next_action)?;
            cat_into(&mut input, &item.next_state, &next_action);
            let next = head_values(&pair.online.spec, &pair.target.values, &input, &mut scratch)?;
            GaussianValue {
                mean: item.reward + gamma * next.mean,
                stddev: (gamma * next.stddev).max(SIGMA_FLOOR),
            }
        };
        let model = pair
            .online
            .forward_buffered(&item.state, &item.action, &mut scratch, &mut input)?;
        total += gaussian_kl(target, model)?;
        let dm = target.mean - model.mean;
        let s2 = model.stddev;
        let d_mean = -dm / (s2 * s2) * inv_n;
        let d_std =
            (1.0 / s2 - (target.stddev * target.stddev + dm * dm) / (s2 * s2 * s2)) * inv_n;
        pair.online
            .backward_heads(&item.state, &item.action, d_mean, d_std, &mut scratch, &mut input)?;
    }
    adam_step(&mut pair.online.params, adam)?;
    Ok(total * inv_n)
}

/// One batch item for the cross-entropy update: a state-action pair and its
/// sample target vector `U`.
#[derive(Debug, Clone)]
pub struct CrossEntropyItem {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub targets: Vec<f64>,
}

/// Batch-level critic update minimizing the empirical cross-entropy
/// `-(1/l) sum_i log N(U_i; Z(s, a))`, one adaptive-moment step.
pub fn cross_entropy_update(
    critic: &mut GaussianCritic,
    adam: &mut AdamState,
    batch: &[CrossEntropyItem],
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Argument("empty cross-entropy batch".into()));
    }
    let l = batch[0].targets.len();
    if l == 0 {
        return Err(Error::Argument("empty target vector".into()));
    }
    let n = batch.len();
    let inv_n = 1.0 / n as f64;
    let mut scratch = Scratch::new();
    let mut input = Vec::new();
    let mut total = 0.0;
    for item in batch {
        if item.targets.len() != l {
            return Err(Error::Dimension("target vector lengths differ".into()));
        }
        let model = critic.forward_buffered(&item.state, &item.action, &mut scratch, &mut input)?;
        let inv_l = 1.0 / l as f64;
        let mut spread = 0.0;
        for &u in &item.targets {
            let d = u - model.mean;
            spread += d * d;
        }
        spread *= inv_l;
        let sigma = model.stddev;
        total += sigma.ln() + 0.5 * LN_2PI + spread / (2.0 * sigma * sigma);
        let mean_u = item.targets.iter().sum::<f64>() * inv_l;
        let d_mean = (model.mean - mean_u) / (sigma * sigma) * inv_n;
        let d_std = (1.0 / sigma - spread / (sigma * sigma * sigma)) * inv_n;
        critic.backward_heads(&item.state, &item.action, d_mean, d_std, &mut scratch, &mut input)?;
    }
    adam_step(&mut critic.params, adam)?;
    Ok(total * inv_n)
}

/// One on-policy episode segment prepared for target construction. The
/// bootstrap pair is evaluated when the segment ends by truncation or hits
/// the batch boundary; for terminal segments it is ignored.
#[derive(Debug)]
pub struct SegmentData<'a> {
    pub states: &'a [Vec<f64>],
    pub actions: &'a [Vec<f64>],
    pub rewards: &'a [f64],
    pub baselines: &'a [f64],
    pub bootstrap_state: &'a [f64],
    pub bootstrap_action: &'a [f64],
    pub terminal_end: bool,
}

/// Builds the per-step target vectors `U = A + 1 * b`: `l` critic samples
/// are drawn at every bootstrap position and the advantage recursion runs
/// once per sample index over the segment.
pub fn build_target_vectors<R: Rng + ?Sized>(
    critic: &GaussianCritic,
    segment: &SegmentData<'_>,
    gamma: f64,
    lambda: f64,
    l: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let t_len = segment.states.len();
    if t_len == 0 {
        return Err(Error::Argument("empty segment".into()));
    }
    if segment.actions.len() != t_len
        || segment.rewards.len() != t_len
        || segment.baselines.len() != t_len
    {
        return Err(Error::Dimension("segment field lengths differ".into()));
    }
    // l samples per position, including the bootstrap slot.
    let mut samples = Vec::with_capacity(t_len + 1);
    for t in 0..t_len {
        samples.push(critic.sample_value_vector(&segment.states[t], &segment.actions[t], l, rng)?);
    }
    if segment.terminal_end {
        samples.push(vec![0.0; l]);
    } else {
        samples.push(critic.sample_value_vector(
            segment.bootstrap_state,
            segment.bootstrap_action,
            l,
            rng,
        )?);
    }

    let mut terminal_flags = vec![false; t_len + 1];
    terminal_flags[t_len] = segment.terminal_end;
    let mut targets = vec![vec![0.0; l]; t_len];
    let mut critic_values = vec![0.0; t_len + 1];
    for i in 0..l {
        for t in 0..=t_len {
            critic_values[t] = samples[t][i];
        }
        let arrays = RolloutArrays {
            rewards: segment.rewards.to_vec(),
            critic_values: critic_values.clone(),
            baselines: segment.baselines.to_vec(),
            terminal_flags: terminal_flags.clone(),
            gamma,
            lambda,
        };
        let advantages = uae(&arrays)?;
        for t in 0..t_len {
            targets[t][i] = advantages[t] + segment.baselines[t];
        }
    }
    Ok(targets)
}
