//! Policy improvement: a Beta policy over bounded actions, pluggable
//! on-policy surrogates (A2C, TRPO, PPO), and the interpolated objective
//! that mixes the on-policy surrogate with an optimistic off-policy term
//! built from positive advantages and an entropy bonus.
//!
//! The off-policy gradient is a pure score-function estimator: the weight
//! `A+ - alpha log pi` is treated as a constant, so whenever every clamped
//! advantage is zero and `alpha = 0` the gradient vanishes identically.

use rand::Rng;

use crate::baseline::{baseline_value, ResidualBaseline};
use crate::critic::GaussianCritic;
use crate::distributions::{
    beta_kl, beta_log_density, beta_log_density_grad, transform_action, ActionBounds, BetaParams,
};
use crate::error::{Error, Result};
use crate::funcapprox::{
    adam_step, forward_with, init_params, sigmoid, AdamState, Activation, MlpSpec,
    ParamVector, Scratch,
};

/// Safety clip on the combined policy gradient norm; loose on purpose, it
/// only guards against rare Beta-boundary spikes.
pub const GRAD_NORM_CLIP: f64 = 100.0;

/// Which on-policy learner drives the first term of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Learner {
    A2c,
    Trpo,
    Ppo,
}

impl std::str::FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a2c" => Ok(Learner::A2c),
            "trpo" => Ok(Learner::Trpo),
            "ppo" => Ok(Learner::Ppo),
            other => Err(Error::Argument(format!(
                "unknown learner '{other}' (expected a2c|trpo|ppo)"
            ))),
        }
    }
}

impl std::fmt::Display for Learner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Learner::A2c => "a2c",
            Learner::Trpo => "trpo",
            Learner::Ppo => "ppo",
        };
        f.write_str(name)
    }
}

/// Hyperparameters of the policy improvement step.
#[derive(Debug, Clone)]
pub struct PolicyConfig {
    /// Interpolation between on-policy (1) and off-policy (0) gradients.
    pub omega: f64,
    /// Entropy temperature in the off-policy term.
    pub alpha: f64,
    pub learner: Learner,
    pub ppo_clip: f64,
    pub trpo_max_kl: f64,
    pub trpo_damping: f64,
    pub epochs_per_batch: usize,
}

impl PolicyConfig {
    pub fn for_learner(learner: Learner) -> Self {
        Self {
            omega: 0.7,
            alpha: 0.03,
            learner,
            ppo_clip: 0.2,
            trpo_max_kl: 0.1,
            trpo_damping: 0.1,
            epochs_per_batch: match learner {
                Learner::Ppo => 10,
                Learner::A2c | Learner::Trpo => 1,
            },
        }
    }
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self::for_learner(Learner::Ppo)
    }
}

/// `max(q - b, 0)`: the clamp that removes detrimental off-policy updates.
#[inline]
pub fn positive_advantage(q: f64, b: f64) -> f64 {
    (q - b).max(0.0)
}

/// One sampled action: the unit-cube draw, the bounded action that was
/// executed, and the untransformed log-likelihood `log f(x|s)`.
#[derive(Debug, Clone)]
pub struct SampledAction {
    pub x: Vec<f64>,
    pub action: Vec<f64>,
    pub log_f: f64,
}

/// Beta policy over a bounded action box. The network outputs
/// `2 * action_dim` raw values mapped to shape parameters by
/// `softplus(.) + 1`.
#[derive(Debug, Clone)]
pub struct BetaPolicy {
    pub spec: MlpSpec,
    pub params: ParamVector,
    pub bounds: ActionBounds,
}

impl BetaPolicy {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        bounds: ActionBounds,
        hidden: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        let spec = MlpSpec::new(
            obs_dim,
            hidden.to_vec(),
            2 * bounds.dim(),
            Activation::Tanh,
            Activation::Identity,
        )?;
        let params = init_params(&spec, rng);
        Ok(Self { spec, params, bounds })
    }

    pub fn action_dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn shape_params(&self, obs: &[f64]) -> Result<BetaParams> {
        let mut scratch = Scratch::new();
        self.shape_params_with(obs, &mut scratch)
    }

    pub(crate) fn shape_params_with(
        &self,
        obs: &[f64],
        scratch: &mut Scratch,
    ) -> Result<BetaParams> {
        forward_with(&self.spec, &self.params.values, obs, scratch)?;
        BetaParams::from_network_output(scratch.output())
    }

    /// Draws `x ~ Beta(.)`, maps it into the action box, and reports the
    /// untransformed log-likelihood, which is what gets stored in batches.
    pub fn sample_action<R: Rng + ?Sized>(
        &self,
        obs: &[f64],
        rng: &mut R,
    ) -> Result<SampledAction> {
        let mut scratch = Scratch::new();
        self.sample_action_with(obs, rng, &mut scratch)
    }

    pub(crate) fn sample_action_with<R: Rng + ?Sized>(
        &self,
        obs: &[f64],
        rng: &mut R,
        scratch: &mut Scratch,
    ) -> Result<SampledAction> {
        let shapes = self.shape_params_with(obs, scratch)?;
        let x = crate::distributions::sample_beta(&shapes, rng);
        let (action, _) = transform_action(&x, &self.bounds)?;
        let log_f = beta_log_density(&x, &shapes)?;
        Ok(SampledAction { x, action, log_f })
    }

    /// Draws a bounded action without evaluating its log density: the
    /// shape head is read straight off the forward scratch and the draw is
    /// written into `action_out`. This is the cheap sampler used where
    /// only the action matters (critic targets, baseline expectations).
    pub(crate) fn sample_bounded_action_into<R: Rng + ?Sized>(
        &self,
        obs: &[f64],
        rng: &mut R,
        scratch: &mut Scratch,
        action_out: &mut Vec<f64>,
    ) -> Result<()> {
        use rand_distr::Distribution;
        forward_with(&self.spec, &self.params.values, obs, scratch)?;
        let raw = scratch.output();
        let dim = raw.len() / 2;
        action_out.clear();
        for i in 0..dim {
            let a = crate::funcapprox::softplus(raw[i]) + 1.0;
            let b = crate::funcapprox::softplus(raw[dim + i]) + 1.0;
            let x: f64 = rand_distr::Beta::new(a, b)
                .expect("shapes >= 1 are valid")
                .sample(rng);
            action_out.push(x * (self.bounds.upper[i] - self.bounds.lower[i]) + self.bounds.lower[i]);
        }
        Ok(())
    }

    /// Untransformed log-likelihood `log f(x|s)` under the current
    /// parameters.
    pub fn log_density_x(&self, obs: &[f64], x: &[f64]) -> Result<f64> {
        let mut scratch = Scratch::new();
        let shapes = self.shape_params_with(obs, &mut scratch)?;
        beta_log_density(x, &shapes)
    }

    /// Log-likelihood of the executed action: `log f(x|s) - sum log k`.
    pub fn log_density_action(&self, obs: &[f64], x: &[f64]) -> Result<f64> {
        Ok(self.log_density_x(obs, x)? - self.bounds.log_scale_sum())
    }

    /// Deterministic evaluation action: the Beta mean mapped into bounds.
    pub fn mean_action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let shapes = self.shape_params(obs)?;
        let (action, _) = transform_action(&shapes.mean(), &self.bounds)?;
        Ok(action)
    }

    /// Differential entropy of the bounded action distribution.
    pub fn entropy(&self, obs: &[f64]) -> Result<f64> {
        let shapes = self.shape_params(obs)?;
        Ok(shapes.entropy() + self.bounds.log_scale_sum())
    }

    /// Accumulates `weight * d log f(x|s) / d theta` into the parameter
    /// gradients.
    pub fn accumulate_score(
        &mut self,
        obs: &[f64],
        x: &[f64],
        weight: f64,
        scratch: &mut Scratch,
    ) -> Result<()> {
        if weight == 0.0 {
            return Ok(());
        }
        forward_with(&self.spec, &self.params.values, obs, scratch)?;
        let raw = scratch.output().to_vec();
        let shapes = BetaParams::from_network_output(&raw)?;
        let (da, db) = beta_log_density_grad(x, &shapes)?;
        let dim = shapes.dim();
        let mut out_grad = vec![0.0; 2 * dim];
        for i in 0..dim {
            out_grad[i] = weight * da[i] * sigmoid(raw[i]);
            out_grad[dim + i] = weight * db[i] * sigmoid(raw[dim + i]);
        }
        let ParamVector { values, grads } = &mut self.params;
        crate::funcapprox::backward_params(&self.spec, values, grads, obs, &out_grad, scratch)?;
        Ok(())
    }

    /// Writes `d log f(x|s) / d theta` into `out` (overwriting it).
    pub fn score_vector(&self, obs: &[f64], x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        out.resize(self.params.len(), 0.0);
        let mut scratch = Scratch::new();
        forward_with(&self.spec, &self.params.values, obs, &mut scratch)?;
        let raw = scratch.output().to_vec();
        let shapes = BetaParams::from_network_output(&raw)?;
        let (da, db) = beta_log_density_grad(x, &shapes)?;
        let dim = shapes.dim();
        let mut out_grad = vec![0.0; 2 * dim];
        for i in 0..dim {
            out_grad[i] = da[i] * sigmoid(raw[i]);
            out_grad[dim + i] = db[i] * sigmoid(raw[dim + i]);
        }
        crate::funcapprox::backward_params(&self.spec, &self.params.values, out, obs, &out_grad, &mut scratch)?;
        Ok(())
    }
}

/// Borrowed view of an on-policy minibatch: normalized observations, the
/// stored unit-cube actions, their stored untransformed log-likelihoods,
/// and interpolated, batch-normalized advantages.
#[derive(Debug, Clone, Copy)]
pub struct OnPolicyMinibatch<'a> {
    pub observations: &'a [Vec<f64>],
    pub actions_x: &'a [Vec<f64>],
    pub old_log_f: &'a [f64],
    pub advantages: &'a [f64],
}

impl OnPolicyMinibatch<'_> {
    fn validate(&self) -> Result<usize> {
        let n = self.observations.len();
        if n == 0 {
            return Err(Error::Argument("empty on-policy minibatch".into()));
        }
        if self.actions_x.len() != n || self.old_log_f.len() != n || self.advantages.len() != n {
            return Err(Error::Dimension(
                "on-policy minibatch field lengths differ".into(),
            ));
        }
        Ok(n)
    }
}

/// On-policy surrogate value, with `scale * gradient` accumulated into the
/// policy gradients (gradient-ascent direction).
pub fn on_policy_surrogate(
    learner: Learner,
    policy: &mut BetaPolicy,
    batch: &OnPolicyMinibatch<'_>,
    ppo_clip: f64,
    scale: f64,
) -> Result<f64> {
    let n = batch.validate()?;
    let inv_n = 1.0 / n as f64;
    let mut scratch = Scratch::new();
    let mut total = 0.0;
    for i in 0..n {
        let obs = &batch.observations[i];
        let x = &batch.actions_x[i];
        let adv = batch.advantages[i];
        let new_lf = {
            let shapes = policy.shape_params_with(obs, &mut scratch)?;
            beta_log_density(x, &shapes)?
        };
        match learner {
            Learner::Ppo => {
                let ratio = (new_lf - batch.old_log_f[i]).exp();
                let unclipped = ratio * adv;
                let clipped = ratio.clamp(1.0 - ppo_clip, 1.0 + ppo_clip) * adv;
                total += unclipped.min(clipped);
                let weight = if unclipped <= clipped { ratio * adv } else { 0.0 };
                policy.accumulate_score(obs, x, scale * inv_n * weight, &mut scratch)?;
            }
            Learner::A2c => {
                total += new_lf * adv;
                policy.accumulate_score(obs, x, scale * inv_n * adv, &mut scratch)?;
            }
            Learner::Trpo => {
                total += (new_lf - batch.old_log_f[i]).exp() * adv;
                policy.accumulate_score(obs, x, scale * inv_n * adv, &mut scratch)?;
            }
        }
    }
    Ok(total * inv_n)
}

/// Surrogate value `mean(ratio * adv)` at the current parameters without
/// touching gradients; used by the trust-region line search.
fn ratio_surrogate_value(policy: &BetaPolicy, batch: &OnPolicyMinibatch<'_>) -> Result<f64> {
    let n = batch.validate()?;
    let mut scratch = Scratch::new();
    let mut total = 0.0;
    for i in 0..n {
        let shapes = policy.shape_params_with(&batch.observations[i], &mut scratch)?;
        let new_lf = beta_log_density(&batch.actions_x[i], &shapes)?;
        total += (new_lf - batch.old_log_f[i]).exp() * batch.advantages[i];
    }
    Ok(total / n as f64)
}

/// Optimistic off-policy surrogate over replayed states: actions are
/// re-sampled from the current policy and weighted by
/// `stopgrad(A+ - alpha log pi)` in a score-function estimator. Returns the
/// estimated objective value `mean(A+ - alpha log pi)`.
#[allow(clippy::too_many_arguments)]
pub fn off_policy_surrogate<R: Rng + ?Sized>(
    policy: &mut BetaPolicy,
    critic: &GaussianCritic,
    baseline: &ResidualBaseline,
    observations: &[Vec<f64>],
    alpha: f64,
    action_samples: usize,
    scale: f64,
    rng: &mut R,
) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::Argument("empty off-policy minibatch".into()));
    }
    let n = observations.len();
    let inv_n = 1.0 / n as f64;
    let log_k = policy.bounds.log_scale_sum();
    let mut scratch = Scratch::new();
    let mut total = 0.0;
    for obs in observations {
        let sampled = policy.sample_action_with(obs, rng, &mut scratch)?;
        let b = baseline_value(baseline, critic, policy, obs, action_samples, rng)?;
        let q = critic.forward(obs, &sampled.action)?.mean;
        let log_pi = sampled.log_f - log_k;
        let weight = positive_advantage(q, b) - alpha * log_pi;
        total += weight;
        policy.accumulate_score(obs, &sampled.x, scale * inv_n * weight, &mut scratch)?;
    }
    Ok(total * inv_n)
}

/// Standardizes a batch of advantages in place: `(A - mean) / (std + 1e-8)`.
pub fn normalize_advantages(advantages: &mut [f64]) -> Result<()> {
    if advantages.len() < 2 {
        return Err(Error::Argument(
            "advantage normalization needs a batch of at least 2".into(),
        ));
    }
    let n = advantages.len() as f64;
    let mean: f64 = advantages.iter().sum::<f64>() / n;
    let var: f64 = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let denom = var.sqrt() + 1e-8;
    for a in advantages.iter_mut() {
        *a = (*a - mean) / denom;
    }
    Ok(())
}

/// Clips the accumulated gradient to [`GRAD_NORM_CLIP`]; returns true when
/// the clip fired.
fn clip_gradient(params: &mut ParamVector) -> bool {
    let norm = params.grad_norm();
    if norm > GRAD_NORM_CLIP {
        let scale = GRAD_NORM_CLIP / norm;
        for g in &mut params.grads {
            *g *= scale;
        }
        true
    } else {
        false
    }
}

/// One interpolated policy update:
/// `grad = omega * grad_on + (1 - omega) * grad_off`, followed by a single
/// ascent step of the adaptive-moment optimizer. Either side is skipped
/// entirely (no RNG consumed) at the corresponding endpoint of `omega`.
#[allow(clippy::too_many_arguments)]
pub fn combined_update<R: Rng + ?Sized>(
    config: &PolicyConfig,
    policy: &mut BetaPolicy,
    adam: &mut AdamState,
    critic: &GaussianCritic,
    baseline: &ResidualBaseline,
    on_batch: &OnPolicyMinibatch<'_>,
    off_observations: &[Vec<f64>],
    action_samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&config.omega) {
        return Err(Error::Argument(format!(
            "omega {} outside [0, 1]",
            config.omega
        )));
    }
    policy.params.zero_grads();
    let mut on_value = 0.0;
    let mut off_value = 0.0;
    if config.omega > 0.0 {
        on_value = on_policy_surrogate(
            config.learner,
            policy,
            on_batch,
            config.ppo_clip,
            config.omega,
        )?;
    }
    if config.omega < 1.0 {
        off_value = off_policy_surrogate(
            policy,
            critic,
            baseline,
            off_observations,
            config.alpha,
            action_samples,
            1.0 - config.omega,
            rng,
        )?;
    }
    if clip_gradient(&mut policy.params) {
        log::warn!("policy gradient norm clipped to {GRAD_NORM_CLIP}");
    }
    policy.params.negate_grads();
    adam_step(&mut policy.params, adam)?;
    Ok((on_value, off_value))
}

/// Conjugate gradient for `A x = b` given only the matrix-vector product.
/// Returns the iterate and its residual norm.
pub fn conjugate_gradient<F>(mut matvec: F, b: &[f64], iters: usize, tol: f64) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = b.to_vec();
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..iters {
        if rs.sqrt() < tol {
            break;
        }
        let ap = matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_new;
    }
    (x, rs.sqrt())
}

/// Trust-region step for the on-policy surrogate composed with a
/// pre-computed off-policy gradient.
///
/// The search direction solves the damped empirical-Fisher system by
/// conjugate gradient, is scaled to the KL budget, and line-searched under
/// an exact Beta KL; the accepted increment is `omega * delta`. The
/// off-policy gradient is evaluated at the starting parameters, scaled by
/// `1 - omega`, and applied afterwards through the adaptive-moment
/// optimizer.
#[allow(clippy::too_many_arguments)]
pub fn trpo_step<R: Rng + ?Sized>(
    config: &PolicyConfig,
    policy: &mut BetaPolicy,
    adam: &mut AdamState,
    critic: &GaussianCritic,
    baseline: &ResidualBaseline,
    batch: &OnPolicyMinibatch<'_>,
    off_observations: &[Vec<f64>],
    action_samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let n = batch.validate()?;

    // Off-policy gradient at the current parameters, stashed for later.
    policy.params.zero_grads();
    let mut off_value = 0.0;
    let mut off_grad = None;
    if config.omega < 1.0 {
        off_value = off_policy_surrogate(
            policy,
            critic,
            baseline,
            off_observations,
            config.alpha,
            action_samples,
            1.0 - config.omega,
            rng,
        )?;
        off_grad = Some(policy.params.grads.clone());
        policy.params.zero_grads();
    }

    // Ascent gradient of the surrogate at theta_old.
    let surrogate_before = on_policy_surrogate(Learner::Trpo, policy, batch, config.ppo_clip, 1.0)?;
    let g = policy.params.grads.clone();
    policy.params.zero_grads();

    // Empirical Fisher-vector products over a state subsample.
    let fisher_count = n.min(1024);
    let mut score = Vec::new();
    let mut fvp = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i in 0..fisher_count {
            policy
                .score_vector(&batch.observations[i], &batch.actions_x[i], &mut score)
                .expect("scores exist for batch samples");
            let dot: f64 = score.iter().zip(v).map(|(s, vi)| s * vi).sum();
            for (o, s) in out.iter_mut().zip(&score) {
                *o += dot * s;
            }
        }
        let inv = 1.0 / fisher_count as f64;
        for (o, vi) in out.iter_mut().zip(v) {
            *o = *o * inv + config.trpo_damping * vi;
        }
        out
    };

    let (direction, residual) = conjugate_gradient(&mut fvp, &g, 10, 1e-10);
    let g_norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let direction = if !residual.is_finite() || (g_norm > 0.0 && residual > g_norm) {
        log::warn!("conjugate gradient did not converge; falling back to the gradient direction");
        g.clone()
    } else {
        direction
    };

    let fisher_dir = fvp(&direction);
    let quad: f64 = direction.iter().zip(&fisher_dir).map(|(d, f)| d * f).sum();
    let old_values = policy.params.values.clone();
    if quad > 0.0 && g_norm > 0.0 {
        let step_scale = (2.0 * config.trpo_max_kl / quad).sqrt();
        // Reference shape parameters for the KL constraint.
        let mut scratch = Scratch::new();
        let mut old_shapes = Vec::with_capacity(n);
        for obs in batch.observations {
            old_shapes.push(policy.shape_params_with(obs, &mut scratch)?);
        }
        let mut accepted = false;
        let mut coef = 1.0;
        for _ in 0..10 {
            for (value, (old, dir)) in policy
                .params
                .values
                .iter_mut()
                .zip(old_values.iter().zip(&direction))
            {
                *value = old + config.omega * coef * step_scale * dir;
            }
            let surrogate_after = ratio_surrogate_value(policy, batch)?;
            let mut kl = 0.0;
            for (obs, old) in batch.observations.iter().zip(&old_shapes) {
                let new_shapes = policy.shape_params_with(obs, &mut scratch)?;
                kl += beta_kl(old, &new_shapes)?;
            }
            kl /= n as f64;
            if surrogate_after >= surrogate_before && kl <= config.trpo_max_kl {
                accepted = true;
                break;
            }
            coef *= 0.5;
        }
        if !accepted {
            log::warn!("trust-region line search failed; keeping parameters");
            policy.params.values.copy_from_slice(&old_values);
        }
    }

    if let Some(grad) = off_grad {
        policy.params.grads.copy_from_slice(&grad);
        if clip_gradient(&mut policy.params) {
            log::warn!("policy gradient norm clipped to {GRAD_NORM_CLIP}");
        }
        policy.params.negate_grads();
        adam_step(&mut policy.params, adam)?;
    }
    Ok((surrogate_before, off_value))
}

/// Streaming per-dimension observation statistics (parallel-update running
/// mean/variance) with `(x - mean) / sqrt(var + 1e-8)` normalization,
/// clipped to `[-10, 10]`.
#[derive(Debug, Clone)]
pub struct RunningNormalizer {
    pub count: f64,
    pub mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningNormalizer {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn update(&mut self, obs: &[f64]) {
        debug_assert_eq!(obs.len(), self.mean.len());
        self.count += 1.0;
        for i in 0..self.mean.len() {
            let delta = obs[i] - self.mean[i];
            self.mean[i] += delta / self.count;
            self.m2[i] += delta * (obs[i] - self.mean[i]);
        }
    }

    pub fn variance(&self) -> Vec<f64> {
        self.m2
            .iter()
            .map(|&m2| if self.count >= 2.0 { m2 / self.count } else { 1.0 })
            .collect()
    }

    pub fn normalize(&self, obs: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(obs.len());
        self.normalize_into(obs, &mut out);
        out
    }

    /// Allocation-free variant of [`Self::normalize`].
    pub fn normalize_into(&self, obs: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (i, &x) in obs.iter().enumerate() {
            let var = if self.count >= 2.0 { self.m2[i] / self.count } else { 1.0 };
            out.push(((x - self.mean[i]) / (var + 1e-8).sqrt()).clamp(-10.0, 10.0));
        }
    }
}

/// Scales rewards by the running standard deviation of the discounted
/// return accumulator.
#[derive(Debug, Clone)]
pub struct RewardNormalizer {
    gamma: f64,
    ret: f64,
    count: f64,
    mean: f64,
    m2: f64,
}

impl RewardNormalizer {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            ret: 0.0,
            count: 0.0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    /// Feeds one raw reward into the discounted accumulator; the
    /// accumulator resets at episode ends.
    pub fn update(&mut self, reward: f64, episode_end: bool) {
        self.ret = self.gamma * self.ret + reward;
        self.count += 1.0;
        let delta = self.ret - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (self.ret - self.mean);
        if episode_end {
            self.ret = 0.0;
        }
    }

    pub fn std(&self) -> f64 {
        if self.count >= 2.0 {
            (self.m2 / self.count).sqrt()
        } else {
            1.0
        }
    }

    /// Scaled reward under the current statistics (pure).
    pub fn scale(&self, reward: f64) -> f64 {
        if self.count >= 2.0 {
            reward / (self.std() + 1e-8)
        } else {
            reward
        }
    }
}
