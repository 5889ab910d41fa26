//! The full training loop: per environment step the critic tracks
//! discounted target distributions from replayed minibatches; per batch of
//! `T` steps the residual baseline refits off-policy, advantages flow
//! through the unified estimator with interpolation and batch
//! normalization, and policy plus batch-critic updates run per epoch over
//! minibatches. On-policy data is consumed once per cycle and discarded;
//! replay persists across cycles.
//!
//! The loop is single-threaded and fully deterministic for a fixed seed:
//! five independent seeded streams drive the environment, action sampling,
//! training-internal sampling, minibatch selection, and evaluation.

mod config;
mod diagnose;
mod metrics;
pub mod verify;

pub use config::RunConfig;
pub use diagnose::{diagnose, DiagnoseReport};
pub use metrics::{read_metrics, MetricsRow, MetricsWriter, METRIC_COLUMNS};

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::{
    baseline_loss_and_grad, baseline_value, BaselineItem, ResidualBaseline,
};
use crate::critic::{
    build_target_vectors, cross_entropy_update, kl_td_update, polyak_update, CriticPair,
    CrossEntropyItem, GaussianCritic, SegmentData, TransitionItem,
};
use crate::environments::make_env;
use crate::error::{Error, Result};
use crate::estimators::{interpolate_advantage, uae, RolloutArrays};
use crate::funcapprox::{
    adam_step, load_checkpoint, save_checkpoint, AdamState, ParamVector,
};
use crate::policy::{
    combined_update, normalize_advantages, trpo_step, BetaPolicy, Learner, OnPolicyMinibatch,
    RewardNormalizer, RunningNormalizer,
};
use crate::replay::{ReplayBuffer, Transition};

/// Stream indices fanned out from the master seed.
const STREAM_ENV: u64 = 0;
const STREAM_POLICY: u64 = 1;
const STREAM_CRITIC: u64 = 2;
const STREAM_DATA: u64 = 3;
const STREAM_EVAL: u64 = 4;
const STREAM_INIT: u64 = 5;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Update counters kept by the trainer, mostly for bookkeeping tests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateCounts {
    pub critic_kl_updates: usize,
    pub baseline_updates: usize,
    pub policy_updates: usize,
    pub critic_ce_updates: usize,
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub steps: usize,
    pub final_eval_mean: f64,
    pub final_eval_std: f64,
    pub metrics_path: PathBuf,
    pub counts: UpdateCounts,
}

/// On-policy batch storage (struct of arrays). Observations are stored as
/// normalized at collection time, which keeps recomputed likelihood ratios
/// exactly one at the old parameters.
#[derive(Debug, Default)]
struct BatchStorage {
    obs: Vec<Vec<f64>>,
    next_obs: Vec<Vec<f64>>,
    actions_x: Vec<Vec<f64>>,
    actions: Vec<Vec<f64>>,
    log_f: Vec<f64>,
    rewards_raw: Vec<f64>,
    terminal: Vec<bool>,
    truncated: Vec<bool>,
}

impl BatchStorage {
    fn len(&self) -> usize {
        self.obs.len()
    }

    fn clear(&mut self) {
        self.obs.clear();
        self.next_obs.clear();
        self.actions_x.clear();
        self.actions.clear();
        self.log_f.clear();
        self.rewards_raw.clear();
        self.terminal.clear();
        self.truncated.clear();
    }
}

/// Loss accumulators between metric rows.
#[derive(Debug, Default)]
struct Accumulators {
    critic_kl: (f64, usize),
    critic_ce: (f64, usize),
    baseline_loss: (f64, usize),
    policy_on: (f64, usize),
    policy_off: (f64, usize),
    entropy: f64,
    mean_abs_residual: f64,
    mean_pos_adv: f64,
}

impl Accumulators {
    fn mean(pair: (f64, usize)) -> f64 {
        if pair.1 == 0 {
            0.0
        } else {
            pair.0 / pair.1 as f64
        }
    }

    fn drain(&mut self, step: usize, eval_mean: f64, eval_std: f64) -> MetricsRow {
        let row = MetricsRow {
            step,
            eval_return_mean: eval_mean,
            eval_return_std: eval_std,
            critic_kl: Self::mean(self.critic_kl),
            critic_ce: Self::mean(self.critic_ce),
            baseline_loss: Self::mean(self.baseline_loss),
            policy_loss_on: Self::mean(self.policy_on),
            policy_loss_off: Self::mean(self.policy_off),
            entropy: self.entropy,
            mean_abs_residual: self.mean_abs_residual,
            mean_pos_adv: self.mean_pos_adv,
        };
        self.critic_kl = (0.0, 0);
        self.critic_ce = (0.0, 0);
        self.baseline_loss = (0.0, 0);
        self.policy_on = (0.0, 0);
        self.policy_off = (0.0, 0);
        row
    }
}

/// Runs the full training loop and writes metrics, checkpoints, the final
/// batch snapshot, and a replay-state sample into `config.out_dir`.
pub fn train(config: &RunConfig) -> Result<TrainReport> {
    config.validate()?;
    let mut env = make_env(&config.env)?;
    let obs_dim = env.observation_dim();
    let bounds = env.bounds().clone();

    fs::create_dir_all(&config.out_dir)?;
    fs::create_dir_all(config.out_dir.join("checkpoints"))?;
    config.to_file(&config.out_dir.join("config.txt"))?;

    let mut env_rng = stream_rng(config.seed, STREAM_ENV);
    let mut policy_rng = stream_rng(config.seed, STREAM_POLICY);
    let mut critic_rng = stream_rng(config.seed, STREAM_CRITIC);
    let mut data_rng = stream_rng(config.seed, STREAM_DATA);
    let mut eval_rng = stream_rng(config.seed, STREAM_EVAL);
    let mut init_rng = stream_rng(config.seed, STREAM_INIT);

    let mut policy = BetaPolicy::new(obs_dim, bounds.clone(), &config.hidden, &mut init_rng)?;
    let action_dim = policy.action_dim();
    let critic = GaussianCritic::new(obs_dim, action_dim, &config.hidden, &mut init_rng)?;
    let mut pair = CriticPair::new(critic, config.tau)?;
    let mut residual = ResidualBaseline::new(obs_dim, action_dim, &config.hidden, &mut init_rng)?;

    let mut policy_adam = AdamState::new(policy.params.len(), config.learning_rate);
    let mut critic_adam = AdamState::new(pair.online.params.len(), config.learning_rate);
    let mut baseline_adam = AdamState::new(residual.params.len(), config.learning_rate);

    let mut obs_norm = RunningNormalizer::new(obs_dim);
    let mut rew_norm = RewardNormalizer::new(config.gamma);
    let mut replay = ReplayBuffer::new(config.replay_capacity)?;
    let mut batch = BatchStorage::default();
    let mut acc = Accumulators::default();
    let mut counts = UpdateCounts::default();
    let policy_cfg = config.policy_config();

    let metrics_path = config.out_dir.join("metrics.csv");
    let mut metrics = MetricsWriter::create(&metrics_path)?;
    let mut last_eval = (0.0, 0.0);
    // Snapshot of the most recent completed batch for the diagnostics
    // command: (obs, x, critic mean, baseline) per row.
    let mut last_batch_snapshot: Vec<(Vec<f64>, Vec<f64>, f64, f64)> = Vec::new();

    let mut kl_items: Vec<TransitionItem> = Vec::new();
    let mut raw_obs = env.reset(&mut env_rng);
    for step in 1..=config.total_steps {
        obs_norm.update(&raw_obs);
        let obs_n = obs_norm.normalize(&raw_obs);
        let sampled = policy.sample_action(&obs_n, &mut policy_rng)?;
        let outcome = env.step(&sampled.action, &mut env_rng)?;
        rew_norm.update(outcome.reward, outcome.episode_over());

        replay.push(Transition {
            state: raw_obs.clone(),
            action: sampled.action.clone(),
            reward: outcome.reward,
            next_state: outcome.observation.clone(),
            terminal: outcome.terminal,
            truncated: outcome.truncated,
        });
        batch.obs.push(obs_n);
        batch.next_obs.push(obs_norm.normalize(&outcome.observation));
        batch.actions_x.push(sampled.x);
        batch.actions.push(sampled.action.clone());
        batch.log_f.push(sampled.log_f);
        batch.rewards_raw.push(outcome.reward);
        batch.terminal.push(outcome.terminal);
        batch.truncated.push(outcome.truncated);

        if replay.len() >= config.warmup {
            fill_transition_items(
                &replay,
                config.minibatch,
                &obs_norm,
                &rew_norm,
                &mut data_rng,
                &mut kl_items,
            )?;
            let kl = kl_td_update(
                &mut pair,
                &mut critic_adam,
                &kl_items,
                &policy,
                config.gamma,
                &mut critic_rng,
            )?;
            if !kl.is_finite() {
                return Err(Error::NonFinite(format!("critic KL loss at step {step}")));
            }
            acc.critic_kl.0 += kl;
            acc.critic_kl.1 += 1;
            counts.critic_kl_updates += 1;
            polyak_update(&mut pair);
        }

        raw_obs = if outcome.episode_over() {
            env.reset(&mut env_rng)
        } else {
            outcome.observation
        };

        if batch.len() == config.batch_size {
            run_cycle(
                config,
                &policy_cfg,
                &mut policy,
                &mut policy_adam,
                &mut pair,
                &mut critic_adam,
                &mut residual,
                &mut baseline_adam,
                &replay,
                &batch,
                &obs_norm,
                &rew_norm,
                &mut acc,
                &mut counts,
                &mut last_batch_snapshot,
                &mut critic_rng,
                &mut data_rng,
            )?;
            batch.clear();
        }

        if step % config.eval_interval == 0 {
            let (mean, std, _) = evaluate(
                &policy,
                &obs_norm,
                &config.env,
                config.eval_episodes,
                &mut eval_rng,
            )?;
            last_eval = (mean, std);
            let row = acc.drain(step, mean, std);
            metrics.write_row(&row)?;
            save_networks(
                &config.out_dir.join("checkpoints").join(format!("step_{step:09}")),
                &policy,
                &pair,
                &residual,
            )?;
        }
    }

    // Final artifacts for the diagnostics command.
    let final_dir = config.out_dir.join("final");
    save_networks(&final_dir, &policy, &pair, &residual)?;
    write_batch_snapshot(&final_dir.join("final_batch.txt"), &last_batch_snapshot)?;
    write_replay_states(
        &final_dir.join("replay_states.txt"),
        &replay,
        &obs_norm,
        10_000,
        &mut data_rng,
    )?;

    Ok(TrainReport {
        steps: config.total_steps,
        final_eval_mean: last_eval.0,
        final_eval_std: last_eval.1,
        metrics_path,
        counts,
    })
}

/// Fills a reusable minibatch buffer from uniform replay draws; all inner
/// vectors are recycled so the per-step hot path stays allocation-free
/// after warmup.
fn fill_transition_items(
    replay: &ReplayBuffer,
    minibatch: usize,
    obs_norm: &RunningNormalizer,
    rew_norm: &RewardNormalizer,
    data_rng: &mut ChaCha8Rng,
    items: &mut Vec<TransitionItem>,
) -> Result<()> {
    if replay.is_empty() {
        return Err(Error::Argument("cannot sample from an empty buffer".into()));
    }
    items.resize_with(minibatch, || TransitionItem {
        state: Vec::new(),
        action: Vec::new(),
        reward: 0.0,
        next_state: Vec::new(),
        terminal: false,
    });
    for item in items.iter_mut() {
        let t = replay.get(data_rng.random_range(0..replay.len()));
        obs_norm.normalize_into(&t.state, &mut item.state);
        obs_norm.normalize_into(&t.next_state, &mut item.next_state);
        item.action.clear();
        item.action.extend_from_slice(&t.action);
        item.reward = rew_norm.scale(t.reward);
        item.terminal = t.terminal;
    }
    Ok(())
}

fn sample_replay_states(
    replay: &ReplayBuffer,
    n: usize,
    obs_norm: &RunningNormalizer,
    data_rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let indices = replay.sample_indices(n, data_rng)?;
    Ok(indices
        .into_iter()
        .map(|i| obs_norm.normalize(&replay.get(i).state))
        .collect())
}

/// One training cycle after the batch fills: baseline refits, advantage
/// construction (segment-wise over episode boundaries), then epochs of
/// interleaved policy and batch-critic updates.
#[allow(clippy::too_many_arguments)]
fn run_cycle(
    config: &RunConfig,
    policy_cfg: &crate::policy::PolicyConfig,
    policy: &mut BetaPolicy,
    policy_adam: &mut AdamState,
    pair: &mut CriticPair,
    critic_adam: &mut AdamState,
    residual: &mut ResidualBaseline,
    baseline_adam: &mut AdamState,
    replay: &ReplayBuffer,
    batch: &BatchStorage,
    obs_norm: &RunningNormalizer,
    rew_norm: &RewardNormalizer,
    acc: &mut Accumulators,
    counts: &mut UpdateCounts,
    last_batch_snapshot: &mut Vec<(Vec<f64>, Vec<f64>, f64, f64)>,
    critic_rng: &mut ChaCha8Rng,
    data_rng: &mut ChaCha8Rng,
) -> Result<()> {
    let t_len = batch.len();
    let warm = replay.len() >= config.warmup;

    // Baseline refits from replay.
    if warm {
        for _ in 0..config.baseline_updates {
            let indices = replay.sample_indices(config.minibatch, data_rng)?;
            let items: Vec<BaselineItem> = indices
                .into_iter()
                .map(|i| {
                    let t = replay.get(i);
                    BaselineItem {
                        state: obs_norm.normalize(&t.state),
                        action: t.action.clone(),
                    }
                })
                .collect();
            residual.params.zero_grads();
            let loss = baseline_loss_and_grad(
                residual,
                &pair.online,
                policy,
                &items,
                config.action_samples,
                critic_rng,
            )?;
            adam_step(&mut residual.params, baseline_adam)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite("baseline loss".into()));
            }
            acc.baseline_loss.0 += loss;
            acc.baseline_loss.1 += 1;
            counts.baseline_updates += 1;
        }
    }

    // Per-step quantities on the batch, after the baseline refit.
    let scaled_rewards: Vec<f64> = batch.rewards_raw.iter().map(|&r| rew_norm.scale(r)).collect();
    let mut baselines = Vec::with_capacity(t_len);
    let mut q_means = Vec::with_capacity(t_len);
    let mut entropy_sum = 0.0;
    let mut abs_residual_sum = 0.0;
    for t in 0..t_len {
        baselines.push(baseline_value(
            residual,
            &pair.online,
            policy,
            &batch.obs[t],
            config.action_samples,
            critic_rng,
        )?);
        q_means.push(pair.online.mean(&batch.obs[t], &batch.actions[t])?);
        entropy_sum += policy.entropy(&batch.obs[t])?;
        abs_residual_sum += residual.residual(&batch.obs[t], &batch.actions[t])?.abs();
    }
    acc.entropy = entropy_sum / t_len as f64;
    acc.mean_abs_residual = abs_residual_sum / t_len as f64;
    acc.mean_pos_adv = (0..t_len)
        .map(|t| (q_means[t] - baselines[t]).max(0.0))
        .sum::<f64>()
        / t_len as f64;

    // Advantages and cross-entropy targets, one episode segment at a time.
    let mut advantages = vec![0.0; t_len];
    let mut ce_targets: Vec<Vec<f64>> = vec![Vec::new(); t_len];
    let mut start = 0;
    while start < t_len {
        let mut end = start;
        while end + 1 < t_len && !batch.terminal[end] && !batch.truncated[end] {
            end += 1;
        }
        let terminal_end = batch.terminal[end];
        let seg = start..=end;
        let seg_len = end - start + 1;

        let bootstrap_state = &batch.next_obs[end];
        let bootstrap_action = if terminal_end {
            vec![0.0; batch.actions[0].len()]
        } else {
            policy.sample_action(bootstrap_state, critic_rng)?.action
        };
        let q_bootstrap = if terminal_end {
            0.0
        } else {
            pair.online.mean(bootstrap_state, &bootstrap_action)?
        };

        let mut critic_values = Vec::with_capacity(seg_len + 1);
        critic_values.extend_from_slice(&q_means[seg.clone()]);
        critic_values.push(q_bootstrap);
        let mut terminal_flags = vec![false; seg_len + 1];
        terminal_flags[seg_len] = terminal_end;
        let arrays = RolloutArrays {
            rewards: scaled_rewards[seg.clone()].to_vec(),
            critic_values,
            baselines: baselines[seg.clone()].to_vec(),
            terminal_flags,
            gamma: config.gamma,
            lambda: config.lambda,
        };
        let segment_adv = uae(&arrays)?;
        for (offset, t) in seg.clone().enumerate() {
            advantages[t] = interpolate_advantage(
                segment_adv[offset],
                q_means[t] - baselines[t],
                config.nu,
            )?;
        }

        let segment = SegmentData {
            states: &batch.obs[start..=end],
            actions: &batch.actions[start..=end],
            rewards: &scaled_rewards[start..=end],
            baselines: &baselines[start..=end],
            bootstrap_state,
            bootstrap_action: &bootstrap_action,
            terminal_end,
        };
        let targets = build_target_vectors(
            &pair.online,
            &segment,
            config.gamma,
            config.lambda,
            config.critic_samples,
            critic_rng,
        )?;
        for (offset, t) in seg.enumerate() {
            ce_targets[t] = targets[offset].clone();
        }
        start = end + 1;
    }
    normalize_advantages(&mut advantages)?;

    *last_batch_snapshot = (0..t_len)
        .map(|t| {
            (
                batch.obs[t].clone(),
                batch.actions_x[t].clone(),
                q_means[t],
                baselines[t],
            )
        })
        .collect();

    // Policy improvement and batch-level critic updates.
    match config.learner {
        Learner::Trpo => {
            let view = OnPolicyMinibatch {
                observations: &batch.obs,
                actions_x: &batch.actions_x,
                old_log_f: &batch.log_f,
                advantages: &advantages,
            };
            let off_states = sample_replay_states(replay, config.minibatch, obs_norm, data_rng)?;
            let (on_value, off_value) = trpo_step(
                policy_cfg,
                policy,
                policy_adam,
                &pair.online,
                residual,
                &view,
                &off_states,
                config.action_samples,
                critic_rng,
            )?;
            acc.policy_on.0 += on_value;
            acc.policy_on.1 += 1;
            acc.policy_off.0 += off_value;
            acc.policy_off.1 += 1;
            counts.policy_updates += 1;
            // The distributional critic gets several batch updates per
            // trust-region step.
            for _ in 0..10 {
                let indices: Vec<usize> = (0..config.minibatch.min(t_len))
                    .map(|_| data_rng.random_range(0..t_len))
                    .collect();
                let ce = run_ce_update(pair, critic_adam, batch, &ce_targets, &indices)?;
                acc.critic_ce.0 += ce;
                acc.critic_ce.1 += 1;
                counts.critic_ce_updates += 1;
                polyak_update(pair);
            }
        }
        Learner::Ppo | Learner::A2c => {
            let mut order: Vec<usize> = (0..t_len).collect();
            for _ in 0..config.epochs {
                // Fisher-Yates shuffle on the minibatch order.
                for i in (1..t_len).rev() {
                    let j = data_rng.random_range(0..=i);
                    order.swap(i, j);
                }
                for chunk in order.chunks(config.minibatch) {
                    let obs_mb: Vec<Vec<f64>> =
                        chunk.iter().map(|&i| batch.obs[i].clone()).collect();
                    let x_mb: Vec<Vec<f64>> =
                        chunk.iter().map(|&i| batch.actions_x[i].clone()).collect();
                    let lf_mb: Vec<f64> = chunk.iter().map(|&i| batch.log_f[i]).collect();
                    let adv_mb: Vec<f64> = chunk.iter().map(|&i| advantages[i]).collect();
                    let view = OnPolicyMinibatch {
                        observations: &obs_mb,
                        actions_x: &x_mb,
                        old_log_f: &lf_mb,
                        advantages: &adv_mb,
                    };
                    let off_states = if config.omega < 1.0 {
                        sample_replay_states(replay, config.minibatch, obs_norm, data_rng)?
                    } else {
                        Vec::new()
                    };
                    let (on_value, off_value) = combined_update(
                        policy_cfg,
                        policy,
                        policy_adam,
                        &pair.online,
                        residual,
                        &view,
                        &off_states,
                        config.action_samples,
                        critic_rng,
                    )?;
                    if !on_value.is_finite() || !off_value.is_finite() {
                        return Err(Error::NonFinite("policy surrogate".into()));
                    }
                    acc.policy_on.0 += on_value;
                    acc.policy_on.1 += 1;
                    acc.policy_off.0 += off_value;
                    acc.policy_off.1 += 1;
                    counts.policy_updates += 1;

                    let ce = run_ce_update(pair, critic_adam, batch, &ce_targets, chunk)?;
                    acc.critic_ce.0 += ce;
                    acc.critic_ce.1 += 1;
                    counts.critic_ce_updates += 1;
                    polyak_update(pair);
                }
            }
        }
    }
    Ok(())
}

fn run_ce_update(
    pair: &mut CriticPair,
    critic_adam: &mut AdamState,
    batch: &BatchStorage,
    ce_targets: &[Vec<f64>],
    indices: &[usize],
) -> Result<f64> {
    let items: Vec<CrossEntropyItem> = indices
        .iter()
        .map(|&i| CrossEntropyItem {
            state: batch.obs[i].clone(),
            action: batch.actions[i].clone(),
            targets: ce_targets[i].clone(),
        })
        .collect();
    let ce = cross_entropy_update(&mut pair.online, critic_adam, &items)?;
    if !ce.is_finite() {
        return Err(Error::NonFinite("critic cross-entropy loss".into()));
    }
    Ok(ce)
}

/// Evaluation protocol: fresh environment instance, the Beta mean action,
/// no exploration noise, no normalizer updates; raw episodic returns.
pub fn evaluate(
    policy: &BetaPolicy,
    obs_norm: &RunningNormalizer,
    env_name: &str,
    episodes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, Vec<f64>)> {
    let mut env = make_env(env_name)?;
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut obs = env.reset(rng);
        let mut total = 0.0;
        loop {
            let action = policy.mean_action(&obs_norm.normalize(&obs))?;
            let outcome = env.step(&action, rng)?;
            total += outcome.reward;
            if outcome.episode_over() {
                break;
            }
            obs = outcome.observation;
        }
        returns.push(total);
    }
    let mean = returns.iter().sum::<f64>() / episodes as f64;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / episodes as f64;
    Ok((mean, var.sqrt(), returns))
}

fn save_networks(
    dir: &Path,
    policy: &BetaPolicy,
    pair: &CriticPair,
    residual: &ResidualBaseline,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let write = |name: &str, spec, params: &ParamVector| -> Result<()> {
        let file = fs::File::create(dir.join(name))?;
        save_checkpoint(spec, params, BufWriter::new(file))
    };
    write("policy.ckpt", &policy.spec, &policy.params)?;
    write("critic.ckpt", &pair.online.spec, &pair.online.params)?;
    write("critic_target.ckpt", &pair.online.spec, &pair.target)?;
    write("baseline.ckpt", &residual.spec, &residual.params)?;
    Ok(())
}

pub(crate) fn load_params(path: &Path) -> Result<(Vec<usize>, ParamVector)> {
    let file = fs::File::open(path)?;
    let (dims, values) = load_checkpoint(BufReader::new(file))?;
    Ok((dims, ParamVector::from_values(values)))
}

fn write_batch_snapshot(path: &Path, rows: &[(Vec<f64>, Vec<f64>, f64, f64)]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let (obs_dim, act_dim) = rows
        .first()
        .map(|(o, x, _, _)| (o.len(), x.len()))
        .unwrap_or((0, 0));
    writeln!(out, "batch {} {} {}", rows.len(), obs_dim, act_dim)?;
    for (obs, x, q, b) in rows {
        let mut fields: Vec<String> = Vec::with_capacity(obs.len() + x.len() + 2);
        fields.extend(obs.iter().map(|v| v.to_string()));
        fields.extend(x.iter().map(|v| v.to_string()));
        fields.push(q.to_string());
        fields.push(b.to_string());
        writeln!(out, "{}", fields.join(" "))?;
    }
    Ok(())
}

pub(crate) fn read_batch_snapshot(
    path: &Path,
) -> Result<Vec<(Vec<f64>, Vec<f64>, f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty batch snapshot".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "batch" {
        return Err(Error::Parse("bad batch snapshot header".into()));
    }
    let n: usize = fields[1].parse().map_err(|_| Error::Parse("bad count".into()))?;
    let obs_dim: usize = fields[2].parse().map_err(|_| Error::Parse("bad obs dim".into()))?;
    let act_dim: usize = fields[3].parse().map_err(|_| Error::Parse("bad act dim".into()))?;
    let mut rows = Vec::with_capacity(n);
    for line in lines.take(n) {
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| Error::Parse("bad snapshot value".into())))
            .collect::<Result<_>>()?;
        if values.len() != obs_dim + act_dim + 2 {
            return Err(Error::Parse("bad snapshot row width".into()));
        }
        rows.push((
            values[..obs_dim].to_vec(),
            values[obs_dim..obs_dim + act_dim].to_vec(),
            values[obs_dim + act_dim],
            values[obs_dim + act_dim + 1],
        ));
    }
    Ok(rows)
}

fn write_replay_states(
    path: &Path,
    replay: &ReplayBuffer,
    obs_norm: &RunningNormalizer,
    n: usize,
    data_rng: &mut ChaCha8Rng,
) -> Result<()> {
    let states = if replay.is_empty() {
        Vec::new()
    } else {
        sample_replay_states(replay, n.min(replay.len()), obs_norm, data_rng)?
    };
    let mut out = BufWriter::new(fs::File::create(path)?);
    let dim = states.first().map(|s| s.len()).unwrap_or(0);
    writeln!(out, "states {} {}", states.len(), dim)?;
    for s in &states {
        let fields: Vec<String> = s.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", fields.join(" "))?;
    }
    Ok(())
}

pub(crate) fn read_replay_states(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty replay state file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "states" {
        return Err(Error::Parse("bad replay state header".into()));
    }
    let n: usize = fields[1].parse().map_err(|_| Error::Parse("bad count".into()))?;
    let dim: usize = fields[2].parse().map_err(|_| Error::Parse("bad dim".into()))?;
    let mut states = Vec::with_capacity(n);
    for line in lines.take(n) {
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| Error::Parse("bad state value".into())))
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::Parse("bad state row width".into()));
        }
        states.push(values);
    }
    Ok(states)
}
