//! Post-run diagnostics over a training output directory: parameter-update
//! variance from the checkpoint series, total variation of the normalized
//! critic losses, on/off-policy gradient-variance estimates, the mean
//! residual magnitude, and the mean clamped advantage.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baseline::{baseline_value, ResidualBaseline};
use crate::critic::GaussianCritic;
use crate::environments::make_env;
use crate::error::{Error, Result};
use crate::funcapprox::{Activation, MlpSpec};
use crate::oracle::stability_metrics;
use crate::policy::BetaPolicy;

use super::metrics::read_metrics;
use super::{load_params, read_batch_snapshot, read_replay_states, RunConfig};

/// Named diagnostic values, written as `metric,value` CSV.
#[derive(Debug, Clone)]
pub struct DiagnoseReport {
    pub values: Vec<(String, f64)>,
}

impl DiagnoseReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for (name, value) in &self.values {
            let _ = writeln!(out, "{name},{value}");
        }
        out
    }
}

fn spec_from_dims(dims: &[usize]) -> Result<MlpSpec> {
    if dims.len() < 2 {
        return Err(Error::Parse("checkpoint has too few dims".into()));
    }
    MlpSpec::new(
        dims[0],
        dims[1..dims.len() - 1].to_vec(),
        dims[dims.len() - 1],
        Activation::Tanh,
        Activation::Identity,
    )
}

fn normalized_tv(series: &[f64]) -> f64 {
    if series.len() < 2 {
        return 0.0;
    }
    let n = series.len() as f64;
    let mean: f64 = series.iter().sum::<f64>() / n;
    let var: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-300 {
        return 0.0;
    }
    let normalized: Vec<f64> = series.iter().map(|x| (x - mean) / std).collect();
    normalized.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (series.len() - 1) as f64
}

/// Computes the diagnostics for a finished run directory and writes
/// `diagnostics.csv` next to the metrics file.
pub fn diagnose(run_dir: &Path) -> Result<DiagnoseReport> {
    let config = RunConfig::from_file(&run_dir.join("config.txt"))?;
    let env = make_env(&config.env)?;
    let bounds = env.bounds().clone();

    // Policy-update variance over the checkpoint series.
    let checkpoints_dir = run_dir.join("checkpoints");
    let mut steps: Vec<std::path::PathBuf> = std::fs::read_dir(&checkpoints_dir)
        .map(|dir| {
            dir.filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect()
        })
        .unwrap_or_default();
    steps.sort();
    let mut snapshots = Vec::with_capacity(steps.len());
    for dir in &steps {
        let (_, params) = load_params(&dir.join("policy.ckpt"))?;
        snapshots.push(params.values);
    }
    let vpu = if snapshots.len() >= 2 {
        stability_metrics(&snapshots, &[0.0, 0.0])?.0
    } else {
        0.0
    };

    // Total variation of the normalized critic losses.
    let rows = read_metrics(&run_dir.join("metrics.csv"))?;
    let ce_series: Vec<f64> = rows.iter().map(|r| r.critic_ce).collect();
    let kl_series: Vec<f64> = rows.iter().map(|r| r.critic_kl).collect();
    let tv_ce = normalized_tv(&ce_series);
    let tv_kl = normalized_tv(&kl_series);

    // Final networks.
    let final_dir = run_dir.join("final");
    let (policy_dims, policy_params) = load_params(&final_dir.join("policy.ckpt"))?;
    let policy = BetaPolicy {
        spec: spec_from_dims(&policy_dims)?,
        params: policy_params,
        bounds,
    };
    let (critic_dims, critic_params) = load_params(&final_dir.join("critic.ckpt"))?;
    let obs_dim = policy.spec.input_dim;
    let critic = GaussianCritic {
        spec: spec_from_dims(&critic_dims)?,
        params: critic_params,
        state_dim: obs_dim,
        action_dim: policy.action_dim(),
    };
    let (baseline_dims, baseline_params) = load_params(&final_dir.join("baseline.ckpt"))?;
    let residual = ResidualBaseline {
        spec: spec_from_dims(&baseline_dims)?,
        params: baseline_params,
        state_dim: obs_dim,
        action_dim: policy.action_dim(),
    };

    // On-policy gradient-variance estimate from the saved batch:
    // mean |u|^2 (Q - b)^2 over the stored rows.
    let batch = read_batch_snapshot(&final_dir.join("final_batch.txt"))?;
    let mut score = Vec::new();
    let mut on_policy_variance = 0.0;
    if !batch.is_empty() {
        for (obs, x, q, b) in &batch {
            policy.score_vector(obs, x, &mut score)?;
            let u_sq: f64 = score.iter().map(|u| u * u).sum();
            let gap = q - b;
            on_policy_variance += u_sq * gap * gap / batch.len() as f64;
        }
    }

    // Off-policy estimate over saved replay states with fresh actions.
    let states = read_replay_states(&final_dir.join("replay_states.txt"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(0xD1A6);
    let mut off_policy_variance = 0.0;
    let mut mean_abs_residual = 0.0;
    let mut mean_pos_adv = 0.0;
    if !states.is_empty() {
        for state in &states {
            let sampled = policy.sample_action(state, &mut rng)?;
            let q = critic.forward(state, &sampled.action)?.mean;
            let b = baseline_value(
                &residual,
                &critic,
                &policy,
                state,
                config.action_samples,
                &mut rng,
            )?;
            policy.score_vector(state, &sampled.x, &mut score)?;
            let u_sq: f64 = score.iter().map(|u| u * u).sum();
            let n = states.len() as f64;
            off_policy_variance += u_sq * (q - b) * (q - b) / n;
            mean_abs_residual += residual.residual(state, &sampled.action)?.abs() / n;
            mean_pos_adv += (q - b).max(0.0) / n;
        }
    }

    let report = DiagnoseReport {
        values: vec![
            ("vpu_policy".into(), vpu),
            ("tv_critic_ce".into(), tv_ce),
            ("tv_critic_kl".into(), tv_kl),
            ("on_policy_gradient_variance".into(), on_policy_variance),
            ("off_policy_gradient_variance".into(), off_policy_variance),
            ("mean_abs_residual".into(), mean_abs_residual),
            ("mean_pos_adv".into(), mean_pos_adv),
        ],
    };
    std::fs::write(run_dir.join("diagnostics.csv"), report.to_csv())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::{train, RunConfig};
    use super::*;
    use crate::policy::Learner;

    #[test]
    fn diagnose_runs_on_a_short_training_output() {
        let mut config = RunConfig::defaults("lqr1d", Learner::Ppo);
        config.total_steps = 200;
        config.batch_size = 64;
        config.minibatch = 16;
        config.eval_interval = 100;
        config.eval_episodes = 1;
        config.hidden = vec![6, 6];
        config.warmup = 40;
        config.action_samples = 3;
        config.critic_samples = 4;
        config.epochs = 1;
        config.baseline_updates = 1;
        config.out_dir = std::env::temp_dir().join("dpo_diagnose_test");
        std::fs::remove_dir_all(&config.out_dir).ok();
        train(&config).unwrap();
        let report = diagnose(&config.out_dir).unwrap();
        for (name, value) in &report.values {
            assert!(value.is_finite(), "{name} not finite");
        }
        assert!(report.get("on_policy_gradient_variance").unwrap() >= 0.0);
        assert!(config.out_dir.join("diagnostics.csv").exists());
        // Recomputing is deterministic.
        let again = diagnose(&config.out_dir).unwrap();
        assert_eq!(report.values, again.values);
        std::fs::remove_dir_all(&config.out_dir).ok();
    }

    #[test]
    fn missing_artifacts_error() {
        let dir = std::env::temp_dir().join("dpo_diagnose_missing");
        std::fs::create_dir_all(&dir).unwrap();
        assert!(diagnose(&dir).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn constant_series_have_zero_variation() {
        assert_eq!(normalized_tv(&[2.0, 2.0, 2.0]), 0.0);
        assert_eq!(normalized_tv(&[1.0]), 0.0);
        // The raw total-variation example lives in the oracle metrics; the
        // normalized form used here scales [0,1,0,1] to +-1 alternation.
        assert!((normalized_tv(&[0.0, 1.0, 0.0, 1.0]) - 2.0).abs() < 1e-12);
    }
}
