//! Run configuration: every training hyperparameter with its default,
//! plus the flat `key = value` file format used by the CLI. Unknown keys
//! are rejected; serialization round-trips exactly.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::policy::{Learner, PolicyConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: String,
    pub learner: Learner,
    pub total_steps: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub gamma: f64,
    pub lambda: f64,
    pub tau: f64,
    /// Policy interpolation weight (on-policy share).
    pub omega: f64,
    /// Advantage interpolation weight.
    pub nu: f64,
    /// Entropy temperature.
    pub alpha: f64,
    pub learning_rate: f64,
    pub replay_capacity: usize,
    /// Minibatch size for both replay and on-policy minibatches.
    pub minibatch: usize,
    /// Actions sampled per state for the baseline expectation.
    pub action_samples: usize,
    /// Critic samples per state-action when building target vectors.
    pub critic_samples: usize,
    /// On-policy batch length T.
    pub batch_size: usize,
    pub epochs: usize,
    pub baseline_updates: usize,
    pub ppo_clip: f64,
    pub trpo_max_kl: f64,
    pub trpo_damping: f64,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Hidden layer widths for every network.
    pub hidden: Vec<usize>,
    /// Replay size below which critic and baseline updates are skipped.
    pub warmup: usize,
}

impl RunConfig {
    /// Defaults for an environment/learner pair. The per-learner batch
    /// length, epoch count, and baseline update count follow the standard
    /// table: PPO (2048, 10, 12), A2C (256, 1, 4), TRPO (4096, 1, 12).
    pub fn defaults(env: impl Into<String>, learner: Learner) -> Self {
        let (batch_size, epochs, baseline_updates) = match learner {
            Learner::Ppo => (2048, 10, 12),
            Learner::A2c => (256, 1, 4),
            Learner::Trpo => (4096, 1, 12),
        };
        Self {
            env: env.into(),
            learner,
            total_steps: 100_000,
            seed: 0,
            out_dir: PathBuf::from("runs/default"),
            gamma: 0.99,
            lambda: 0.95,
            tau: 5e-3,
            omega: 0.7,
            nu: 0.3,
            alpha: 0.03,
            learning_rate: 3e-4,
            replay_capacity: 1_000_000,
            minibatch: 256,
            action_samples: 30,
            critic_samples: 25,
            batch_size,
            epochs,
            baseline_updates,
            ppo_clip: 0.2,
            trpo_max_kl: 0.1,
            trpo_damping: 0.1,
            eval_interval: 4096,
            eval_episodes: 10,
            hidden: vec![256, 256],
            warmup: 2500,
        }
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            omega: self.omega,
            alpha: self.alpha,
            learner: self.learner,
            ppo_clip: self.ppo_clip,
            trpo_max_kl: self.trpo_max_kl,
            trpo_damping: self.trpo_damping,
            epochs_per_batch: self.epochs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Argument(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        for (name, value) in [
            ("lambda", self.lambda),
            ("omega", self.omega),
            ("nu", self.nu),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Argument(format!("{name} {value} outside [0, 1]")));
            }
        }
        if !(0.0 < self.tau && self.tau <= 1.0) {
            return Err(Error::Argument(format!("tau {} outside (0, 1]", self.tau)));
        }
        if self.alpha < 0.0 {
            return Err(Error::Argument("alpha must be non-negative".into()));
        }
        for (name, value) in [
            ("total_steps", self.total_steps),
            ("replay_capacity", self.replay_capacity),
            ("minibatch", self.minibatch),
            ("action_samples", self.action_samples),
            ("critic_samples", self.critic_samples),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("eval_interval", self.eval_interval),
            ("eval_episodes", self.eval_episodes),
        ] {
            if value == 0 {
                return Err(Error::Argument(format!("{name} must be positive")));
            }
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::Argument("hidden widths must be positive".into()));
        }
        Ok(())
    }

    /// Serializes as `key = value` lines.
    pub fn to_text(&self) -> String {
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("env", self.env.clone());
        push("learner", self.learner.to_string());
        push("total_steps", self.total_steps.to_string());
        push("seed", self.seed.to_string());
        push("out_dir", self.out_dir.display().to_string());
        push("gamma", self.gamma.to_string());
        push("lambda", self.lambda.to_string());
        push("tau", self.tau.to_string());
        push("omega", self.omega.to_string());
        push("nu", self.nu.to_string());
        push("alpha", self.alpha.to_string());
        push("learning_rate", self.learning_rate.to_string());
        push("replay_capacity", self.replay_capacity.to_string());
        push("minibatch", self.minibatch.to_string());
        push("action_samples", self.action_samples.to_string());
        push("critic_samples", self.critic_samples.to_string());
        push("batch_size", self.batch_size.to_string());
        push("epochs", self.epochs.to_string());
        push("baseline_updates", self.baseline_updates.to_string());
        push("ppo_clip", self.ppo_clip.to_string());
        push("trpo_max_kl", self.trpo_max_kl.to_string());
        push("trpo_damping", self.trpo_damping.to_string());
        push("eval_interval", self.eval_interval.to_string());
        push("eval_episodes", self.eval_episodes.to_string());
        push("hidden", hidden.join(","));
        push("warmup", self.warmup.to_string());
        out
    }

    /// Parses `key = value` lines; `#` starts a comment. Every key must be
    /// known and every learner-dependent default is resolved first, so a
    /// partial file overrides the defaults for its learner.
    pub fn from_text(text: &str) -> Result<Self> {
        // Two passes: find env/learner first so defaults are right.
        let mut env = String::from("pointmass");
        let mut learner = Learner::Ppo;
        for line in text.lines() {
            if let Some((key, value)) = parse_line(line)? {
                match key.as_str() {
                    "env" => env = value,
                    "learner" => learner = Learner::from_str(&value)?,
                    _ => {}
                }
            }
        }
        let mut config = Self::defaults(env, learner);
        for line in text.lines() {
            let Some((key, value)) = parse_line(line)? else {
                continue;
            };
            match key.as_str() {
                "env" | "learner" => {}
                "total_steps" => config.total_steps = parse(&key, &value)?,
                "seed" => config.seed = parse(&key, &value)?,
                "out_dir" => config.out_dir = PathBuf::from(value),
                "gamma" => config.gamma = parse(&key, &value)?,
                "lambda" => config.lambda = parse(&key, &value)?,
                "tau" => config.tau = parse(&key, &value)?,
                "omega" => config.omega = parse(&key, &value)?,
                "nu" => config.nu = parse(&key, &value)?,
                "alpha" => config.alpha = parse(&key, &value)?,
                "learning_rate" => config.learning_rate = parse(&key, &value)?,
                "replay_capacity" => config.replay_capacity = parse(&key, &value)?,
                "minibatch" => config.minibatch = parse(&key, &value)?,
                "action_samples" => config.action_samples = parse(&key, &value)?,
                "critic_samples" => config.critic_samples = parse(&key, &value)?,
                "batch_size" => config.batch_size = parse(&key, &value)?,
                "epochs" => config.epochs = parse(&key, &value)?,
                "baseline_updates" => config.baseline_updates = parse(&key, &value)?,
                "ppo_clip" => config.ppo_clip = parse(&key, &value)?,
                "trpo_max_kl" => config.trpo_max_kl = parse(&key, &value)?,
                "trpo_damping" => config.trpo_damping = parse(&key, &value)?,
                "eval_interval" => config.eval_interval = parse(&key, &value)?,
                "eval_episodes" => config.eval_episodes = parse(&key, &value)?,
                "hidden" => {
                    config.hidden = value
                        .split(',')
                        .map(|h| parse::<usize>("hidden", h.trim()))
                        .collect::<Result<_>>()?;
                }
                "warmup" => config.warmup = parse(&key, &value)?,
                other => {
                    return Err(Error::Parse(format!("unknown config key '{other}'")));
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}

fn parse_line(line: &str) -> Result<Option<(String, String)>> {
    let stripped = line.split('#').next().unwrap_or("").trim();
    if stripped.is_empty() {
        return Ok(None);
    }
    let Some((key, value)) = stripped.split_once('=') else {
        return Err(Error::Parse(format!("expected 'key = value', got '{line}'")));
    };
    Ok(Some((key.trim().to_string(), value.trim().to_string())))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Parse(format!("bad value for '{key}': {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_hyperparameter_table() {
        let c = RunConfig::defaults("pointmass", Learner::Ppo);
        assert_eq!(c.gamma, 0.99);
        assert_eq!(c.lambda, 0.95);
        assert_eq!(c.tau, 5e-3);
        assert_eq!(c.omega, 0.7);
        assert_eq!(c.nu, 0.3);
        assert_eq!(c.alpha, 0.03);
        assert_eq!(c.learning_rate, 3e-4);
        assert_eq!(c.replay_capacity, 1_000_000);
        assert_eq!(c.minibatch, 256);
        assert_eq!(c.action_samples, 30);
        assert_eq!(c.critic_samples, 25);
        assert_eq!(c.batch_size, 2048);
        assert_eq!(c.epochs, 10);
        assert_eq!(c.baseline_updates, 12);
        assert_eq!(c.ppo_clip, 0.2);
        assert_eq!(c.eval_interval, 4096);
        assert_eq!(c.eval_episodes, 10);
        assert_eq!(c.hidden, vec![256, 256]);

        let a2c = RunConfig::defaults("pointmass", Learner::A2c);
        assert_eq!(
            (a2c.batch_size, a2c.epochs, a2c.baseline_updates),
            (256, 1, 4)
        );
        let trpo = RunConfig::defaults("pointmass", Learner::Trpo);
        assert_eq!(
            (trpo.batch_size, trpo.epochs, trpo.baseline_updates),
            (4096, 1, 12)
        );
        assert_eq!(trpo.trpo_max_kl, 0.1);
        assert_eq!(trpo.trpo_damping, 0.1);
    }

    #[test]
    fn config_round_trips_through_text() {
        let mut c = RunConfig::defaults("lqr1d", Learner::Trpo);
        c.seed = 17;
        c.total_steps = 12_345;
        c.hidden = vec![32, 16];
        c.learning_rate = 1.25e-4;
        c.out_dir = PathBuf::from("/tmp/some/run");
        let parsed = RunConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(c, parsed);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_text("env = pointmass\nmystery_knob = 3\n");
        assert!(matches!(err, Err(Error::Parse(_))));
    }

    #[test]
    fn comments_and_blank_lines_are_tolerated() {
        let text = "# a comment\n\nenv = pendulum\nseed = 9 # trailing\n";
        let c = RunConfig::from_text(text).unwrap();
        assert_eq!(c.env, "pendulum");
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn invalid_values_fail_validation() {
        assert!(RunConfig::from_text("gamma = 1.5\n").is_err());
        assert!(RunConfig::from_text("omega = -0.1\n").is_err());
        assert!(RunConfig::from_text("batch_size = 0\n").is_err());
    }
}
