//! Hybrid on/off-policy actor-critic reinforcement learning.
//!
//! This crate implements distillation policy optimization (DPO): an
//! actor-critic framework that feeds both fresh on-policy rollouts and
//! replayed off-policy experience into policy evaluation and policy
//! improvement. The moving parts are
//!
//! - a **unified advantage estimator** ([`estimators::uae`]) that accepts any
//!   state-dependent baseline and bootstraps through a state-action critic,
//!   with GAE as the exact special case `Q := V`, `b := V`;
//! - a **residual baseline** ([`baseline`]) `b(s) = E[(1 + r(s,a)) Q(s,a)]`
//!   trained entirely off-policy by a magnitude-free variance objective;
//! - a **Gaussian distributional critic** ([`critic`]) updated by an
//!   analytic KL step toward discounted target distributions during
//!   interaction and by cross-entropy toward advantage-derived sample
//!   targets at batch level;
//! - an **interpolated policy objective** ([`policy`]) mixing an on-policy
//!   surrogate (A2C, TRPO, or PPO) with an optimistic off-policy term that
//!   clamps negative advantages and carries an entropy bonus.
//!
//! The [`oracle`] module provides exact machinery on tabular MDPs (dense
//! Bellman solves, the closed-form optimal baseline, estimator-identity and
//! variance-theorem checks) that numerically verifies the estimator algebra
//! at desk scale, and [`trainer`] ties everything into a reproducible
//! training loop with replay buffer, evaluation protocol, and CSV metrics.
//!
//! See the crate examples for runnable entry points (`train_pointmass`,
//! `train_lqr`, `uae_vs_gae`, `verify_all`, ...) and the `dpo` binary for
//! the `train` / `verify` / `diagnose` command line.

pub mod baseline;
pub mod critic;
pub mod distributions;
pub mod environments;
pub mod error;
pub mod estimators;
pub mod funcapprox;
pub mod oracle;
pub mod policy;
pub mod replay;
pub mod trainer;

pub use error::{Error, Result};
