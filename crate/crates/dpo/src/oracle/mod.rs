//! Ground-truth machinery on tabular MDPs: exact action values via dense
//! linear solves, the closed-form variance-optimal baseline, exact
//! distributional sweeps with their contraction factors, and the stability
//! metrics used by the diagnostics command.
//!
//! Everything here is deliberately independent of the function-approximation
//! path: it is the reference the learned components are checked against.

mod checks;
pub mod fixtures;

pub use checks::{
    variance_decomposition, verify_proposition1, verify_theorem1, Bootstrap, RolloutSource,
    Theorem1Check,
};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::environments::TabularMdp;
use crate::error::{Error, Result};

/// Softmax policy over a finite MDP. The score `u(s, a) = d log pi / d
/// logits` is available in closed form: the indicator minus the
/// probabilities, supported on the row of state `s`.
#[derive(Debug, Clone)]
pub struct TabularSoftmaxPolicy {
    pub n_states: usize,
    pub n_actions: usize,
    /// Row-major `logits[s][a]`.
    pub logits: Vec<f64>,
}

impl TabularSoftmaxPolicy {
    pub fn new(n_states: usize, n_actions: usize, logits: Vec<f64>) -> Result<Self> {
        if logits.len() != n_states * n_actions {
            return Err(Error::Dimension("logit table size mismatch".into()));
        }
        Ok(Self {
            n_states,
            n_actions,
            logits,
        })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            logits: vec![0.0; n_states * n_actions],
        }
    }

    pub fn random(n_states: usize, n_actions: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let logits = (0..n_states * n_actions)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Self {
            n_states,
            n_actions,
            logits,
        }
    }

    pub fn probs(&self, s: usize) -> Vec<f64> {
        let row = &self.logits[s * self.n_actions..(s + 1) * self.n_actions];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }

    /// Row-major `pi[s][a]` table.
    pub fn prob_table(&self) -> Vec<f64> {
        let mut table = Vec::with_capacity(self.n_states * self.n_actions);
        for s in 0..self.n_states {
            table.extend(self.probs(s));
        }
        table
    }

    pub fn sample_action<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        let probs = self.probs(s);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        self.n_actions - 1
    }

    /// Full-parameter score vector `d log pi(a|s) / d logits`, laid out as
    /// the logit table. Only the row of `s` is nonzero.
    pub fn score(&self, s: usize, a: usize) -> Vec<f64> {
        let mut u = vec![0.0; self.n_states * self.n_actions];
        let probs = self.probs(s);
        for (ap, &p) in probs.iter().enumerate() {
            u[s * self.n_actions + ap] = if ap == a { 1.0 - p } else { -p };
        }
        u
    }

    /// `|u(s, a)|^2` in closed form.
    pub fn score_sq_norm(&self, s: usize, a: usize) -> f64 {
        let probs = self.probs(s);
        let mut norm = 0.0;
        for (ap, &p) in probs.iter().enumerate() {
            let c = if ap == a { 1.0 - p } else { -p };
            norm += c * c;
        }
        norm
    }
}

/// Exact quantities for a fixed policy: `Q[s][a]`, `V[s]`, and the
/// unnormalized discounted state visitation weights.
#[derive(Debug, Clone)]
pub struct ExactValues {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub visitation: Vec<f64>,
}

impl ExactValues {
    pub fn q_at(&self, mdp: &TabularMdp, s: usize, a: usize) -> f64 {
        self.q[s * mdp.n_actions + a]
    }

    /// Normalized discounted state-action distribution
    /// `d(s, a) = visitation(s) * pi(a|s) / sum`.
    pub fn joint_weights(&self, policy: &TabularSoftmaxPolicy) -> Vec<f64> {
        let total: f64 = self.visitation.iter().sum();
        let mut weights = Vec::with_capacity(self.visitation.len() * policy.n_actions);
        for s in 0..policy.n_states {
            let probs = policy.probs(s);
            for &p in &probs {
                weights.push(self.visitation[s] / total * p);
            }
        }
        weights
    }
}

/// State-action transition matrix `M[(s,a),(s',a')] = P(s'|s,a) pi(a'|s')`.
pub(crate) fn joint_transition_matrix(
    mdp: &TabularMdp,
    policy: &TabularSoftmaxPolicy,
) -> DMatrix<f64> {
    let n = mdp.n_states * mdp.n_actions;
    let pi = policy.prob_table();
    let mut m = DMatrix::zeros(n, n);
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let row = s * mdp.n_actions + a;
            let p = mdp.transition_row(s, a);
            for sp in 0..mdp.n_states {
                for ap in 0..mdp.n_actions {
                    m[(row, sp * mdp.n_actions + ap)] = p[sp] * pi[sp * mdp.n_actions + ap];
                }
            }
        }
    }
    m
}

/// Solves the Bellman system exactly: `(I - gamma M) Q = r` by dense LU,
/// with `V = sum_a pi Q` and the visitation weights
/// `rho = rho0 + gamma P_pi^T rho`.
pub fn solve_q(mdp: &TabularMdp, policy: &TabularSoftmaxPolicy) -> Result<ExactValues> {
    if policy.n_states != mdp.n_states || policy.n_actions != mdp.n_actions {
        return Err(Error::Dimension("policy does not match mdp".into()));
    }
    let n = mdp.n_states * mdp.n_actions;
    let m = joint_transition_matrix(mdp, policy);
    let system = DMatrix::identity(n, n) - m * mdp.gamma;
    let rhs = DVector::from_column_slice(&mdp.reward);
    let q = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("Bellman system is singular".into()))?;

    let pi = policy.prob_table();
    let mut v = vec![0.0; mdp.n_states];
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            v[s] += pi[s * mdp.n_actions + a] * q[s * mdp.n_actions + a];
        }
    }

    // State-level transition under the policy.
    let mut p_pi = DMatrix::zeros(mdp.n_states, mdp.n_states);
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let w = pi[s * mdp.n_actions + a];
            for (sp, &p) in mdp.transition_row(s, a).iter().enumerate() {
                p_pi[(s, sp)] += w * p;
            }
        }
    }
    let visit_system = DMatrix::identity(mdp.n_states, mdp.n_states) - p_pi.transpose() * mdp.gamma;
    let rho = visit_system
        .lu()
        .solve(&DVector::from_column_slice(&mdp.initial))
        .ok_or_else(|| Error::Degenerate("visitation system is singular".into()))?;

    Ok(ExactValues {
        q: q.iter().copied().collect(),
        v,
        visitation: rho.iter().copied().collect(),
    })
}

/// Largest Bellman residual `|Q - (r + gamma P V)|` of an exact solution.
pub fn bellman_residual(mdp: &TabularMdp, policy: &TabularSoftmaxPolicy, exact: &ExactValues) -> f64 {
    let mut worst: f64 = 0.0;
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let mut backup = mdp.reward_at(s, a);
            for (sp, &p) in mdp.transition_row(s, a).iter().enumerate() {
                backup += mdp.gamma * p * exact.v[sp];
            }
            worst = worst.max((exact.q_at(mdp, s, a) - backup).abs());
        }
    }
    let _ = policy;
    worst
}

/// Closed-form variance-optimal baseline
/// `b*(s) = E[|u|^2 Q | s] / E[|u|^2 | s]`. Degenerate (near-deterministic)
/// policies make the denominator vanish and are an error.
pub fn optimal_baseline(
    mdp: &TabularMdp,
    policy: &TabularSoftmaxPolicy,
    exact: &ExactValues,
    s: usize,
) -> Result<f64> {
    let probs = policy.probs(s);
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (a, &p) in probs.iter().enumerate() {
        let w = p * policy.score_sq_norm(s, a);
        numerator += w * exact.q_at(mdp, s, a);
        denominator += w;
    }
    if denominator < 1e-12 {
        return Err(Error::Degenerate(format!(
            "optimal baseline undefined at state {s}: policy is deterministic"
        )));
    }
    Ok(numerator / denominator)
}

/// Exact per-state variance of the one-point gradient estimate
/// `u(s, a) (Q(s, a) - b)` under `a ~ pi(.|s)`.
pub fn per_state_gradient_variance(
    mdp: &TabularMdp,
    policy: &TabularSoftmaxPolicy,
    exact: &ExactValues,
    s: usize,
    b: f64,
) -> f64 {
    let probs = policy.probs(s);
    let dim = policy.n_states * policy.n_actions;
    let mut second_moment = 0.0;
    let mut mean = vec![0.0; dim];
    for (a, &p) in probs.iter().enumerate() {
        let adv = exact.q_at(mdp, s, a) - b;
        second_moment += p * policy.score_sq_norm(s, a) * adv * adv;
        let u = policy.score(s, a);
        for (mi, ui) in mean.iter_mut().zip(&u) {
            *mi += p * ui * adv;
        }
    }
    let mean_sq: f64 = mean.iter().map(|m| m * m).sum();
    second_moment - mean_sq
}

/// One exact distributional sweep on `(mean, variance)` tables:
/// `mean' = r + gamma E[mean]`, `var' = gamma^2 E[var]`, expectations over
/// `s' ~ P(.|s, a)`, `a' ~ pi(.|s')`.
pub fn exact_sweep(
    mdp: &TabularMdp,
    policy: &TabularSoftmaxPolicy,
    means: &[f64],
    variances: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = mdp.n_states * mdp.n_actions;
    debug_assert_eq!(means.len(), n);
    debug_assert_eq!(variances.len(), n);
    let pi = policy.prob_table();
    let mut new_means = vec![0.0; n];
    let mut new_vars = vec![0.0; n];
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let idx = s * mdp.n_actions + a;
            let mut em = 0.0;
            let mut ev = 0.0;
            for (sp, &p) in mdp.transition_row(s, a).iter().enumerate() {
                for ap in 0..mdp.n_actions {
                    let w = p * pi[sp * mdp.n_actions + ap];
                    em += w * means[sp * mdp.n_actions + ap];
                    ev += w * variances[sp * mdp.n_actions + ap];
                }
            }
            new_means[idx] = mdp.reward_at(s, a) + mdp.gamma * em;
            new_vars[idx] = mdp.gamma * mdp.gamma * ev;
        }
    }
    (new_means, new_vars)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Per-pair contraction factors of one exact sweep applied to two random
/// `(mean, var)` tables: `(|Tm1 - Tm2| / |m1 - m2|, |Tv1 - Tv2| / |v1 - v2|)`.
pub fn contraction_factors<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    policy: &TabularSoftmaxPolicy,
    pairs: usize,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let n = mdp.n_states * mdp.n_actions;
    let mut out = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let m1: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let m2: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let v1: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let v2: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let (tm1, tv1) = exact_sweep(mdp, policy, &m1, &v1);
        let (tm2, tv2) = exact_sweep(mdp, policy, &m2, &v2);
        let mean_ratio = linf(&tm1, &tm2) / linf(&m1, &m2).max(1e-300);
        let var_ratio = linf(&tv1, &tv2) / linf(&v1, &v2).max(1e-300);
        out.push((mean_ratio, var_ratio));
    }
    out
}

/// Stability diagnostics over parameter snapshots and a loss series:
/// the variance of consecutive parameter deltas and the mean absolute
/// adjacent difference of the losses.
pub fn stability_metrics(snapshots: &[Vec<f64>], losses: &[f64]) -> Result<(f64, f64)> {
    if snapshots.len() < 2 {
        return Err(Error::Argument("need at least 2 parameter snapshots".into()));
    }
    if losses.len() < 2 {
        return Err(Error::Argument("need at least 2 loss points".into()));
    }
    let dim = snapshots[0].len();
    let deltas: Vec<Vec<f64>> = snapshots
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| b - a).collect())
        .collect();
    let mut mean_delta = vec![0.0; dim];
    for d in &deltas {
        for (m, x) in mean_delta.iter_mut().zip(d) {
            *m += x / deltas.len() as f64;
        }
    }
    let vpu = deltas
        .iter()
        .map(|d| {
            d.iter()
                .zip(&mean_delta)
                .map(|(x, m)| (x - m) * (x - m))
                .sum::<f64>()
        })
        .sum::<f64>()
        / deltas.len() as f64;

    let tv = losses
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .sum::<f64>()
        / (losses.len() - 1) as f64;
    Ok((vpu, tv))
}

/// One line of a verification report.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn bounded(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        let pass = statistic.is_finite() && statistic <= threshold;
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass,
        }
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:60} statistic={:<12.6e} threshold={:<10.3e} {}",
            self.name,
            self.statistic,
            self.threshold,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}
