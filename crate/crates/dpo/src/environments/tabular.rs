//! Finite state/action MDPs with dense transition and reward tables,
//! plain-text fixture serialization, and seeded random generation.

use std::fmt::Write as _;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};

/// An infinite-horizon discounted MDP `(P, r, gamma, rho0)` over
/// `n_states x n_actions`. Transition rows sum to one within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `P[s][a][s']` flattened as `(s * n_actions + a) * n_states + s'`.
    pub transition: Vec<f64>,
    /// `r[s][a]` flattened as `s * n_actions + a`.
    pub reward: Vec<f64>,
    pub gamma: f64,
    pub initial: Vec<f64>,
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        gamma: f64,
        initial: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::Argument("mdp needs states and actions".into()));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(Error::Dimension("transition tensor size mismatch".into()));
        }
        if reward.len() != n_states * n_actions {
            return Err(Error::Dimension("reward table size mismatch".into()));
        }
        if initial.len() != n_states {
            return Err(Error::Dimension("initial distribution size mismatch".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Argument(format!("gamma {gamma} outside [0, 1)")));
        }
        let mdp = Self {
            n_states,
            n_actions,
            transition,
            reward,
            gamma,
            initial,
        };
        for s in 0..n_states {
            for a in 0..n_actions {
                let total: f64 = mdp.transition_row(s, a).iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Argument(format!(
                        "P[{s}][{a}] sums to {total}, not 1"
                    )));
                }
            }
        }
        let rho: f64 = mdp.initial.iter().sum();
        if (rho - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("rho0 sums to {rho}, not 1")));
        }
        Ok(mdp)
    }

    #[inline]
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.transition[base..base + self.n_states]
    }

    #[inline]
    pub fn reward_at(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_categorical(&self.initial, rng)
    }

    pub fn sample_next<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> usize {
        sample_categorical(self.transition_row(s, a), rng)
    }

    /// Seeded random MDP: Dirichlet-like transition rows, rewards in
    /// `[-1, 1]`.
    pub fn random(n_states: usize, n_actions: usize, gamma: f64, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut transition = Vec::with_capacity(n_states * n_actions * n_states);
        for _ in 0..n_states * n_actions {
            let raw: Vec<f64> = (0..n_states)
                .map(|_| -(rng.random_range(1e-12..1.0f64)).ln())
                .collect();
            let total: f64 = raw.iter().sum();
            transition.extend(raw.iter().map(|x| x / total));
        }
        let reward: Vec<f64> = (0..n_states * n_actions)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let raw: Vec<f64> = (0..n_states)
            .map(|_| -(rng.random_range(1e-12..1.0f64)).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let initial = raw.iter().map(|x| x / total).collect();
        Self::new(n_states, n_actions, transition, reward, gamma, initial)
            .expect("generated rows are normalized")
    }

    /// Serializes as `tabular <S> <A> <gamma>` followed by `P`, `r`, and
    /// `rho` rows. Values round-trip exactly through [`Self::parse`].
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tabular {} {} {}", self.n_states, self.n_actions, self.gamma);
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row: Vec<String> =
                    self.transition_row(s, a).iter().map(|p| p.to_string()).collect();
                let _ = writeln!(out, "P {s} {a} {}", row.join(" "));
            }
        }
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let _ = writeln!(out, "r {s} {a} {}", self.reward_at(s, a));
            }
        }
        let rho: Vec<String> = self.initial.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "rho {}", rho.join(" "));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty mdp fixture".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("tabular") {
            return Err(Error::Parse("fixture header must start with 'tabular'".into()));
        }
        let n_states: usize = parse_field(fields.next(), "n_states")?;
        let n_actions: usize = parse_field(fields.next(), "n_actions")?;
        let gamma: f64 = parse_field(fields.next(), "gamma")?;

        let mut transition = vec![f64::NAN; n_states * n_actions * n_states];
        let mut reward = vec![f64::NAN; n_states * n_actions];
        let mut initial = vec![f64::NAN; n_states];
        for line in lines {
            let mut fields = line.split_whitespace();
            match fields.next() {
                Some("P") => {
                    let s: usize = parse_field(fields.next(), "P state")?;
                    let a: usize = parse_field(fields.next(), "P action")?;
                    for sp in 0..n_states {
                        let p: f64 = parse_field(fields.next(), "P entry")?;
                        transition[(s * n_actions + a) * n_states + sp] = p;
                    }
                }
                Some("r") => {
                    let s: usize = parse_field(fields.next(), "r state")?;
                    let a: usize = parse_field(fields.next(), "r action")?;
                    reward[s * n_actions + a] = parse_field(fields.next(), "r value")?;
                }
                Some("rho") => {
                    for s in 0..n_states {
                        initial[s] = parse_field(fields.next(), "rho entry")?;
                    }
                }
                Some(other) => {
                    return Err(Error::Parse(format!("unknown fixture row '{other}'")));
                }
                None => {}
            }
        }
        if transition.iter().any(|p| p.is_nan())
            || reward.iter().any(|r| r.is_nan())
            || initial.iter().any(|p| p.is_nan())
        {
            return Err(Error::Parse("fixture is missing rows".into()));
        }
        Self::new(n_states, n_actions, transition, reward, gamma, initial)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = field.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    raw.parse()
        .map_err(|e| Error::Parse(format!("bad {what} '{raw}': {e}")))
}

pub(crate) fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Samples one episode of at most `horizon` steps under a tabular stochastic
/// policy given as row-major `pi[s][a]` probabilities.
pub fn mdp_sample_episode(
    mdp: &TabularMdp,
    policy: &[f64],
    horizon: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<(usize, usize, f64)>> {
    if policy.len() != mdp.n_states * mdp.n_actions {
        return Err(Error::Dimension("policy table size mismatch".into()));
    }
    for s in 0..mdp.n_states {
        let row = &policy[s * mdp.n_actions..(s + 1) * mdp.n_actions];
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
            return Err(Error::Argument(format!("policy row {s} is not a distribution")));
        }
    }
    let mut trajectory = Vec::with_capacity(horizon);
    let mut s = mdp.sample_initial(rng);
    for _ in 0..horizon {
        let a = sample_categorical(&policy[s * mdp.n_actions..(s + 1) * mdp.n_actions], rng);
        let r = mdp.reward_at(s, a);
        trajectory.push((s, a, r));
        s = mdp.sample_next(s, a, rng);
    }
    Ok(trajectory)
}
