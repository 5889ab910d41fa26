//! Seeded fixture MDPs for the verification suites, stored as plain-text
//! tables so failing checks are reproducible from the files alone.

use crate::environments::TabularMdp;
use crate::error::Result;

use super::TabularSoftmaxPolicy;

/// `(name, n_states, n_actions, gamma, generator seed)` per fixture.
pub const FIXTURE_SPECS: [(&str, usize, usize, f64, u64); 3] = [
    ("mdp_a", 3, 2, 0.8, 101),
    ("mdp_b", 4, 3, 0.7, 202),
    ("mdp_c", 5, 2, 0.85, 303),
];

const FIXTURE_TEXTS: [(&str, &str); 3] = [
    ("mdp_a", include_str!("../../fixtures/mdp_a.txt")),
    ("mdp_b", include_str!("../../fixtures/mdp_b.txt")),
    ("mdp_c", include_str!("../../fixtures/mdp_c.txt")),
];

/// Loads the embedded fixtures.
pub fn fixture_mdps() -> Result<Vec<(String, TabularMdp)>> {
    FIXTURE_TEXTS
        .iter()
        .map(|(name, text)| Ok((name.to_string(), TabularMdp::parse(text)?)))
        .collect()
}

/// The softmax policy paired with a fixture (seeded off the fixture seed).
pub fn fixture_policy(name: &str, mdp: &TabularMdp) -> TabularSoftmaxPolicy {
    let seed = FIXTURE_SPECS
        .iter()
        .find(|(n, ..)| *n == name)
        .map(|&(_, _, _, _, s)| s)
        .unwrap_or(0);
    TabularSoftmaxPolicy::random(mdp.n_states, mdp.n_actions, seed + 1)
}

/// An arbitrary (but fixed) state-dependent baseline table for a fixture.
pub fn fixture_baseline(name: &str, mdp: &TabularMdp) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let seed = FIXTURE_SPECS
        .iter()
        .find(|(n, ..)| *n == name)
        .map(|&(_, _, _, _, s)| s)
        .unwrap_or(0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 2);
    (0..mdp.n_states).map(|_| rng.random_range(-1.0..1.0)).collect()
}
