//! Probability primitives: Gaussian value distributions with analytic KL and
//! log-density, Beta action distributions for bounded continuous control, and
//! the linear action-bound transformation with its log-likelihood correction.

use rand::Rng;
use rand_distr::Distribution;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::funcapprox::softplus;

/// Lower bound on every Gaussian stddev in the crate. Discounted targets
/// contract the target stddev geometrically toward zero; the floor keeps the
/// KL objective finite and Lipschitz on visited data.
pub const SIGMA_FLOOR: f64 = 1e-3;

/// Clip width for untransformed actions: Beta log-densities diverge at the
/// interval endpoints, so replayed boundary actions are pulled inside.
pub const ACTION_CLIP: f64 = 1e-6;

const LN_2PI: f64 = 1.8378770664093453;

/// A Gaussian value distribution `(mean, stddev)` in return units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianValue {
    pub mean: f64,
    pub stddev: f64,
}

impl GaussianValue {
    pub fn new(mean: f64, stddev: f64) -> Result<Self> {
        if !mean.is_finite() || !stddev.is_finite() {
            return Err(Error::NonFinite("gaussian parameters".into()));
        }
        if stddev < SIGMA_FLOOR {
            return Err(Error::Argument(format!(
                "stddev {stddev} below floor {SIGMA_FLOOR}"
            )));
        }
        Ok(Self { mean, stddev })
    }

    /// One Gaussian draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(rng);
        self.mean + self.stddev * z
    }
}

/// `KL(target || model)` between two Gaussians:
/// `log(s2/s1) + (s1^2 + (m1 - m2)^2) / (2 s2^2) - 1/2`.
pub fn gaussian_kl(target: GaussianValue, model: GaussianValue) -> Result<f64> {
    for g in [&target, &model] {
        if !g.mean.is_finite() || !g.stddev.is_finite() {
            return Err(Error::NonFinite("gaussian_kl input".into()));
        }
        if g.stddev < SIGMA_FLOOR {
            return Err(Error::Argument(format!(
                "gaussian_kl stddev {} below floor",
                g.stddev
            )));
        }
    }
    let (m1, s1) = (target.mean, target.stddev);
    let (m2, s2) = (model.mean, model.stddev);
    let dm = m1 - m2;
    Ok((s2 / s1).ln() + (s1 * s1 + dm * dm) / (2.0 * s2 * s2) - 0.5)
}

/// Log density of `x` under a Gaussian.
pub fn gaussian_log_density(x: f64, dist: GaussianValue) -> f64 {
    let z = (x - dist.mean) / dist.stddev;
    -dist.stddev.ln() - 0.5 * LN_2PI - 0.5 * z * z
}

/// Per-dimension Beta shape parameters; the `softplus(v) + 1` head keeps
/// every shape in `[1, inf)` so the density is unimodal.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl BetaParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::Dimension("alpha/beta lengths differ".into()));
        }
        if alpha.iter().chain(beta.iter()).any(|&s| !(s >= 1.0) || !s.is_finite()) {
            return Err(Error::Argument("beta shapes must be finite and >= 1".into()));
        }
        Ok(Self { alpha, beta })
    }

    /// Maps raw network outputs `[a_raw.., b_raw..]` through `softplus + 1`.
    pub fn from_network_output(raw: &[f64]) -> Result<Self> {
        if raw.len() % 2 != 0 {
            return Err(Error::Dimension(
                "beta head needs an even number of outputs".into(),
            ));
        }
        let dim = raw.len() / 2;
        let alpha = raw[..dim].iter().map(|&v| softplus(v) + 1.0).collect();
        let beta = raw[dim..].iter().map(|&v| softplus(v) + 1.0).collect();
        Self::new(alpha, beta)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Per-dimension mean `alpha / (alpha + beta)`.
    pub fn mean(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| a / (a + b))
            .collect()
    }

    /// Differential entropy, summed over dimensions.
    pub fn entropy(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| {
                ln_beta(a, b) - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b)
                    + (a + b - 2.0) * digamma(a + b)
            })
            .sum()
    }
}

#[inline]
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn clip_unit(x: f64) -> f64 {
    x.clamp(ACTION_CLIP, 1.0 - ACTION_CLIP)
}

/// Log density of a unit-interval vector under independent Beta marginals.
/// Inputs are clipped into `(ACTION_CLIP, 1 - ACTION_CLIP)`; values outside
/// `[0, 1]` are an error.
pub fn beta_log_density(x: &[f64], params: &BetaParams) -> Result<f64> {
    if x.len() != params.dim() {
        return Err(Error::Dimension(format!(
            "x length {} != action dim {}",
            x.len(),
            params.dim()
        )));
    }
    let mut total = 0.0;
    for ((&xi, &a), &b) in x.iter().zip(&params.alpha).zip(&params.beta) {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::Argument(format!("x = {xi} outside [0, 1]")));
        }
        let xc = clip_unit(xi);
        total += (a - 1.0) * xc.ln() + (b - 1.0) * (1.0 - xc).ln() - ln_beta(a, b);
    }
    Ok(total)
}

/// Gradient of [`beta_log_density`] with respect to the shape parameters:
/// `d/da = ln x - psi(a) + psi(a+b)`, `d/db = ln(1-x) - psi(b) + psi(a+b)`.
pub fn beta_log_density_grad(x: &[f64], params: &BetaParams) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != params.dim() {
        return Err(Error::Dimension("x length != action dim".into()));
    }
    let mut da = Vec::with_capacity(x.len());
    let mut db = Vec::with_capacity(x.len());
    for ((&xi, &a), &b) in x.iter().zip(&params.alpha).zip(&params.beta) {
        let xc = clip_unit(xi);
        let psi_ab = digamma(a + b);
        da.push(xc.ln() - digamma(a) + psi_ab);
        db.push((1.0 - xc).ln() - digamma(b) + psi_ab);
    }
    Ok((da, db))
}

/// `KL(p || q)` between two independent-marginal Beta vectors.
pub fn beta_kl(p: &BetaParams, q: &BetaParams) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension("beta_kl dims differ".into()));
    }
    let mut total = 0.0;
    for i in 0..p.dim() {
        let (a1, b1) = (p.alpha[i], p.beta[i]);
        let (a2, b2) = (q.alpha[i], q.beta[i]);
        total += ln_beta(a2, b2) - ln_beta(a1, b1)
            + (a1 - a2) * digamma(a1)
            + (b1 - b2) * digamma(b1)
            + (a2 - a1 + b2 - b1) * digamma(a1 + b1);
    }
    Ok(total)
}

/// Draws one unit-interval action vector, one independent Beta per dimension.
pub fn sample_beta<R: Rng + ?Sized>(params: &BetaParams, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.dim());
    sample_beta_into(params, rng, &mut out);
    out
}

/// Allocation-free variant of [`sample_beta`] writing into `out`.
pub fn sample_beta_into<R: Rng + ?Sized>(params: &BetaParams, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    out.extend(params.alpha.iter().zip(&params.beta).map(|(&a, &b)| {
        rand_distr::Beta::new(a, b)
            .expect("shapes >= 1 are valid")
            .sample(rng)
    }));
}

/// Allocation-free variant of [`transform_action`] writing into `out`;
/// skips the unit-cube check for trusted sampler output.
pub(crate) fn transform_action_into(x: &[f64], bounds: &ActionBounds, out: &mut Vec<f64>) {
    out.clear();
    out.extend(
        x.iter()
            .zip(bounds.lower.iter().zip(&bounds.upper))
            .map(|(&xi, (&m, &mm))| xi * (mm - m) + m),
    );
}

/// Per-dimension action interval `[lower, upper]` with `upper > lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ActionBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension("bound lengths differ".into()));
        }
        for (&m, &mm) in lower.iter().zip(&upper) {
            if !(mm > m) || !m.is_finite() || !mm.is_finite() {
                return Err(Error::Argument(format!("invalid bound [{m}, {mm}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Symmetric bounds `[-half_width, +half_width]^dim`.
    pub fn symmetric(half_width: f64, dim: usize) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Per-dimension scale `k = upper - lower`.
    pub fn scale(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(&mm, &m)| mm - m)
            .collect()
    }

    /// `sum_i log k_i`, the log-volume of the box relative to the unit cube.
    pub fn log_scale_sum(&self) -> f64 {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(&mm, &m)| (mm - m).ln())
            .sum()
    }

    pub fn contains(&self, action: &[f64], tol: f64) -> bool {
        action.len() == self.dim()
            && action.iter().zip(self.lower.iter().zip(&self.upper)).all(
                |(&a, (&m, &mm))| {
                    let k = mm - m;
                    a >= m - tol * k && a <= mm + tol * k
                },
            )
    }
}

/// Maps a unit-cube sample to the bounded action box: `a = x * k + m`. The
/// returned correction is `-sum log k`, so that
/// `log pi(a|s) = beta_log_density(x) + correction`.
pub fn transform_action(x: &[f64], bounds: &ActionBounds) -> Result<(Vec<f64>, f64)> {
    if x.len() != bounds.dim() {
        return Err(Error::Dimension("x length != bound dim".into()));
    }
    if x.iter().any(|&xi| !(0.0..=1.0).contains(&xi)) {
        return Err(Error::Argument("x outside unit hypercube".into()));
    }
    let action = x
        .iter()
        .zip(bounds.lower.iter().zip(&bounds.upper))
        .map(|(&xi, (&m, &mm))| xi * (mm - m) + m)
        .collect();
    Ok((action, -bounds.log_scale_sum()))
}

/// Inverse of [`transform_action`]: `x = (a - m) / k`, clipped into
/// `(ACTION_CLIP, 1 - ACTION_CLIP)`. Actions outside the bounds beyond a
/// relative tolerance of 1e-9 are an error.
pub fn untransform_action(action: &[f64], bounds: &ActionBounds) -> Result<Vec<f64>> {
    if action.len() != bounds.dim() {
        return Err(Error::Dimension("action length != bound dim".into()));
    }
    if !bounds.contains(action, 1e-9) {
        return Err(Error::Argument(format!(
            "action {action:?} outside bounds"
        )));
    }
    Ok(action
        .iter()
        .zip(bounds.lower.iter().zip(&bounds.upper))
        .map(|(&a, (&m, &mm))| clip_unit((a - m) / (mm - m)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kl_of_identical_distributions_is_zero() {
        let g = GaussianValue::new(1.3, 0.6).unwrap();
        assert_eq!(gaussian_kl(g, g).unwrap(), 0.0);
    }

    #[test]
    fn kl_closed_form_mean_shift() {
        let p = GaussianValue::new(1.0, 1.0).unwrap();
        let q = GaussianValue::new(0.0, 1.0).unwrap();
        assert!((gaussian_kl(p, q).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kl_matches_monte_carlo_estimate() {
        // KL(N(0,1) || N(0.3, 0.7)) via 1e6 samples of log p - log q.
        let p = GaussianValue::new(0.0, 1.0).unwrap();
        let q = GaussianValue::new(0.3, 0.7).unwrap();
        let analytic = gaussian_kl(p, q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = p.sample(&mut rng);
            let d = gaussian_log_density(x, p) - gaussian_log_density(x, q);
            sum += d;
            sum_sq += d * d;
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - analytic).abs() < 3.0 * se,
            "MC {mean} vs analytic {analytic} (se {se})"
        );
    }

    #[test]
    fn kl_rejects_non_finite_and_floored_inputs() {
        let g = GaussianValue { mean: f64::NAN, stddev: 1.0 };
        let ok = GaussianValue::new(0.0, 1.0).unwrap();
        assert!(gaussian_kl(g, ok).is_err());
        let tiny = GaussianValue { mean: 0.0, stddev: 1e-6 };
        assert!(gaussian_kl(tiny, ok).is_err());
    }

    #[test]
    fn kl_is_nonnegative_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let p = GaussianValue::new(rng.random_range(-5.0..5.0), rng.random_range(0.01..3.0))
                .unwrap();
            let q = GaussianValue::new(rng.random_range(-5.0..5.0), rng.random_range(0.01..3.0))
                .unwrap();
            assert!(gaussian_kl(p, q).unwrap() >= 0.0);
        }
    }

    #[test]
    fn log_density_at_mode_and_one_sigma() {
        let g = GaussianValue::new(2.0, 1.0).unwrap();
        let mode = gaussian_log_density(2.0, g);
        assert!((mode - (-0.9189385332046727)).abs() < 1e-12);
        let off = gaussian_log_density(3.0, g);
        assert!((off - (mode - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn log_density_normalizes_under_quadrature() {
        // The exponentiated density must match a quadrature-normalized
        // version of itself pointwise.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let mu = rng.random_range(-2.0..2.0);
            let sigma = rng.random_range(0.3..2.0);
            let g = GaussianValue::new(mu, sigma).unwrap();
            let lo = mu - 12.0 * sigma;
            let hi = mu + 12.0 * sigma;
            let n = 200_001;
            let h = (hi - lo) / (n - 1) as f64;
            let mut integral = 0.0;
            for i in 0..n {
                let x = lo + i as f64 * h;
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                integral += w * gaussian_log_density(x, g).exp();
            }
            integral *= h;
            let x = rng.random_range(mu - 2.0 * sigma..mu + 2.0 * sigma);
            let raw = gaussian_log_density(x, g).exp();
            let normalized = raw / integral;
            assert!((raw - normalized).abs() < 1e-10, "integral {integral}");
        }
    }

    #[test]
    fn beta_uniform_density_is_zero_log() {
        let p = BetaParams::new(vec![1.0], vec![1.0]).unwrap();
        for &x in &[0.0, 0.2, 0.77, 1.0] {
            assert!(beta_log_density(&[x], &p).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn beta_2_2_density_at_half() {
        // Beta(2,2) density at 0.5 is Gamma(4)/(Gamma(2)^2) * 0.25 = 1.5.
        let p = BetaParams::new(vec![2.0], vec![2.0]).unwrap();
        let ld = beta_log_density(&[0.5], &p).unwrap();
        assert!((ld - 1.5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn beta_density_integrates_to_one() {
        let p = BetaParams::new(vec![2.3], vec![4.7]).unwrap();
        let n = 100_000;
        let h = 1.0 / n as f64;
        let mut integral = 0.0;
        for i in 0..=n {
            let x = (i as f64 * h).clamp(1e-9, 1.0 - 1e-9);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            integral += w * beta_log_density(&[x], &p).unwrap().exp();
        }
        integral *= h;
        assert!((integral - 1.0).abs() < 1e-4, "integral {integral}");
    }

    #[test]
    fn beta_log_density_rejects_out_of_range() {
        let p = BetaParams::new(vec![2.0], vec![2.0]).unwrap();
        assert!(beta_log_density(&[-0.1], &p).is_err());
        assert!(beta_log_density(&[1.1], &p).is_err());
    }

    #[test]
    fn beta_shape_head_is_at_least_one() {
        let raw = [-300.0, -5.0, 0.0, 2.0, 400.0, -1.0];
        let p = BetaParams::from_network_output(&raw).unwrap();
        assert!(p.alpha.iter().chain(p.beta.iter()).all(|&s| s >= 1.0));
    }

    #[test]
    fn sample_beta_uniform_case() {
        let p = BetaParams::new(vec![1.0], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 100_000;
        let mut samples: Vec<f64> = (0..n).map(|_| sample_beta(&p, &mut rng)[0]).collect();
        let mean: f64 = samples.iter().sum::<f64>() / n as f64;
        // Uniform mean 0.5, sd of the mean = 1/sqrt(12 n).
        assert!((mean - 0.5).abs() < 3.0 / (12.0 * n as f64).sqrt());
        // Kolmogorov-Smirnov against the uniform CDF at the 1% level.
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, &x) in samples.iter().enumerate() {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((x - lo).abs()).max((x - hi).abs());
        }
        let critical = 1.63 / (n as f64).sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }

    #[test]
    fn sample_beta_concentrates_near_one() {
        let p = BetaParams::new(vec![100.0], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let below = (0..10_000)
            .filter(|_| sample_beta(&p, &mut rng)[0] <= 0.9)
            .count();
        // P(X <= 0.9) = 0.9^100 ~ 2.7e-5; essentially none of 1e4 draws.
        assert!(below <= 2, "{below} draws at or below 0.9");
    }

    #[test]
    fn sample_beta_moment_check() {
        let p = BetaParams::new(vec![2.0], vec![5.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_beta(&p, &mut rng)[0]).sum::<f64>() / n as f64;
        let expected = 2.0 / 7.0;
        let var = expected * (1.0 - expected) / 8.0; // a*b/((a+b)^2 (a+b+1))
        let se = (var / n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se);
    }

    #[test]
    fn transform_identity_and_symmetric_cases() {
        let unit = ActionBounds::new(vec![0.0], vec![1.0]).unwrap();
        let (a, corr) = transform_action(&[0.42], &unit).unwrap();
        assert_eq!(a, vec![0.42]);
        assert_eq!(corr, 0.0);

        let sym = ActionBounds::symmetric(2.0, 1).unwrap();
        let (a, corr) = transform_action(&[0.5], &sym).unwrap();
        assert_eq!(a, vec![0.0]);
        assert!((corr - (-(4.0f64).ln())).abs() < 1e-15);
    }

    #[test]
    fn untransform_round_trips() {
        let bounds = ActionBounds::new(vec![-2.0, 0.5], vec![2.0, 3.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = vec![rng.random_range(0.01..0.99), rng.random_range(0.01..0.99)];
            let (a, _) = transform_action(&x, &bounds).unwrap();
            let back = untransform_action(&a, &bounds).unwrap();
            for (xi, bi) in x.iter().zip(&back) {
                assert!((xi - bi).abs() < 1e-12);
            }
            // And forward again onto the action.
            let (a2, _) = transform_action(&back, &bounds).unwrap();
            for (ai, bi) in a.iter().zip(&a2) {
                assert!((ai - bi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn untransform_clips_boundary_actions() {
        let bounds = ActionBounds::new(vec![-1.0], vec![1.0]).unwrap();
        let x = untransform_action(&[-1.0], &bounds).unwrap();
        assert_eq!(x, vec![ACTION_CLIP]);
        assert!(untransform_action(&[1.5], &bounds).is_err());
    }

    #[test]
    fn log_likelihood_difference_is_bound_invariant() {
        // For two parameter settings, log pi~(a) - log pi(a) must equal
        // log f~(x) - log f(x) exactly: the bound correction cancels.
        let bounds = ActionBounds::new(vec![-2.0, -0.3], vec![2.0, 1.9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let p1 = BetaParams::new(
                vec![rng.random_range(1.0..6.0), rng.random_range(1.0..6.0)],
                vec![rng.random_range(1.0..6.0), rng.random_range(1.0..6.0)],
            )
            .unwrap();
            let p2 = BetaParams::new(
                vec![rng.random_range(1.0..6.0), rng.random_range(1.0..6.0)],
                vec![rng.random_range(1.0..6.0), rng.random_range(1.0..6.0)],
            )
            .unwrap();
            let x = sample_beta(&p1, &mut rng);
            let (_, corr) = transform_action(&x, &bounds).unwrap();
            let lf1 = beta_log_density(&x, &p1).unwrap();
            let lf2 = beta_log_density(&x, &p2).unwrap();
            let lpi1 = lf1 + corr;
            let lpi2 = lf2 + corr;
            assert!(((lpi2 - lpi1) - (lf2 - lf1)).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_mse_equivalence_for_fixed_equal_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let sigma = rng.random_range(0.05..3.0);
            let m1 = rng.random_range(-4.0..4.0);
            let m2 = rng.random_range(-4.0..4.0);
            let kl = gaussian_kl(
                GaussianValue::new(m1, sigma).unwrap(),
                GaussianValue::new(m2, sigma).unwrap(),
            )
            .unwrap();
            let mse_form = (m1 - m2) * (m1 - m2) / (2.0 * sigma * sigma);
            assert!((kl - mse_form).abs() <= 1e-12 * mse_form.abs().max(1.0));
        }
    }

    #[test]
    fn beta_kl_is_zero_on_self_and_positive_otherwise() {
        let p = BetaParams::new(vec![2.0, 3.0], vec![4.0, 1.5]).unwrap();
        assert!(beta_kl(&p, &p).unwrap().abs() < 1e-12);
        let q = BetaParams::new(vec![2.5, 3.0], vec![4.0, 1.5]).unwrap();
        assert!(beta_kl(&p, &q).unwrap() > 0.0);
    }

    #[test]
    fn beta_entropy_matches_uniform() {
        // Beta(1,1) is uniform on [0,1]: entropy 0.
        let p = BetaParams::new(vec![1.0], vec![1.0]).unwrap();
        assert!(p.entropy().abs() < 1e-12);
    }
}
