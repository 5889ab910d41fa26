//! Minimal differentiable function approximation: dense multilayer
//! perceptrons with reverse-mode gradients and an adaptive-moment optimizer.
//!
//! Everything is 64-bit and allocation-light. Parameters live in a flat
//! [`ParamVector`] (values plus a gradient accumulator of equal length);
//! layer `l` occupies a contiguous slice `[W_l | b_l]` with `W_l` stored
//! row-major `(out, in)`. Backward recomputes activations instead of keeping
//! a tape, which is plenty at the network sizes used here.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};

/// Element-wise activation applied after a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Softplus,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Softplus => softplus(x),
            Activation::Identity => x,
        }
    }

    /// Derivative evaluated at the pre-activation `x`.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Softplus => sigmoid(x),
            Activation::Identity => 1.0,
        }
    }
}

/// Numerically stable `log(1 + exp(x))`.
///
/// For x > 0 the direct form overflows around 710; branch on sign so the
/// exponent argument is always non-positive.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Shape of a dense network: layer widths and one activation per layer
/// (hidden layers first, output layer last).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub activations: Vec<Activation>,
}

impl MlpSpec {
    /// Builds a spec with the given hidden activations and an output
    /// activation; errors on zero widths or an activation-count mismatch.
    pub fn new(
        input_dim: usize,
        hidden_dims: Vec<usize>,
        output_dim: usize,
        hidden_activation: Activation,
        output_activation: Activation,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden_dims.iter().any(|&d| d == 0) {
            return Err(Error::Argument("mlp dims must be positive".into()));
        }
        let mut activations = vec![hidden_activation; hidden_dims.len()];
        activations.push(output_activation);
        Ok(Self {
            input_dim,
            hidden_dims,
            output_dim,
            activations,
        })
    }

    /// Default architecture: two tanh hidden layers of 256 units and a
    /// linear output head.
    pub fn defaults(input_dim: usize, output_dim: usize) -> Self {
        Self::new(
            input_dim,
            vec![256, 256],
            output_dim,
            Activation::Tanh,
            Activation::Identity,
        )
        .expect("default spec is valid")
    }

    /// `(fan_in, fan_out)` per layer, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut fan_in = self.input_dim;
        for &h in &self.hidden_dims {
            dims.push((fan_in, h));
            fan_in = h;
        }
        dims.push((fan_in, self.output_dim));
        dims
    }

    /// Total parameter count: sum of `(fan_in + 1) * fan_out` over layers.
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|&(i, o)| (i + 1) * o)
            .sum()
    }

    pub fn all_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(self.output_dim);
        dims
    }
}

/// Flat parameter storage for any approximator, paired with a gradient
/// accumulator of identical length.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub grads: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            grads: vec![0.0; len],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        let grads = vec![0.0; values.len()];
        Self { values, grads }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grads {
            *g = 0.0;
        }
    }

    /// Flips the gradient sign in place; used to drive the minimizing
    /// optimizer in ascent direction.
    pub fn negate_grads(&mut self) {
        for g in &mut self.grads {
            *g = -*g;
        }
    }

    pub fn grad_norm(&self) -> f64 {
        self.grads.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{context}: parameter values")));
        }
        if self.grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("{context}: gradients")));
        }
        Ok(())
    }
}

/// Seeded uniform init in `[-1/sqrt(fan_in), +1/sqrt(fan_in)]` for both
/// weights and biases.
pub fn init_params<R: Rng + ?Sized>(spec: &MlpSpec, rng: &mut R) -> ParamVector {
    let mut values = Vec::with_capacity(spec.param_count());
    for (fan_in, fan_out) in spec.layer_dims() {
        let limit = 1.0 / (fan_in as f64).sqrt();
        for _ in 0..fan_out * fan_in + fan_out {
            values.push(rng.random_range(-limit..limit));
        }
    }
    ParamVector::from_values(values)
}

/// Reusable buffers for forward/backward passes. One scratch per
/// minibatch loop keeps the hot path allocation-free.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    /// Post-activation of layer l (acts[0] is the input copy).
    acts: Vec<Vec<f64>>,
    /// Pre-activation of layer l.
    pres: Vec<Vec<f64>>,
    /// Backward delta buffers.
    deltas: Vec<Vec<f64>>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, spec: &MlpSpec) {
        let dims = spec.all_dims();
        let layers = dims.len() - 1;
        resize_bufs(&mut self.acts, &dims);
        let out_dims = &dims[1..];
        resize_bufs_from(&mut self.pres, out_dims, layers);
        resize_bufs_from(&mut self.deltas, out_dims, layers);
    }

    /// Output of the most recent forward pass.
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("forward pass recorded")
    }
}

fn resize_bufs(bufs: &mut Vec<Vec<f64>>, dims: &[usize]) {
    bufs.resize_with(dims.len(), Vec::new);
    for (buf, &d) in bufs.iter_mut().zip(dims) {
        buf.resize(d, 0.0);
    }
}

fn resize_bufs_from(bufs: &mut Vec<Vec<f64>>, dims: &[usize], n: usize) {
    bufs.resize_with(n, Vec::new);
    for (buf, &d) in bufs.iter_mut().zip(dims) {
        buf.resize(d, 0.0);
    }
}

fn check_dims(spec: &MlpSpec, params_len: usize, input_len: usize) -> Result<()> {
    if input_len != spec.input_dim {
        return Err(Error::Dimension(format!(
            "input length {} != input_dim {}",
            input_len, spec.input_dim
        )));
    }
    if params_len != spec.param_count() {
        return Err(Error::Dimension(format!(
            "param length {} != expected {}",
            params_len,
            spec.param_count()
        )));
    }
    Ok(())
}

/// Forward pass writing activations into `scratch`; the output lives in
/// `scratch.output()` afterwards.
pub fn forward_with(
    spec: &MlpSpec,
    values: &[f64],
    input: &[f64],
    scratch: &mut Scratch,
) -> Result<()> {
    check_dims(spec, values.len(), input.len())?;
    scratch.prepare(spec);
    scratch.acts[0].copy_from_slice(input);
    let mut offset = 0;
    for (l, (fan_in, fan_out)) in spec.layer_dims().into_iter().enumerate() {
        let (w, b) = layer_slices(values, offset, fan_in, fan_out);
        let activation = spec.activations[l];
        // Split borrows: acts[l] is read, acts[l+1] written.
        let (head, tail) = scratch.acts.split_at_mut(l + 1);
        let x = head[l].as_slice();
        let out = &mut tail[0];
        let pre = &mut scratch.pres[l];
        for o in 0..fan_out {
            let row = &w[o * fan_in..(o + 1) * fan_in];
            let mut acc = b[o];
            for (wi, xi) in row.iter().zip(x) {
                acc += wi * xi;
            }
            pre[o] = acc;
            out[o] = activation.apply(acc);
        }
        offset += (fan_in + 1) * fan_out;
    }
    Ok(())
}

/// Reverse pass. Recomputes the forward activations, accumulates
/// `d(output . output_grad)/d(params)` into `grads`, and returns the
/// gradient with respect to the input for chaining. `values` and `grads`
/// are the two halves of a [`ParamVector`], split so callers can borrow
/// them disjointly.
pub fn backward_with(
    spec: &MlpSpec,
    values: &[f64],
    grads: &mut [f64],
    input: &[f64],
    output_grad: &[f64],
    scratch: &mut Scratch,
) -> Result<Vec<f64>> {
    if output_grad.len() != spec.output_dim {
        return Err(Error::Dimension(format!(
            "output_grad length {} != output_dim {}",
            output_grad.len(),
            spec.output_dim
        )));
    }
    if grads.len() != values.len() {
        return Err(Error::Dimension("grads length != values length".into()));
    }
    forward_with(spec, values, input, scratch)?;

    let layer_dims = spec.layer_dims();
    let n_layers = layer_dims.len();
    let mut offsets = Vec::with_capacity(n_layers);
    let mut offset = 0;
    for &(fan_in, fan_out) in &layer_dims {
        offsets.push(offset);
        offset += (fan_in + 1) * fan_out;
    }

    // delta = dLoss/d(pre-activation) per layer, seeded from output_grad.
    {
        let last = n_layers - 1;
        let act = spec.activations[last];
        let pre = &scratch.pres[last];
        let delta = &mut scratch.deltas[last];
        for o in 0..spec.output_dim {
            delta[o] = output_grad[o] * act.derivative(pre[o]);
        }
    }

    for l in (0..n_layers).rev() {
        let (fan_in, fan_out) = layer_dims[l];
        let base = offsets[l];
        // Accumulate weight and bias gradients for this layer.
        {
            let x = &scratch.acts[l];
            let delta = &scratch.deltas[l];
            for o in 0..fan_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let wrow = &mut grads[base + o * fan_in..base + (o + 1) * fan_in];
                for (g, xi) in wrow.iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
            let bias_base = base + fan_in * fan_out;
            for o in 0..fan_out {
                grads[bias_base + o] += delta[o];
            }
        }
        // Propagate to the previous layer (or to the input when l == 0).
        if l > 0 {
            let (prev_dims, prev_act) = (layer_dims[l - 1].1, spec.activations[l - 1]);
            debug_assert_eq!(prev_dims, fan_in);
            let (before, after) = scratch.deltas.split_at_mut(l);
            let prev_delta = &mut before[l - 1];
            let delta = &after[0];
            let w = &values[base..base + fan_in * fan_out];
            let pre_prev = &scratch.pres[l - 1];
            for i in 0..fan_in {
                let mut acc = 0.0;
                for o in 0..fan_out {
                    acc += w[o * fan_in + i] * delta[o];
                }
                prev_delta[i] = acc * prev_act.derivative(pre_prev[i]);
            }
        }
    }

    // Input gradient.
    let (fan_in, fan_out) = layer_dims[0];
    let w = &values[offsets[0]..offsets[0] + fan_in * fan_out];
    let delta = &scratch.deltas[0];
    let mut input_grad = vec![0.0; fan_in];
    for (i, gi) in input_grad.iter_mut().enumerate() {
        let mut acc = 0.0;
        for o in 0..fan_out {
            acc += w[o * fan_in + i] * delta[o];
        }
        *gi = acc;
    }
    Ok(input_grad)
}

#[inline]
fn layer_slices(values: &[f64], offset: usize, fan_in: usize, fan_out: usize) -> (&[f64], &[f64]) {
    let w_end = offset + fan_in * fan_out;
    (&values[offset..w_end], &values[w_end..w_end + fan_out])
}

/// Reverse pass that accumulates parameter gradients only, skipping the
/// input-gradient matvec and its allocation; the workhorse of the
/// minibatch loops.
pub(crate) fn backward_params(
    spec: &MlpSpec,
    values: &[f64],
    grads: &mut [f64],
    input: &[f64],
    output_grad: &[f64],
    scratch: &mut Scratch,
) -> Result<()> {
    if output_grad.len() != spec.output_dim {
        return Err(Error::Dimension(format!(
            "output_grad length {} != output_dim {}",
            output_grad.len(),
            spec.output_dim
        )));
    }
    if grads.len() != values.len() {
        return Err(Error::Dimension("grads length != values length".into()));
    }
    forward_with(spec, values, input, scratch)?;

    let layer_dims = spec.layer_dims();
    let n_layers = layer_dims.len();
    let mut offsets = Vec::with_capacity(n_layers);
    let mut offset = 0;
    for &(fan_in, fan_out) in &layer_dims {
        offsets.push(offset);
        offset += (fan_in + 1) * fan_out;
    }
    {
        let last = n_layers - 1;
        let act = spec.activations[last];
        let pre = &scratch.pres[last];
        let delta = &mut scratch.deltas[last];
        for o in 0..spec.output_dim {
            delta[o] = output_grad[o] * act.derivative(pre[o]);
        }
    }
    for l in (0..n_layers).rev() {
        let (fan_in, fan_out) = layer_dims[l];
        let base = offsets[l];
        {
            let x = &scratch.acts[l];
            let delta = &scratch.deltas[l];
            for o in 0..fan_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let wrow = &mut grads[base + o * fan_in..base + (o + 1) * fan_in];
                for (g, xi) in wrow.iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
            let bias_base = base + fan_in * fan_out;
            for o in 0..fan_out {
                grads[bias_base + o] += delta[o];
            }
        }
        if l > 0 {
            let prev_act = spec.activations[l - 1];
            let (before, after) = scratch.deltas.split_at_mut(l);
            let prev_delta = &mut before[l - 1];
            let delta = &after[0];
            let w = &values[base..base + fan_in * fan_out];
            let pre_prev = &scratch.pres[l - 1];
            for i in 0..fan_in {
                let mut acc = 0.0;
                for o in 0..fan_out {
                    acc += w[o * fan_in + i] * delta[o];
                }
                prev_delta[i] = acc * prev_act.derivative(pre_prev[i]);
            }
        }
    }
    Ok(())
}

/// Forward pass; deterministic for fixed `(params, input)`.
pub fn forward(spec: &MlpSpec, params: &ParamVector, input: &[f64]) -> Result<Vec<f64>> {
    let mut scratch = Scratch::new();
    forward_with(spec, &params.values, input, &mut scratch)?;
    Ok(scratch.output().to_vec())
}

/// Accumulates the gradient contribution of `output . output_grad` into
/// `params.grads` and returns the input gradient.
pub fn backward(
    spec: &MlpSpec,
    params: &mut ParamVector,
    input: &[f64],
    output_grad: &[f64],
) -> Result<Vec<f64>> {
    let mut scratch = Scratch::new();
    let ParamVector { values, grads } = params;
    backward_with(spec, values, grads, input, output_grad, &mut scratch)
}

/// Adaptive-moment optimizer state.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(param_len: usize, learning_rate: f64) -> Self {
        Self {
            first_moment: vec![0.0; param_len],
            second_moment: vec![0.0; param_len],
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected adaptive-moment update; gradients are cleared after
/// the step.
pub fn adam_step(params: &mut ParamVector, state: &mut AdamState) -> Result<()> {
    if state.first_moment.len() != params.len() {
        return Err(Error::Dimension(format!(
            "adam state length {} != param length {}",
            state.first_moment.len(),
            params.len()
        )));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for i in 0..params.len() {
        let g = params.grads[i];
        let m = &mut state.first_moment[i];
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        let v = &mut state.second_moment[i];
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        params.values[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    params.zero_grads();
    params.check_finite("adam_step")
}

/// Writes `mlp <input_dim> <hidden...> <output_dim>` followed by parameter
/// values in layer order, one per line. The shortest round-trip decimal
/// form is used, so load recovers values bit-exactly.
pub fn save_checkpoint<W: Write>(spec: &MlpSpec, params: &ParamVector, mut out: W) -> Result<()> {
    let dims: Vec<String> = spec.all_dims().iter().map(|d| d.to_string()).collect();
    writeln!(out, "mlp {}", dims.join(" "))?;
    for v in &params.values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// Reads a checkpoint written by [`save_checkpoint`]; returns the layer
/// widths from the header and the flat parameter values.
pub fn load_checkpoint<R: BufRead>(input: R) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty checkpoint".into()))??;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("mlp") {
        return Err(Error::Parse("checkpoint header must start with 'mlp'".into()));
    }
    let dims: Vec<usize> = fields
        .map(|f| {
            f.parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad dimension '{f}': {e}")))
        })
        .collect::<Result<_>>()?;
    if dims.len() < 2 {
        return Err(Error::Parse("checkpoint header needs at least two dims".into()));
    }
    let mut values = Vec::new();
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        values.push(
            trimmed
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad value '{trimmed}': {e}")))?,
        );
    }
    Ok((dims, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_spec() -> MlpSpec {
        MlpSpec::new(3, vec![5, 4], 2, Activation::Tanh, Activation::Identity).unwrap()
    }

    #[test]
    fn param_count_matches_layer_sums() {
        let spec = small_spec();
        assert_eq!(spec.param_count(), (3 + 1) * 5 + (5 + 1) * 4 + (4 + 1) * 2);
        let d = MlpSpec::defaults(4, 2);
        assert_eq!(d.hidden_dims, vec![256, 256]);
        assert_eq!(d.activations[0], Activation::Tanh);
        assert_eq!(d.param_count(), 5 * 256 + 257 * 256 + 257 * 2);
    }

    #[test]
    fn zero_weight_network_maps_to_zero() {
        let spec = small_spec();
        let params = ParamVector::zeros(spec.param_count());
        let out = forward(&spec, &params, &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn single_linear_layer_is_affine() {
        // W = [[2]], b = [1], input [3] -> [7].
        let spec = MlpSpec::new(1, vec![], 1, Activation::Tanh, Activation::Identity).unwrap();
        let params = ParamVector::from_values(vec![2.0, 1.0]);
        let out = forward(&spec, &params, &[3.0]).unwrap();
        assert_eq!(out, vec![7.0]);
    }

    #[test]
    fn forward_matches_naive_matmul_oracle() {
        let spec = MlpSpec::new(4, vec![6, 5], 3, Activation::Tanh, Activation::Softplus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = init_params(&spec, &mut rng);
        let input: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();

        // Independent dense evaluation, written without the layer-slice helpers.
        let naive = {
            let mut x = input.clone();
            let mut pos = 0usize;
            let mut fan_in = 4usize;
            for (li, &width) in [6usize, 5, 3].iter().enumerate() {
                let mut y = vec![0.0; width];
                for (o, yo) in y.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..fan_in {
                        acc += params.values[pos + o * fan_in + i] * x[i];
                    }
                    acc += params.values[pos + width * fan_in + o];
                    *yo = if li < 2 { acc.tanh() } else { softplus(acc) };
                }
                pos += width * fan_in + width;
                fan_in = width;
                x = y;
            }
            x
        };

        let out = forward(&spec, &params, &input).unwrap();
        for (a, b) in out.iter().zip(&naive) {
            assert!((a - b).abs() < 1e-12, "forward {a} vs oracle {b}");
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let spec = small_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = init_params(&spec, &mut rng);
        let input = [0.3, -0.7, 1.1];
        let a = forward(&spec, &params, &input).unwrap();
        let b = forward(&spec, &params, &input).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let spec = small_spec();
        let params = ParamVector::zeros(spec.param_count());
        assert!(matches!(
            forward(&spec, &params, &[1.0]),
            Err(Error::Dimension(_))
        ));
        let short = ParamVector::zeros(3);
        assert!(matches!(
            forward(&spec, &short, &[1.0, 2.0, 3.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn single_layer_backward_gradients() {
        // y = w*x + b with output_grad 1: dW = x = 3, db = 1.
        let spec = MlpSpec::new(1, vec![], 1, Activation::Tanh, Activation::Identity).unwrap();
        let mut params = ParamVector::from_values(vec![2.0, 1.0]);
        let input_grad = backward(&spec, &mut params, &[3.0], &[1.0]).unwrap();
        assert_eq!(params.grads, vec![3.0, 1.0]);
        assert_eq!(input_grad, vec![2.0]);
    }

    #[test]
    fn zero_output_grad_contributes_nothing() {
        let spec = small_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut params = init_params(&spec, &mut rng);
        backward(&spec, &mut params, &[0.4, 0.1, -0.9], &[0.0, 0.0]).unwrap();
        assert!(params.grads.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn backward_matches_central_finite_differences() {
        let spec = MlpSpec::new(3, vec![6, 5], 2, Activation::Tanh, Activation::Softplus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut params = init_params(&spec, &mut rng);
        let input = [0.5, -0.3, 0.8];
        let output_grad = [0.7, -1.3];

        backward(&spec, &mut params, &input, &output_grad).unwrap();
        let analytic = params.grads.clone();

        let h = 1e-5;
        for i in 0..params.len() {
            let orig = params.values[i];
            params.values[i] = orig + h;
            let up: f64 = forward(&spec, &params, &input)
                .unwrap()
                .iter()
                .zip(&output_grad)
                .map(|(o, g)| o * g)
                .sum();
            params.values[i] = orig - h;
            let down: f64 = forward(&spec, &params, &input)
                .unwrap()
                .iter()
                .zip(&output_grad)
                .map(|(o, g)| o * g)
                .sum();
            params.values[i] = orig;
            let fd = (up - down) / (2.0 * h);
            let denom = analytic[i].abs().max(fd.abs()).max(1e-8);
            assert!(
                (analytic[i] - fd).abs() / denom < 1e-4,
                "param {i}: analytic {} vs fd {fd}",
                analytic[i]
            );
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let spec = small_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut params = init_params(&spec, &mut rng);
        let input = [0.2, 0.9, -0.4];
        let output_grad = [1.0, 0.5];
        let analytic = backward(&spec, &mut params, &input, &output_grad).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut up_in = input;
            up_in[i] += h;
            let mut down_in = input;
            down_in[i] -= h;
            let f = |x: &[f64]| -> f64 {
                forward(&spec, &params, x)
                    .unwrap()
                    .iter()
                    .zip(&output_grad)
                    .map(|(o, g)| o * g)
                    .sum()
            };
            let fd = (f(&up_in) - f(&down_in)) / (2.0 * h);
            assert!((analytic[i] - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn adam_zero_gradient_is_a_fixed_point() {
        let mut params = ParamVector::from_values(vec![1.0, -2.0]);
        let mut state = AdamState::new(2, 1e-3);
        adam_step(&mut params, &mut state).unwrap();
        assert_eq!(params.values, vec![1.0, -2.0]);
        assert!(state.first_moment.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn adam_first_step_magnitude() {
        let mut params = ParamVector::from_values(vec![0.0]);
        params.grads[0] = 0.5;
        let mut state = AdamState::new(1, 1e-3);
        adam_step(&mut params, &mut state).unwrap();
        // Bias corrections cancel at t = 1: |step| = lr * g / (|g| + eps).
        assert!((params.values[0].abs() - 1e-3).abs() < 1e-8);
        assert_eq!(params.grads[0], 0.0);
    }

    #[test]
    fn adam_descends_a_quadratic() {
        let mut params = ParamVector::from_values(vec![1.0]);
        let mut state = AdamState::new(1, 0.1);
        for _ in 0..100 {
            params.grads[0] = 2.0 * params.values[0];
            adam_step(&mut params, &mut state).unwrap();
        }
        let f = params.values[0] * params.values[0];
        assert!(f < 1e-2, "f after 100 steps = {f}");
    }

    #[test]
    fn softplus_head_stays_above_one_after_shift() {
        for &x in &[-800.0, -20.0, -1.0, 0.0, 3.0, 100.0, 750.0] {
            let s = softplus(x) + 1.0;
            assert!(s >= 1.0 && s.is_finite(), "softplus({x})+1 = {s}");
        }
    }

    #[test]
    fn checkpoint_round_trips_exactly() {
        let spec = small_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let params = init_params(&spec, &mut rng);
        let mut buf = Vec::new();
        save_checkpoint(&spec, &params, &mut buf).unwrap();
        let (dims, values) = load_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(dims, vec![3, 5, 4, 2]);
        assert_eq!(values, params.values);
    }
}
