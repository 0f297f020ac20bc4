//! Fully-connected networks in integral form: affine layers that carry an
//! explicit input measure, composed with a pointwise activation between
//! consecutive layers (none after the last).
//!
//! The layer output is `out(t) = sum_s w(t, s) x(s) mu(s) + b(t)`; with the
//! counting measure this is the plain matrix-vector product plus bias. The
//! measure is stored separately rather than folded into the weights because
//! the conversion machinery needs the first-layer measure on its own to
//! check absolute continuity and form the Radon-Nikodym derivative.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Signal, WeightedMeasure};

/// Pointwise activation, applied componentwise to signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
    LeakyRelu(f64),
}

impl Activation {
    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-v).exp()),
            Activation::Tanh => v.tanh(),
            Activation::Relu => v.max(0.0),
            Activation::LeakyRelu(alpha) => {
                if v >= 0.0 {
                    v
                } else {
                    alpha * v
                }
            }
        }
    }

    #[inline]
    pub fn derivative(&self, v: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = self.apply(v);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = v.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(alpha) => {
                if v >= 0.0 {
                    1.0
                } else {
                    *alpha
                }
            }
        }
    }

    /// A valid Lipschitz constant of the scalar function.
    pub fn lipschitz_constant(&self) -> f64 {
        match self {
            Activation::Sigmoid => 0.25,
            Activation::Tanh => 1.0,
            Activation::Relu => 1.0,
            Activation::LeakyRelu(alpha) => alpha.abs().max(1.0),
        }
    }

    pub fn apply_signal(&self, x: &Signal) -> Signal {
        Signal::from(x.values().iter().map(|&v| self.apply(v)).collect::<Vec<_>>())
    }
}

/// A biased affine layer with an explicit input measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer {
    out_dim: usize,
    in_dim: usize,
    /// Row-major `out_dim x in_dim`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    measure: WeightedMeasure,
}

impl AffineLayer {
    pub fn new(
        out_dim: usize,
        in_dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        measure: WeightedMeasure,
    ) -> Result<Self> {
        if weights.len() != out_dim * in_dim {
            return Err(Error::SizeMismatch {
                what: "affine weights",
                expected: out_dim * in_dim,
                got: weights.len(),
            });
        }
        if bias.len() != out_dim {
            return Err(Error::SizeMismatch {
                what: "affine bias",
                expected: out_dim,
                got: bias.len(),
            });
        }
        if measure.len() != in_dim {
            return Err(Error::SizeMismatch {
                what: "affine input measure",
                expected: in_dim,
                got: measure.len(),
            });
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite affine parameter".into()));
        }
        Ok(AffineLayer {
            out_dim,
            in_dim,
            weights,
            bias,
            measure,
        })
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    #[inline]
    pub fn weight(&self, t: usize, s: usize) -> f64 {
        self.weights[t * self.in_dim + s]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn measure(&self) -> &WeightedMeasure {
        &self.measure
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        affine_apply(self, x)
    }
}

/// `out(t) = sum_s w(t, s) x(s) mu(s) + b(t)`.
pub fn affine_apply(layer: &AffineLayer, x: &Signal) -> Result<Signal> {
    if x.len() != layer.in_dim {
        return Err(Error::SizeMismatch {
            what: "affine input",
            expected: layer.in_dim,
            got: x.len(),
        });
    }
    let mu = layer.measure.weights();
    let xs = x.values();
    let mut out = Vec::with_capacity(layer.out_dim);
    for t in 0..layer.out_dim {
        let row = &layer.weights[t * layer.in_dim..(t + 1) * layer.in_dim];
        let mut acc = 0.0;
        for s in 0..layer.in_dim {
            acc += row[s] * xs[s] * mu[s];
        }
        out.push(acc + layer.bias[t]);
    }
    Ok(Signal::from(out))
}

/// A fully-connected network: affine layers with the activation between
/// consecutive layers and none after the last.
#[derive(Debug, Clone, PartialEq)]
pub struct FnnModel {
    layers: Vec<AffineLayer>,
    activation: Activation,
}

impl FnnModel {
    pub fn new(layers: Vec<AffineLayer>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Parse("a network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::SizeMismatch {
                    what: "consecutive layer dimensions",
                    expected: pair[0].out_dim,
                    got: pair[1].in_dim,
                });
            }
        }
        Ok(FnnModel { layers, activation })
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    /// Sizes of the index sets the layers chain through, input first.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(|l| l.out_dim));
        sizes
    }

    /// The first layer's input measure: the model-level measure referenced
    /// by the conversion conditions.
    pub fn input_measure(&self) -> &WeightedMeasure {
        self.layers[0].measure()
    }

    pub fn forward(&self, x: &Signal) -> Result<Signal> {
        fnn_forward(self, x)
    }
}

/// Alternating affine/activation composition, no activation after the last
/// affine layer.
pub fn fnn_forward(model: &FnnModel, x: &Signal) -> Result<Signal> {
    let last = model.layers.len() - 1;
    let mut current = x.clone();
    for (i, layer) in model.layers.iter().enumerate() {
        current = affine_apply(layer, &current)?;
        if i != last {
            current = model.activation.apply_signal(&current);
        }
    }
    Ok(current)
}

/// Per-layer gradients of the mean-squared-error loss.
#[derive(Debug, Clone)]
pub struct FnnGradients {
    pub weight_grads: Vec<Vec<f64>>,
    pub bias_grads: Vec<Vec<f64>>,
}

/// MSE loss over a batch of (input, target) pairs, averaged over samples and
/// output coordinates, together with its analytic gradients.
pub fn mse_loss_and_grads(model: &FnnModel, targets: &[(Signal, Signal)]) -> Result<(f64, FnnGradients)> {
    let n_layers = model.layers.len();
    let mut weight_grads: Vec<Vec<f64>> = model
        .layers
        .iter()
        .map(|l| vec![0.0; l.weights.len()])
        .collect();
    let mut bias_grads: Vec<Vec<f64>> = model.layers.iter().map(|l| vec![0.0; l.out_dim]).collect();
    let mut loss = 0.0;
    let denom = (targets.len() * model.output_dim()) as f64;

    for (x, y) in targets {
        if y.len() != model.output_dim() {
            return Err(Error::SizeMismatch {
                what: "training target",
                expected: model.output_dim(),
                got: y.len(),
            });
        }
        // Forward pass keeping pre-activations and activations.
        let mut activations: Vec<Signal> = vec![x.clone()];
        let mut pre: Vec<Signal> = Vec::with_capacity(n_layers);
        for (i, layer) in model.layers.iter().enumerate() {
            let z = affine_apply(layer, activations.last().unwrap())?;
            pre.push(z.clone());
            if i + 1 != n_layers {
                activations.push(model.activation.apply_signal(&z));
            } else {
                activations.push(z);
            }
        }
        let out = activations.last().unwrap();
        let mut delta: Vec<f64> = out
            .values()
            .iter()
            .zip(y.values())
            .map(|(o, t)| {
                let e = o - t;
                loss += e * e / denom;
                2.0 * e / denom
            })
            .collect();

        for i in (0..n_layers).rev() {
            let layer = &model.layers[i];
            let input = &activations[i];
            let mu = layer.measure.weights();
            for t in 0..layer.out_dim {
                bias_grads[i][t] += delta[t];
                let row = &mut weight_grads[i][t * layer.in_dim..(t + 1) * layer.in_dim];
                for s in 0..layer.in_dim {
                    row[s] += delta[t] * input.get(s) * mu[s];
                }
            }
            if i > 0 {
                let mut prev = vec![0.0; layer.in_dim];
                for t in 0..layer.out_dim {
                    let row = &layer.weights[t * layer.in_dim..(t + 1) * layer.in_dim];
                    let d = delta[t];
                    for s in 0..layer.in_dim {
                        prev[s] += d * row[s] * mu[s];
                    }
                }
                // Through the activation of the previous layer.
                let z_prev = &pre[i - 1];
                for s in 0..layer.in_dim {
                    prev[s] *= model.activation.derivative(z_prev.get(s));
                }
                delta = prev;
            }
        }
    }
    Ok((
        loss,
        FnnGradients {
            weight_grads,
            bias_grads,
        },
    ))
}

/// Outcome of a fit: the trained model plus its training errors.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FnnModel,
    /// Max over training pairs of the sup-norm output error.
    pub sup_error: f64,
    pub final_loss: f64,
    pub epochs: usize,
}

/// Fit a two-layer network to (input, target) pairs by full-batch gradient
/// descent with a fixed learning rate. Deterministic given the seed.
pub fn fit_generator(
    targets: &[(Signal, Signal)],
    hidden: usize,
    activation: Activation,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<FitResult> {
    if targets.is_empty() {
        return Err(Error::Parse("fit needs at least one training pair".into()));
    }
    if hidden == 0 {
        return Err(Error::Parse("fit needs hidden >= 1".into()));
    }
    let in_dim = targets[0].0.len();
    let out_dim = targets[0].1.len();
    for (x, y) in targets {
        if x.len() != in_dim || y.len() != out_dim {
            return Err(Error::SizeMismatch {
                what: "training pair",
                expected: in_dim,
                got: x.len(),
            });
        }
    }

    // Hidden layer gets a uniform fan-scaled init; the output layer is
    // initialized by ridge least squares on the hidden features, so the
    // descent starts from the best linear readout of the random features
    // (a constant target is fitted exactly and never moves).
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = (6.0 / (hidden + in_dim) as f64).sqrt();
    let w1: Vec<f64> = (0..hidden * in_dim).map(|_| rng.gen_range(-limit..limit)).collect();
    let b1: Vec<f64> = (0..hidden).map(|_| rng.gen_range(-limit..limit)).collect();
    let first = AffineLayer::new(hidden, in_dim, w1, b1, WeightedMeasure::counting(in_dim))?;
    let (w2, b2) = ridge_readout(&first, activation, targets)?;
    let mut model = FnnModel::new(
        vec![
            first,
            AffineLayer::new(out_dim, hidden, w2, b2, WeightedMeasure::counting(hidden))?,
        ],
        activation,
    )?;

    let mut final_loss = 0.0;
    for epoch in 0..epochs {
        let (loss, grads) = mse_loss_and_grads(&model, targets)?;
        if !loss.is_finite() {
            return Err(Error::DivergedFit { epoch, loss });
        }
        final_loss = loss;
        for (i, layer) in model.layers.iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&grads.weight_grads[i]) {
                *w -= lr * g;
            }
            for (b, g) in layer.bias.iter_mut().zip(&grads.bias_grads[i]) {
                *b -= lr * g;
            }
        }
    }

    let mut sup_error = 0.0f64;
    for (x, y) in targets {
        let out = fnn_forward(&model, x)?;
        let d = crate::signal::sup_norm_diff(&out, y)?;
        if d > sup_error {
            sup_error = d;
        }
    }
    Ok(FitResult {
        model,
        sup_error,
        final_loss,
        epochs,
    })
}

/// Ridge least-squares readout of the hidden features: weights on centered
/// features, bias unpenalized (absorbs the target mean).
fn ridge_readout(
    first: &AffineLayer,
    activation: Activation,
    targets: &[(Signal, Signal)],
) -> Result<(Vec<f64>, Vec<f64>)> {
    const RIDGE_REL: f64 = 1e-4;
    let n = targets.len();
    let h = first.out_dim();
    let out_dim = targets[0].1.len();

    let mut features = vec![0.0; n * h];
    for (i, (x, _)) in targets.iter().enumerate() {
        let z = affine_apply(first, x)?;
        for j in 0..h {
            features[i * h + j] = activation.apply(z.get(j));
        }
    }
    let mut feat_mean = vec![0.0; h];
    for i in 0..n {
        for j in 0..h {
            feat_mean[j] += features[i * h + j] / n as f64;
        }
    }
    for i in 0..n {
        for j in 0..h {
            features[i * h + j] -= feat_mean[j];
        }
    }
    let mut target_mean = vec![0.0; out_dim];
    for (_, y) in targets {
        for t in 0..out_dim {
            target_mean[t] += y.get(t) / n as f64;
        }
    }

    // Gram matrix of centered features plus a relative ridge.
    let mut gram = vec![0.0; h * h];
    for i in 0..n {
        let row = &features[i * h..(i + 1) * h];
        for a in 0..h {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            for b in a..h {
                gram[a * h + b] += ra * row[b];
            }
        }
    }
    for a in 0..h {
        for b in 0..a {
            gram[a * h + b] = gram[b * h + a];
        }
    }
    let trace: f64 = (0..h).map(|a| gram[a * h + a]).sum();
    let ridge = RIDGE_REL * trace / h as f64 + 1e-12;
    for a in 0..h {
        gram[a * h + a] += ridge;
    }
    let chol = cholesky(&mut gram, h)?;

    let mut w2 = vec![0.0; out_dim * h];
    let mut b2 = vec![0.0; out_dim];
    let mut rhs = vec![0.0; h];
    for t in 0..out_dim {
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for (i, (_, y)) in targets.iter().enumerate() {
            let yc = y.get(t) - target_mean[t];
            for j in 0..h {
                rhs[j] += features[i * h + j] * yc;
            }
        }
        cholesky_solve(chol, h, &mut rhs);
        let mut bias = target_mean[t];
        for j in 0..h {
            w2[t * h + j] = rhs[j];
            bias -= rhs[j] * feat_mean[j];
        }
        b2[t] = bias;
    }
    Ok((w2, b2))
}

/// In-place lower-Cholesky factorization of a symmetric positive-definite
/// matrix stored row-major.
fn cholesky(m: &mut [f64], n: usize) -> Result<&[f64]> {
    for j in 0..n {
        for k in 0..j {
            let l = m[j * n + k];
            for i in j..n {
                m[i * n + j] -= m[i * n + k] * l;
            }
        }
        let d = m[j * n + j];
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Parse("feature Gram matrix is not positive definite".into()));
        }
        let s = d.sqrt();
        for i in j..n {
            m[i * n + j] /= s;
        }
    }
    Ok(m)
}

fn cholesky_solve(l: &[f64], n: usize, rhs: &mut [f64]) {
    for i in 0..n {
        for k in 0..i {
            rhs[i] -= l[i * n + k] * rhs[k];
        }
        rhs[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            rhs[i] -= l[k * n + i] * rhs[k];
        }
        rhs[i] /= l[i * n + i];
    }
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    w: Vec<f64>,
    b: Vec<f64>,
    mu: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FnnModelJson {
    layer_sizes: Vec<usize>,
    activation: Activation,
    layers: Vec<LayerJson>,
}

impl Serialize for FnnModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FnnModelJson {
            layer_sizes: self.layer_sizes(),
            activation: self.activation,
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson {
                    w: l.weights.clone(),
                    b: l.bias.clone(),
                    mu: l.measure.weights().to_vec(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FnnModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = FnnModelJson::deserialize(deserializer)?;
        if raw.layer_sizes.len() != raw.layers.len() + 1 {
            return Err(serde::de::Error::custom("layer_sizes must have one more entry than layers"));
        }
        let mut layers = Vec::with_capacity(raw.layers.len());
        for (i, l) in raw.layers.into_iter().enumerate() {
            let (inp, out) = (raw.layer_sizes[i], raw.layer_sizes[i + 1]);
            let measure = WeightedMeasure::new(l.mu).map_err(serde::de::Error::custom)?;
            layers.push(
                AffineLayer::new(out, inp, l.w, l.b, measure).map_err(serde::de::Error::custom)?,
            );
        }
        FnnModel::new(layers, raw.activation).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn counting_layer(out: usize, inp: usize, w: Vec<f64>, b: Vec<f64>) -> AffineLayer {
        AffineLayer::new(out, inp, w, b, WeightedMeasure::counting(inp)).unwrap()
    }

    #[test]
    fn affine_identity_and_sums() {
        let id = counting_layer(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], vec![0.0; 3]);
        let x = Signal::from(vec![4.0, -1.0, 2.0]);
        assert_eq!(affine_apply(&id, &x).unwrap(), x);

        let ones = counting_layer(1, 3, vec![1.0, 1.0, 1.0], vec![1.0]);
        let x = Signal::from(vec![1.0, 2.0, 3.0]);
        assert_eq!(affine_apply(&ones, &x).unwrap().values(), &[7.0]);
    }

    #[test]
    fn affine_weighted_measure() {
        // Same all-ones row, but with mass 2 on every input point.
        let layer = AffineLayer::new(
            1,
            3,
            vec![1.0, 1.0, 1.0],
            vec![1.0],
            WeightedMeasure::new(vec![2.0, 2.0, 2.0]).unwrap(),
        )
        .unwrap();
        let x = Signal::from(vec![1.0, 2.0, 3.0]);
        // Oracle: explicit weighted sum.
        let expect: f64 = (0..3).map(|s| 1.0 * x.get(s) * 2.0).sum::<f64>() + 1.0;
        assert_eq!(affine_apply(&layer, &x).unwrap().values(), &[expect]);
        assert_eq!(expect, 13.0);
    }

    #[test]
    fn affine_counting_equals_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (out, inp) = (4, 5);
        let w: Vec<f64> = (0..out * inp).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..out).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let layer = counting_layer(out, inp, w.clone(), b.clone());
        let x: Vec<f64> = (0..inp).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let got = affine_apply(&layer, &Signal::from(x.clone())).unwrap();
        for t in 0..out {
            let expect: f64 = (0..inp).map(|s| w[t * inp + s] * x[s]).sum::<f64>() + b[t];
            assert_eq!(got.get(t), expect);
        }
    }

    #[test]
    fn forward_single_layer_reduces_to_affine() {
        let layer = counting_layer(2, 2, vec![0.5, -0.5, 1.0, 2.0], vec![0.1, -0.1]);
        let model = FnnModel::new(vec![layer.clone()], Activation::Tanh).unwrap();
        let x = Signal::from(vec![1.0, 3.0]);
        assert_eq!(fnn_forward(&model, &x).unwrap(), affine_apply(&layer, &x).unwrap());
    }

    #[test]
    fn forward_relu_two_layer() {
        let id = vec![1.0, 0.0, 0.0, 1.0];
        let model = FnnModel::new(
            vec![
                counting_layer(2, 2, id.clone(), vec![0.0; 2]),
                counting_layer(2, 2, id, vec![0.0; 2]),
            ],
            Activation::Relu,
        )
        .unwrap();
        let x = Signal::from(vec![-1.0, 2.0]);
        assert_eq!(fnn_forward(&model, &x).unwrap().values(), &[0.0, 2.0]);
    }

    #[test]
    fn forward_matches_straight_line_oracle() {
        // Independent forward pass with naive loops.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let sizes = [4usize, 6, 5, 3];
        let mut layers = Vec::new();
        for k in 0..3 {
            let (inp, out) = (sizes[k], sizes[k + 1]);
            layers.push(counting_layer(
                out,
                inp,
                (0..out * inp).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                (0..out).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            ));
        }
        let model = FnnModel::new(layers.clone(), Activation::Sigmoid).unwrap();
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let mut cur = x.clone();
        for (k, layer) in layers.iter().enumerate() {
            let mut next = vec![0.0; layer.out_dim()];
            for t in 0..layer.out_dim() {
                for s in 0..layer.in_dim() {
                    next[t] += layer.weight(t, s) * cur[s];
                }
                next[t] += layer.bias()[t];
                if k != 2 {
                    next[t] = 1.0 / (1.0 + (-next[t]).exp());
                }
            }
            cur = next;
        }
        let got = fnn_forward(&model, &Signal::from(x)).unwrap();
        for t in 0..3 {
            assert!((got.get(t) - cur[t]).abs() < 1e-14);
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for case in 0..5 {
            let (inp, hid, out) = (3, 4, 2);
            let mut layers = vec![
                counting_layer(
                    hid,
                    inp,
                    (0..hid * inp).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    (0..hid).map(|_| rng.gen_range(-0.5..0.5)).collect(),
                ),
                counting_layer(
                    out,
                    hid,
                    (0..out * hid).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    (0..out).map(|_| rng.gen_range(-0.5..0.5)).collect(),
                ),
            ];
            // Exercise a non-counting first-layer measure too.
            if case % 2 == 1 {
                let l = &layers[0];
                layers[0] = AffineLayer::new(
                    l.out_dim(),
                    l.in_dim(),
                    l.weights().to_vec(),
                    l.bias().to_vec(),
                    WeightedMeasure::new((0..inp).map(|_| rng.gen_range(0.5..2.0)).collect())
                        .unwrap(),
                )
                .unwrap();
            }
            let model = FnnModel::new(layers, Activation::Tanh).unwrap();
            let data: Vec<(Signal, Signal)> = (0..6)
                .map(|_| {
                    (
                        Signal::from((0..inp).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()),
                        Signal::from((0..out).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()),
                    )
                })
                .collect();
            let (_, grads) = mse_loss_and_grads(&model, &data).unwrap();

            let step = 1e-5;
            let mut max_abs = 0.0f64;
            let mut max_diff = 0.0f64;
            for li in 0..2 {
                for wi in 0..model.layers[li].weights.len() {
                    let mut plus = model.clone();
                    plus.layers[li].weights[wi] += step;
                    let mut minus = model.clone();
                    minus.layers[li].weights[wi] -= step;
                    let lp = mse_loss_and_grads(&plus, &data).unwrap().0;
                    let lm = mse_loss_and_grads(&minus, &data).unwrap().0;
                    let fd = (lp - lm) / (2.0 * step);
                    let an = grads.weight_grads[li][wi];
                    max_abs = max_abs.max(an.abs()).max(fd.abs());
                    max_diff = max_diff.max((an - fd).abs());
                }
            }
            assert!(
                max_diff <= 1e-4 * max_abs.max(1e-6),
                "gradient mismatch {max_diff} vs scale {max_abs}"
            );
        }
    }

    #[test]
    fn relu_weight_rescaling_invariance() {
        // Scale layer-1 weights by c and layer-2 by 1/c: relu is positively
        // homogeneous, so the output is unchanged when biases are zero.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (inp, hid, out) = (3, 5, 2);
        let w1: Vec<f64> = (0..hid * inp).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w2: Vec<f64> = (0..out * hid).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = 3.7;
        let model = FnnModel::new(
            vec![
                counting_layer(hid, inp, w1.clone(), vec![0.0; hid]),
                counting_layer(out, hid, w2.clone(), vec![0.0; out]),
            ],
            Activation::Relu,
        )
        .unwrap();
        let scaled = FnnModel::new(
            vec![
                counting_layer(hid, inp, w1.iter().map(|w| w * c).collect(), vec![0.0; hid]),
                counting_layer(out, hid, w2.iter().map(|w| w / c).collect(), vec![0.0; out]),
            ],
            Activation::Relu,
        )
        .unwrap();
        for _ in 0..20 {
            let x = Signal::from((0..inp).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
            let a = fnn_forward(&model, &x).unwrap();
            let b = fnn_forward(&scaled, &x).unwrap();
            for t in 0..out {
                assert!((a.get(t) - b.get(t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lipschitz_constants_hold_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for act in [
            Activation::Sigmoid,
            Activation::Tanh,
            Activation::Relu,
            Activation::LeakyRelu(0.1),
        ] {
            let lip = act.lipschitz_constant();
            for _ in 0..500 {
                let a = rng.gen_range(-5.0..5.0);
                let b = rng.gen_range(-5.0..5.0);
                assert!((act.apply(a) - act.apply(b)).abs() <= lip * (a - b).abs() + 1e-12);
            }
        }
    }

    #[test]
    fn fit_linear_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let data: Vec<(Signal, Signal)> = (0..64)
            .map(|_| {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
                let y = x.iter().sum::<f64>();
                (Signal::from(x), Signal::from(vec![y]))
            })
            .collect();
        let fit = fit_generator(&data, 8, Activation::Tanh, 20000, 0.1, 3).unwrap();
        assert!(fit.sup_error <= 1e-2, "sup error {}", fit.sup_error);
    }

    #[test]
    fn fit_constant_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let data: Vec<(Signal, Signal)> = (0..32)
            .map(|_| {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
                (Signal::from(x), Signal::from(vec![0.75]))
            })
            .collect();
        let fit = fit_generator(&data, 4, Activation::Tanh, 2000, 0.01, 5).unwrap();
        assert!(fit.sup_error <= 1e-6, "sup error {}", fit.sup_error);
    }

    #[test]
    fn fit_max_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let data: Vec<(Signal, Signal)> = (0..64)
            .map(|_| {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
                let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (Signal::from(x), Signal::from(vec![m]))
            })
            .collect();
        let fit = fit_generator(&data, 32, Activation::Relu, 8000, 0.01, 7).unwrap();
        assert!(fit.sup_error <= 5e-2, "sup error {}", fit.sup_error);
    }

    #[test]
    fn fit_diverges_with_huge_learning_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data: Vec<(Signal, Signal)> = (0..20)
            .map(|_| {
                let x: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.0)).collect();
                let y = x[0] * x[1];
                (Signal::from(x), Signal::from(vec![y]))
            })
            .collect();
        match fit_generator(&data, 2, Activation::Relu, 2000, 1e6, 1) {
            Err(Error::DivergedFit { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn model_json_roundtrip() {
        let model = FnnModel::new(
            vec![
                counting_layer(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![0.5, -0.5]),
                counting_layer(1, 2, vec![1.5, -2.5], vec![0.0]),
            ],
            Activation::LeakyRelu(0.05),
        )
        .unwrap();
        let json = serde_json::to_string(&model).unwrap();
        assert!(json.contains("layer_sizes"));
        let back: FnnModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
