//! Biased group convolutions and group convolutional networks.
//!
//! A convolution layer is the same weighted sum as an affine layer,
//! `out(t) = sum_s v(t, s) x(s) nu(s) + b(t)`, but with three invariance
//! requirements tied to a pair of actions of one group: the kernel satisfies
//! `v(g.t, g.s) = v(t, s)`, the measure is invariant, and the bias is
//! constant on codomain orbits. A layer with all three exact is exactly
//! equivariant; [`check_kernel_invariance`] reports the worst violation so
//! numerically near-invariant kernels stay visible.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnn::Activation;
use crate::group::{ActionDocument, GroupAction};
use crate::signal::{Signal, WeightedMeasure};

/// A biased group-convolution layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    out_dim: usize,
    in_dim: usize,
    /// Row-major `out_dim x in_dim`; rows indexed by the codomain index set.
    weights: Vec<f64>,
    bias: Vec<f64>,
    measure: WeightedMeasure,
    domain_action: Arc<GroupAction>,
    codomain_action: Arc<GroupAction>,
}

impl ConvKernel {
    /// Checks sizes and that the two actions share one group. Kernel, bias,
    /// and measure invariance are verified separately by
    /// [`check_kernel_invariance`], which reports the violation as a number.
    pub fn new(
        weights: Vec<f64>,
        bias: Vec<f64>,
        measure: WeightedMeasure,
        domain_action: Arc<GroupAction>,
        codomain_action: Arc<GroupAction>,
    ) -> Result<Self> {
        if domain_action.group() != codomain_action.group() {
            return Err(Error::ActionMismatch(
                "convolution actions must share one group".into(),
            ));
        }
        let (out_dim, in_dim) = (codomain_action.size(), domain_action.size());
        if weights.len() != out_dim * in_dim {
            return Err(Error::SizeMismatch {
                what: "convolution kernel",
                expected: out_dim * in_dim,
                got: weights.len(),
            });
        }
        if bias.len() != out_dim {
            return Err(Error::SizeMismatch {
                what: "convolution bias",
                expected: out_dim,
                got: bias.len(),
            });
        }
        if measure.len() != in_dim {
            return Err(Error::SizeMismatch {
                what: "convolution measure",
                expected: in_dim,
                got: measure.len(),
            });
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite convolution parameter".into()));
        }
        Ok(ConvKernel {
            out_dim,
            in_dim,
            weights,
            bias,
            measure,
            domain_action,
            codomain_action,
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

    pub fn domain_action(&self) -> &Arc<GroupAction> {
        &self.domain_action
    }

    pub fn codomain_action(&self) -> &Arc<GroupAction> {
        &self.codomain_action
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        gconv_apply(self, x)
    }
}

/// `out(t) = sum_s v(t, s) x(s) nu(s) + b(t)`.
pub fn gconv_apply(kernel: &ConvKernel, x: &Signal) -> Result<Signal> {
    if x.len() != kernel.in_dim {
        return Err(Error::SizeMismatch {
            what: "convolution input",
            expected: kernel.in_dim,
            got: x.len(),
        });
    }
    let nu = kernel.measure.weights();
    let xs = x.values();
    let mut out = Vec::with_capacity(kernel.out_dim);
    for t in 0..kernel.out_dim {
        let row = &kernel.weights[t * kernel.in_dim..(t + 1) * kernel.in_dim];
        let mut acc = 0.0;
        for s in 0..kernel.in_dim {
            acc += row[s] * xs[s] * nu[s];
        }
        out.push(acc + kernel.bias[t]);
    }
    Ok(Signal::from(out))
}

/// Max over the group of the kernel, bias, and measure invariance defects:
/// `|v(g.t, g.s) - v(t, s)|`, `|b(g.t) - b(t)|`, and `|nu(g.s) - nu(s)|`.
pub fn check_kernel_invariance(kernel: &ConvKernel) -> f64 {
    let dom = &kernel.domain_action;
    let cod = &kernel.codomain_action;
    let mut worst = 0.0f64;
    for g in dom.group().elements() {
        for t in 0..kernel.out_dim {
            let gt = cod.apply(g, t);
            let d = (kernel.bias[gt] - kernel.bias[t]).abs();
            if d > worst {
                worst = d;
            }
            for s in 0..kernel.in_dim {
                let gs = dom.apply(g, s);
                let d = (kernel.weight(gt, gs) - kernel.weight(t, s)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        for s in 0..kernel.in_dim {
            let d = (kernel.measure.get(dom.apply(g, s)) - kernel.measure.get(s)).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Build the invariant kernel on a group acting on itself from a univariate
/// filter: `v(g, h) = vtilde(compose(inverse(h), g))`.
pub fn kernel_from_univariate(vtilde: &[f64], action: &Arc<GroupAction>) -> Result<ConvKernel> {
    if !action.is_left_translation() {
        return Err(Error::NotLeftTranslation);
    }
    let group = action.group();
    let order = group.order();
    if vtilde.len() != order {
        return Err(Error::SizeMismatch {
            what: "univariate filter",
            expected: order,
            got: vtilde.len(),
        });
    }
    let mut weights = vec![0.0; order * order];
    for g in 0..order {
        for h in 0..order {
            weights[g * order + h] = vtilde[group.compose(group.inverse(h), g)];
        }
    }
    ConvKernel::new(
        weights,
        vec![0.0; order],
        WeightedMeasure::counting(order),
        Arc::clone(action),
        Arc::clone(action),
    )
}

/// Recover the univariate filter of a group-on-itself kernel:
/// `vtilde(g) = v(g, identity)`.
pub fn univariate_from_kernel(kernel: &ConvKernel) -> Vec<f64> {
    (0..kernel.out_dim()).map(|g| kernel.weight(g, 0)).collect()
}

/// A group convolutional network: convolution layers chained through
/// matching index sets, with the activation between consecutive layers.
#[derive(Debug, Clone)]
pub struct GcnnModel {
    layers: Vec<ConvKernel>,
    activation: Activation,
}

impl GcnnModel {
    pub fn new(layers: Vec<ConvKernel>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Parse("a network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].codomain_action() != pair[1].domain_action() {
                return Err(Error::ActionMismatch(
                    "consecutive convolution layers must chain through one action".into(),
                ));
            }
        }
        Ok(GcnnModel { layers, activation })
    }

    pub fn layers(&self) -> &[ConvKernel] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn domain_action(&self) -> &Arc<GroupAction> {
        self.layers[0].domain_action()
    }

    pub fn codomain_action(&self) -> &Arc<GroupAction> {
        self.layers.last().unwrap().codomain_action()
    }

    pub fn forward(&self, x: &Signal) -> Result<Signal> {
        gcnn_forward(self, x)
    }

    /// Worst layer invariance defect across the model.
    pub fn max_kernel_invariance_violation(&self) -> f64 {
        self.layers
            .iter()
            .map(check_kernel_invariance)
            .fold(0.0, f64::max)
    }

    /// Equivariance violation of the whole model: exhaustive in the group,
    /// randomized over inputs.
    pub fn equivariance_violation(&self, trials: usize, seed: u64) -> f64 {
        crate::equivariant::equivariance_violation(
            &|x| self.forward(x).expect("dimensions fixed by the model"),
            self.domain_action(),
            self.codomain_action(),
            trials,
            seed,
        )
    }
}

/// Alternating convolution/activation, no activation after the last layer.
pub fn gcnn_forward(model: &GcnnModel, x: &Signal) -> Result<Signal> {
    let last = model.layers.len() - 1;
    let mut current = x.clone();
    for (i, layer) in model.layers.iter().enumerate() {
        current = gconv_apply(layer, &current)?;
        if i != last {
            current = model.activation.apply_signal(&current);
        }
    }
    Ok(current)
}

#[derive(Serialize, Deserialize)]
struct ConvLayerJson {
    v: Vec<f64>,
    b: Vec<f64>,
    nu: Vec<f64>,
    domain: ActionDocument,
    codomain: ActionDocument,
}

#[derive(Serialize, Deserialize)]
struct GcnnModelJson {
    activation: Activation,
    layers: Vec<ConvLayerJson>,
}

impl Serialize for GcnnModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GcnnModelJson {
            activation: self.activation,
            layers: self
                .layers
                .iter()
                .map(|l| ConvLayerJson {
                    v: l.weights.clone(),
                    b: l.bias.clone(),
                    nu: l.measure.weights().to_vec(),
                    domain: ActionDocument::from_action(l.domain_action()),
                    codomain: ActionDocument::from_action(l.codomain_action()),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GcnnModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = GcnnModelJson::deserialize(deserializer)?;
        let mut layers = Vec::with_capacity(raw.layers.len());
        for l in raw.layers {
            let domain = Arc::new(l.domain.into_action().map_err(serde::de::Error::custom)?);
            let codomain = Arc::new(l.codomain.into_action().map_err(serde::de::Error::custom)?);
            let measure = WeightedMeasure::new(l.nu).map_err(serde::de::Error::custom)?;
            layers.push(
                ConvKernel::new(l.v, l.b, measure, domain, codomain)
                    .map_err(serde::de::Error::custom)?,
            );
        }
        GcnnModel::new(layers, raw.activation).map_err(serde::de::Error::custom)
    }
}
