//! The permutation-equivariant DeepSets layer and its equivalence with
//! symmetric-group convolution.
//!
//! An invariant kernel on [n] x [n] under the full permutation action takes
//! exactly one value on the diagonal and one off it, so the induced matrix
//! is `W = lambda I + gamma 11^T` and the layer is
//! `out = lambda x + gamma (sum x) 1 + c 1`. The two directions below
//! convert between that two-parameter form and an explicit kernel, exactly.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gconv::ConvKernel;
use crate::group::GroupAction;
use crate::signal::{Signal, WeightedMeasure};

/// `out = lambda x + gamma (sum x) 1 + c 1` on signals of length n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeepSetsLayer {
    pub lambda: f64,
    pub gamma: f64,
    pub bias: f64,
    pub n: usize,
}

impl DeepSetsLayer {
    pub fn new(lambda: f64, gamma: f64, bias: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parse("DeepSets layer needs n >= 1".into()));
        }
        Ok(DeepSetsLayer {
            lambda,
            gamma,
            bias,
            n,
        })
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        deepsets_apply(self, x)
    }
}

pub fn deepsets_apply(layer: &DeepSetsLayer, x: &Signal) -> Result<Signal> {
    if x.len() != layer.n {
        return Err(Error::SizeMismatch {
            what: "DeepSets input",
            expected: layer.n,
            got: x.len(),
        });
    }
    let total: f64 = x.values().iter().sum();
    Ok(Signal::from(
        x.values()
            .iter()
            .map(|&v| layer.lambda * v + layer.gamma * total + layer.bias)
            .collect::<Vec<_>>(),
    ))
}

/// Materialize the layer as a convolution kernel on the natural S_n action:
/// `v(i, j) = lambda [i = j] + gamma` with counting measure and constant
/// bias. Exactly invariant by construction.
pub fn deepsets_to_kernel(layer: &DeepSetsLayer) -> Result<ConvKernel> {
    let n = layer.n;
    let action = Arc::new(GroupAction::symmetric_natural(n)?);
    let mut weights = vec![layer.gamma; n * n];
    for i in 0..n {
        weights[i * n + i] += layer.lambda;
    }
    ConvKernel::new(
        weights,
        vec![layer.bias; n],
        WeightedMeasure::counting(n),
        Arc::clone(&action),
        action,
    )
}

/// Recover the two-parameter form from a kernel on [n] x [n]. Rejects any
/// kernel whose matrix is not constant on the diagonal and constant off it,
/// or whose bias is not constant: those are exactly the kernels invariant
/// under a proper subgroup of S_n but not S_n itself.
pub fn kernel_to_deepsets(kernel: &ConvKernel) -> Result<DeepSetsLayer> {
    let n = kernel.in_dim();
    if kernel.out_dim() != n || n < 2 {
        return Err(Error::NotSymmetricInvariant(format!(
            "kernel must be square with n >= 2, got {}x{}",
            kernel.out_dim(),
            n
        )));
    }
    let diag = kernel.weight(0, 0);
    let off = kernel.weight(0, 1);
    for i in 0..n {
        for j in 0..n {
            let v = kernel.weight(i, j);
            let expect = if i == j { diag } else { off };
            if v != expect {
                return Err(Error::NotSymmetricInvariant(format!(
                    "entry ({i}, {j}) = {v} breaks the two-value form (diag {diag}, off {off})"
                )));
            }
        }
    }
    let bias = kernel.bias()[0];
    if kernel.bias().iter().any(|&b| b != bias) {
        return Err(Error::NotSymmetricInvariant("bias is not constant".into()));
    }
    DeepSetsLayer::new(diag - off, off, bias, n)
}
