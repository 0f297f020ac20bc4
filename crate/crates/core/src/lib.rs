//! Group-equivariant maps on finite index sets, represented by their
//! generators, together with group convolutional networks and a constructive
//! conversion from fully-connected networks to group CNNs.
//!
//! Everything is desk-scale and exact: groups are explicit composition
//! tables, measures are point masses, and integrals are weighted sums, so
//! equivariance, isometry, and commutation claims can be verified
//! exhaustively rather than sampled.

pub mod convert;
pub mod deepsets;
pub mod equivariant;
pub mod error;
pub mod fnn;
pub mod gconv;
pub mod group;
pub mod signal;

pub use convert::{
    certify, convert, convert_with_mollifier, lift_first_layer, lift_hidden_layer,
    symmetrize_first_layer, validate_conditions, ConversionProblem, ConversionReport,
};
pub use deepsets::{deepsets_apply, deepsets_to_kernel, kernel_to_deepsets, DeepSetsLayer};
pub use equivariant::{
    check_equivariance, equivariance_violation, generator_distance, lift_generator,
    restrict_to_generator, EquivariantMap, GeneratorMap,
};
pub use error::{Error, Result};
pub use fnn::{affine_apply, fit_generator, fnn_forward, Activation, AffineLayer, FitResult, FnnModel};
pub use gconv::{
    check_kernel_invariance, gcnn_forward, gconv_apply, kernel_from_univariate, ConvKernel,
    GcnnModel,
};
pub use group::{
    check_invariant_measure, decompose, orbit, product_action, translate, ActionDecomposition,
    ActionDocument, CosetSpace, FiniteGroup, GroupAction,
};
pub use signal::{
    is_absolutely_continuous, restrict, sup_norm_diff, AbsoluteContinuity, CompactSampleSet,
    Signal, WeightedMeasure,
};
