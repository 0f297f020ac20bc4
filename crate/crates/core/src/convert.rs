//! Constructive conversion of a fully-connected network approximating a
//! generator into a group convolutional network approximating the full
//! equivariant map.
//!
//! The construction lifts each affine layer into a convolution layer:
//!
//! * Layer 1 spreads the affine weights over the cosets of the codomain
//!   stabilizer, `v1((g, tau), s) = w1(tau, g^{-1}.s) d(mu)/d(nu)(g^{-1}.s)`,
//!   with `g` running over canonical coset representatives. Restricting the
//!   output to the identity-coset slice reproduces the affine layer exactly.
//! * Hidden layers couple slices through a Kronecker delta on the quotient,
//!   `v_l((g, tau), (h, sigma)) = delta(h, g) w_l(tau, sigma)`, so every
//!   coset slice applies the original affine layer exactly. On finite index
//!   sets the Kronecker delta is exact and the commutation defect is zero; a
//!   triangular mollifier of positive halfwidth can replace it on cyclic
//!   quotients, trading exactness for the smoothing the continuous
//!   construction needs, with the resulting defect reported rather than
//!   bounded a priori.
//! * The last layer lands on the codomain index set itself through its
//!   equivariant identification with (cosets x base space).
//!
//! The certification computes the restriction defect, the generator error,
//! and the full-map error over the group closure of the sample set, and
//! checks the triangle bound `full <= generator + restriction + slack`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnn::{AffineLayer, FnnModel};
use crate::gconv::{ConvKernel, GcnnModel};
use crate::group::{
    check_invariant_measure, close_under_group, product_action, ActionDecomposition, CosetSpace,
    GroupAction,
};
use crate::signal::{
    is_absolutely_continuous, restrict, sup_norm_diff, AbsoluteContinuity, CompactSampleSet,
    WeightedMeasure,
};
use crate::equivariant::EquivariantMap;

/// Numerical slack added to the triangle bound check.
pub const NORM2_SLACK: f64 = 1e-9;

/// A conversion instance: the network, the two decompositions, the invariant
/// measure on the domain, and the measure on the quotient cosets.
#[derive(Debug, Clone)]
pub struct ConversionProblem {
    phi: FnnModel,
    domain_decomp: Arc<ActionDecomposition>,
    codomain_decomp: Arc<ActionDecomposition>,
    nu: WeightedMeasure,
    quotient_measure: WeightedMeasure,
}

impl ConversionProblem {
    /// Basic size checks; the structural conditions are verified by
    /// [`validate_conditions`].
    pub fn new(
        phi: FnnModel,
        domain_decomp: Arc<ActionDecomposition>,
        codomain_decomp: Arc<ActionDecomposition>,
        nu: WeightedMeasure,
        quotient_measure: WeightedMeasure,
    ) -> Result<Self> {
        let s_size = domain_decomp.action().size();
        if phi.input_dim() != s_size {
            return Err(Error::SizeMismatch {
                what: "network input vs domain index set",
                expected: s_size,
                got: phi.input_dim(),
            });
        }
        let base_t = codomain_decomp.base_space().len();
        if phi.output_dim() != base_t {
            return Err(Error::SizeMismatch {
                what: "network output vs codomain base space",
                expected: base_t,
                got: phi.output_dim(),
            });
        }
        if nu.len() != s_size {
            return Err(Error::SizeMismatch {
                what: "invariant measure on domain",
                expected: s_size,
                got: nu.len(),
            });
        }
        let q = codomain_decomp.cosets().count();
        if quotient_measure.len() != q {
            return Err(Error::SizeMismatch {
                what: "quotient measure",
                expected: q,
                got: quotient_measure.len(),
            });
        }
        Ok(ConversionProblem {
            phi,
            domain_decomp,
            codomain_decomp,
            nu,
            quotient_measure,
        })
    }

    /// Counting measures on the domain and the quotient.
    pub fn with_counting_measures(
        phi: FnnModel,
        domain_decomp: Arc<ActionDecomposition>,
        codomain_decomp: Arc<ActionDecomposition>,
    ) -> Result<Self> {
        let nu = WeightedMeasure::counting(domain_decomp.action().size());
        let q = codomain_decomp.cosets().count();
        ConversionProblem::new(phi, domain_decomp, codomain_decomp, nu, WeightedMeasure::counting(q))
    }

    pub fn phi(&self) -> &FnnModel {
        &self.phi
    }

    pub fn domain_decomp(&self) -> &Arc<ActionDecomposition> {
        &self.domain_decomp
    }

    pub fn codomain_decomp(&self) -> &Arc<ActionDecomposition> {
        &self.codomain_decomp
    }

    pub fn nu(&self) -> &WeightedMeasure {
        &self.nu
    }

    pub fn quotient_measure(&self) -> &WeightedMeasure {
        &self.quotient_measure
    }
}

/// Verify the structural conditions of the conversion:
///
/// * both decompositions live over one group;
/// * the codomain stabilizer is contained in the domain stabilizer (the
///   invariant case, where the codomain stabilizer is the whole group,
///   fails this);
/// * the domain measure is invariant and positive-total;
/// * the network's first-layer measure is absolutely continuous with
///   respect to it;
/// * the quotient measure is constant and positive.
pub fn validate_conditions(p: &ConversionProblem) -> Result<()> {
    if p.domain_decomp.group() != p.codomain_decomp.group() {
        return Err(Error::ActionMismatch(
            "domain and codomain decompositions must share one group".into(),
        ));
    }
    let h_s = p.domain_decomp.stabilizer_elements();
    for &h in p.codomain_decomp.stabilizer_elements() {
        if h_s.binary_search(&h).is_err() {
            return Err(Error::StabilizerNotNested { missing_element: h });
        }
    }
    if !check_invariant_measure(&p.nu, p.domain_decomp.action())? {
        return Err(Error::NoInvariantMeasure(
            "domain measure is not constant on orbits".into(),
        ));
    }
    match is_absolutely_continuous(p.phi.input_measure(), &p.nu)? {
        AbsoluteContinuity::Holds { .. } => {}
        AbsoluteContinuity::Fails { index } => {
            return Err(Error::NotAbsolutelyContinuous { index });
        }
    }
    let qw = p.quotient_measure.weights();
    if qw[0] <= 0.0 || qw.iter().any(|&w| w != qw[0]) {
        return Err(Error::NoInvariantMeasure(
            "quotient measure must be a positive constant: the group acts transitively on cosets"
                .into(),
        ));
    }
    Ok(())
}

/// How the rows of a lifted layer are indexed.
enum RowIndexing<'a> {
    /// Flat (coset, position) pairs, coset-major.
    Product { cosets: &'a CosetSpace, width: usize },
    /// The codomain index set itself, through its product identification.
    Target(&'a ActionDecomposition),
}

impl RowIndexing<'_> {
    fn count(&self) -> usize {
        match self {
            RowIndexing::Product { cosets, width } => cosets.count() * width,
            RowIndexing::Target(d) => d.action().size(),
        }
    }

    /// (coset index, base position) of a row.
    fn coords(&self, row: usize) -> (usize, usize) {
        match self {
            RowIndexing::Product { width, .. } => (row / width, row % width),
            RowIndexing::Target(d) => (d.coset_of(row), d.base_pos(row)),
        }
    }

    fn action(&self) -> GroupAction {
        match self {
            RowIndexing::Product { cosets, width } => product_action(cosets, *width),
            RowIndexing::Target(d) => d.action().clone(),
        }
    }
}

fn radon_nikodym(p: &ConversionProblem) -> Result<Vec<f64>> {
    match is_absolutely_continuous(p.phi.input_measure(), &p.nu)? {
        AbsoluteContinuity::Holds { derivative } => Ok(derivative),
        AbsoluteContinuity::Fails { index } => Err(Error::NotAbsolutelyContinuous { index }),
    }
}

fn lift_first_layer_into(
    layer: &AffineLayer,
    p: &ConversionProblem,
    rows: RowIndexing<'_>,
) -> Result<ConvKernel> {
    let derivative = radon_nikodym(p)?;
    let domain_action = p.domain_decomp.action();
    let group = domain_action.group();
    let cosets = p.codomain_decomp.cosets();
    let s_size = domain_action.size();
    let row_count = rows.count();
    let mut weights = vec![0.0; row_count * s_size];
    let mut bias = vec![0.0; row_count];
    for row in 0..row_count {
        let (c, tau) = rows.coords(row);
        let rep_inv = group.inverse(cosets.rep(c));
        let out = &mut weights[row * s_size..(row + 1) * s_size];
        for s in 0..s_size {
            let u = domain_action.apply(rep_inv, s);
            out[s] = layer.weight(tau, u) * derivative[u];
        }
        bias[row] = layer.bias()[tau];
    }
    ConvKernel::new(
        weights,
        bias,
        p.nu.clone(),
        Arc::new(domain_action.clone()),
        Arc::new(rows.action()),
    )
}

/// Lift the first affine layer onto (cosets of the codomain stabilizer) x
/// (first hidden index set). Restricting the output to the identity-coset
/// slice reproduces the affine layer exactly.
pub fn lift_first_layer(layer: &AffineLayer, p: &ConversionProblem) -> Result<ConvKernel> {
    validate_conditions(p)?;
    if layer.in_dim() != p.domain_decomp.action().size() {
        return Err(Error::SizeMismatch {
            what: "first layer input vs domain index set",
            expected: p.domain_decomp.action().size(),
            got: layer.in_dim(),
        });
    }
    lift_first_layer_into(
        layer,
        p,
        RowIndexing::Product {
            cosets: p.codomain_decomp.cosets(),
            width: layer.out_dim(),
        },
    )
}

/// Normalized delta weights on the quotient, indexed by coset distance.
/// Halfwidth 0 is the exact Kronecker delta. A positive halfwidth needs a
/// cyclic quotient, where the triangular window of the circular distance is
/// invariant under the coset action.
fn delta_profile(p: &ConversionProblem, halfwidth: usize) -> Result<Vec<f64>> {
    let q = p.codomain_decomp.cosets().count();
    if halfwidth == 0 {
        let mut profile = vec![0.0; q];
        profile[0] = 1.0;
        return Ok(profile);
    }
    // Positive halfwidth: require the quotient to be the cyclic group acting
    // on itself so that circular distance between coset ids is invariant.
    let group = p.codomain_decomp.group();
    if p.codomain_decomp.stabilizer_elements().len() != 1 || group.order() != q {
        return Err(Error::MollifierUnsupported(
            "positive halfwidth needs a free action (trivial stabilizer)".into(),
        ));
    }
    for a in 0..q {
        for b in 0..q {
            if group.compose(a, b) != (a + b) % q {
                return Err(Error::MollifierUnsupported(
                    "positive halfwidth needs a cyclic quotient".into(),
                ));
            }
        }
    }
    if 2 * halfwidth + 1 > q {
        return Err(Error::MollifierUnsupported(format!(
            "halfwidth {halfwidth} too wide for quotient of size {q}"
        )));
    }
    let mut profile = vec![0.0; q];
    let mut total = 0.0;
    for d in 0..q {
        let circ = d.min(q - d);
        if circ <= halfwidth {
            let w = (halfwidth + 1 - circ) as f64;
            profile[d] = w;
            total += w;
        }
    }
    for w in &mut profile {
        *w /= total;
    }
    Ok(profile)
}

fn lift_hidden_layer_into(
    layer: &AffineLayer,
    p: &ConversionProblem,
    rows: RowIndexing<'_>,
    halfwidth: usize,
) -> Result<ConvKernel> {
    let cosets = p.codomain_decomp.cosets();
    let coset_action = cosets.action();
    let q = cosets.count();
    let (in_w, out_w) = (layer.in_dim(), layer.out_dim());
    let in_size = q * in_w;
    let row_count = rows.count();
    let qmass = p.quotient_measure.weights();
    let profile = delta_profile(p, halfwidth)?;
    // delta(h, g) as a function of coset ids: profile of the cyclic offset
    // for positive halfwidth, the Kronecker delta otherwise.
    let delta = |h: usize, g: usize| -> f64 {
        if halfwidth == 0 {
            if h == g {
                1.0
            } else {
                0.0
            }
        } else {
            profile[(h + q - g) % q]
        }
    };
    let _ = &coset_action;

    let mut weights = vec![0.0; row_count * in_size];
    let mut bias = vec![0.0; row_count];
    let mut measure = vec![0.0; in_size];
    for j in 0..q {
        for sigma in 0..in_w {
            measure[j * in_w + sigma] = qmass[j] * layer.measure().get(sigma);
        }
    }
    for row in 0..row_count {
        let (c, tau) = rows.coords(row);
        let out = &mut weights[row * in_size..(row + 1) * in_size];
        for j in 0..q {
            let d = delta(j, c);
            if d == 0.0 {
                continue;
            }
            for sigma in 0..in_w {
                out[j * in_w + sigma] = d / qmass[j] * layer.weight(tau, sigma);
            }
        }
        bias[row] = layer.bias()[tau];
    }
    let domain = Arc::new(product_action(cosets, in_w));
    let _ = out_w;
    ConvKernel::new(
        weights,
        bias,
        WeightedMeasure::new(measure)?,
        domain,
        Arc::new(rows.action()),
    )
}

/// Lift a hidden or final affine layer (1-based `layer_index >= 2`) onto the
/// quotient-product index sets; when `layer_index` is the network depth the
/// output rows are the codomain index set itself. The Kronecker delta makes
/// every coset slice reproduce the affine layer exactly.
pub fn lift_hidden_layer(
    layer: &AffineLayer,
    layer_index: usize,
    p: &ConversionProblem,
) -> Result<ConvKernel> {
    lift_hidden_layer_mollified(layer, layer_index, p, 0)
}

/// [`lift_hidden_layer`] with a triangular mollifier of the given halfwidth
/// replacing the Kronecker delta (halfwidth 0 is exact).
pub fn lift_hidden_layer_mollified(
    layer: &AffineLayer,
    layer_index: usize,
    p: &ConversionProblem,
    halfwidth: usize,
) -> Result<ConvKernel> {
    let depth = p.phi.layers().len();
    if layer_index < 2 || layer_index > depth {
        return Err(Error::Parse(format!(
            "hidden layer index {layer_index} out of range 2..={depth}"
        )));
    }
    let rows = if layer_index == depth {
        RowIndexing::Target(&p.codomain_decomp)
    } else {
        RowIndexing::Product {
            cosets: p.codomain_decomp.cosets(),
            width: layer.out_dim(),
        }
    };
    lift_hidden_layer_into(layer, p, rows, halfwidth)
}

/// Convert the network into a group CNN of the same depth and activation.
pub fn convert(p: &ConversionProblem) -> Result<GcnnModel> {
    convert_with_mollifier(p, 0)
}

/// [`convert`] with a mollified delta of the given halfwidth in the layers
/// past the first; halfwidth 0 is the exact Kronecker construction.
pub fn convert_with_mollifier(p: &ConversionProblem, halfwidth: usize) -> Result<GcnnModel> {
    validate_conditions(p)?;
    if halfwidth > 0 {
        // Fail fast with the structural reason even for depth-1 networks.
        delta_profile(p, halfwidth)?;
    }
    let layers = p.phi.layers();
    let depth = layers.len();
    let mut converted = Vec::with_capacity(depth);
    if depth == 1 {
        converted.push(lift_first_layer_into(
            &layers[0],
            p,
            RowIndexing::Target(&p.codomain_decomp),
        )?);
    } else {
        converted.push(lift_first_layer(&layers[0], p)?);
        for (i, layer) in layers.iter().enumerate().skip(1) {
            converted.push(lift_hidden_layer_mollified(layer, i + 1, p, halfwidth)?);
        }
    }
    GcnnModel::new(converted, p.phi.activation())
}

/// Project the first-layer weights onto the subspace invariant under the
/// codomain stabilizer, by averaging each row over the stabilizer orbits of
/// the domain. With an invariant Radon-Nikodym derivative this makes the
/// lifted first-layer kernel exactly invariant; the projection moves the
/// network by at most its own invariance defect.
pub fn symmetrize_first_layer(phi: &FnnModel, p: &ConversionProblem) -> Result<FnnModel> {
    let first = &phi.layers()[0];
    let action = p.domain_decomp.action();
    let stab = p.codomain_decomp.stabilizer_elements();
    let s_size = action.size();
    if first.in_dim() != s_size {
        return Err(Error::SizeMismatch {
            what: "first layer input vs domain index set",
            expected: s_size,
            got: first.in_dim(),
        });
    }
    // Average over the sorted stabilizer orbit of each column, so every
    // column of one orbit receives the bit-identical mean.
    let mut orbit_of: Vec<Vec<usize>> = Vec::with_capacity(s_size);
    for s in 0..s_size {
        let mut members: Vec<usize> = stab.iter().map(|&h| action.apply(h, s)).collect();
        members.sort_unstable();
        members.dedup();
        orbit_of.push(members);
    }
    let mut weights = vec![0.0; first.out_dim() * s_size];
    for tau in 0..first.out_dim() {
        for s in 0..s_size {
            let members = &orbit_of[s];
            let acc: f64 = members.iter().map(|&v| first.weight(tau, v)).sum();
            weights[tau * s_size + s] = acc / members.len() as f64;
        }
    }
    let symmetrized = AffineLayer::new(
        first.out_dim(),
        first.in_dim(),
        weights,
        first.bias().to_vec(),
        first.measure().clone(),
    )?;
    let mut layers = vec![symmetrized];
    layers.extend(phi.layers()[1..].iter().cloned());
    FnnModel::new(layers, phi.activation())
}

/// Certification of a converted model over a sample set, with all suprema
/// taken over the group closure of the samples so the triangle bound is a
/// theorem rather than a hope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    /// Sup over the closed samples of |restrict(Phi(x)) - phi(x)|.
    pub proj2_error: f64,
    /// Sup of |restrict(F(x)) - phi(x)| when a target map is supplied.
    pub generator_error: Option<f64>,
    /// Sup of |F(x) - Phi(x)| when a target map is supplied.
    pub full_error: Option<f64>,
    /// full <= generator + proj2 + slack; vacuously true without a target.
    pub norm2_bound_ok: bool,
    /// Size of the closed sample set the suprema ran over.
    pub closure_size: usize,
}

/// Evaluate the conversion quality of `model` against `p.phi` over the group
/// closure of `samples`, and against the target map `f` when given.
pub fn certify(
    p: &ConversionProblem,
    model: &GcnnModel,
    samples: &CompactSampleSet,
    f: Option<&EquivariantMap>,
) -> Result<ConversionReport> {
    let domain_action = p.domain_decomp.action();
    let closed = close_under_group(samples, domain_action)?;
    let base_t = p.codomain_decomp.base_space();

    let mut proj2 = 0.0f64;
    let mut gen_err: Option<f64> = f.map(|_| 0.0);
    let mut full_err: Option<f64> = f.map(|_| 0.0);
    for x in &closed.signals {
        let phi_x = p.phi.forward(x)?;
        let model_x = model.forward(x)?;
        let restricted = restrict(&model_x, base_t)?;
        let d = sup_norm_diff(&restricted, &phi_x)?;
        if d > proj2 {
            proj2 = d;
        }
        if let Some(f) = f {
            let fx = f.eval(x);
            let f_base = restrict(&fx, base_t)?;
            let d = sup_norm_diff(&f_base, &phi_x)?;
            if d > gen_err.unwrap() {
                gen_err = Some(d);
            }
            let d = sup_norm_diff(&fx, &model_x)?;
            if d > full_err.unwrap() {
                full_err = Some(d);
            }
        }
    }
    let norm2_bound_ok = match (full_err, gen_err) {
        (Some(full), Some(gen)) => full <= gen + proj2 + NORM2_SLACK,
        _ => true,
    };
    Ok(ConversionReport {
        proj2_error: proj2,
        generator_error: gen_err,
        full_error: full_err,
        norm2_bound_ok,
        closure_size: closed.len(),
    })
}
