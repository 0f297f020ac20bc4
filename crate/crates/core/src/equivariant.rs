//! Equivariant maps and their generators.
//!
//! An equivariant map between signal spaces is determined by its generator,
//! the restriction of the map to a base space of the codomain. The lift
//! reconstructs the full map from the generator:
//!
//! `F[x](t) = F_B[g_t^{-1} . x](P_B(t))`
//!
//! with `g_t` the canonical section element carrying the base representative
//! of `t` to `t`. The lift of a generator obtained by restricting a genuine
//! equivariant map is exactly equivariant and independent of the section
//! choice. For an arbitrary map plugged in as a generator the lift is
//! equivariant exactly when the generator is invariant under translations by
//! the codomain stabilizer; the reported violation makes the defect visible
//! instead of hiding it behind a boolean.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{translate, ActionDecomposition, GroupAction};
use crate::signal::{restrict, sup_norm_diff, CompactSampleSet, Signal};

type EvalFn = Arc<dyn Fn(&Signal) -> Signal + Send + Sync>;

/// A map from signals on a domain index set to signals on the base space of
/// a codomain decomposition. FNNs plug in here directly.
#[derive(Clone)]
pub struct GeneratorMap {
    eval: EvalFn,
    domain_decomp: Arc<ActionDecomposition>,
    codomain_decomp: Arc<ActionDecomposition>,
}

impl GeneratorMap {
    pub fn new(
        eval: EvalFn,
        domain_decomp: Arc<ActionDecomposition>,
        codomain_decomp: Arc<ActionDecomposition>,
    ) -> Result<Self> {
        if domain_decomp.group() != codomain_decomp.group() {
            return Err(Error::ActionMismatch(
                "generator domain and codomain decompositions must share one group".into(),
            ));
        }
        Ok(GeneratorMap {
            eval,
            domain_decomp,
            codomain_decomp,
        })
    }

    /// Evaluate on a domain signal; the output lives on the codomain base
    /// space (length = number of orbits).
    pub fn eval(&self, x: &Signal) -> Signal {
        (self.eval)(x)
    }

    pub fn domain_decomp(&self) -> &Arc<ActionDecomposition> {
        &self.domain_decomp
    }

    pub fn codomain_decomp(&self) -> &Arc<ActionDecomposition> {
        &self.codomain_decomp
    }
}

impl std::fmt::Debug for GeneratorMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratorMap")
            .field("domain_size", &self.domain_decomp.action().size())
            .field("base_size", &self.codomain_decomp.base_space().len())
            .finish()
    }
}

/// A map between signal spaces carrying the two actions it intertwines.
#[derive(Clone)]
pub struct EquivariantMap {
    eval: EvalFn,
    domain_action: Arc<GroupAction>,
    codomain_action: Arc<GroupAction>,
    /// Optional Lipschitz bound of the map, used by harnesses to scale
    /// tolerances; not consumed by the algebra itself.
    pub lipschitz_bound: Option<f64>,
}

impl EquivariantMap {
    pub fn new(
        eval: EvalFn,
        domain_action: Arc<GroupAction>,
        codomain_action: Arc<GroupAction>,
    ) -> Result<Self> {
        if domain_action.group() != codomain_action.group() {
            return Err(Error::ActionMismatch(
                "domain and codomain actions must share one group".into(),
            ));
        }
        Ok(EquivariantMap {
            eval,
            domain_action,
            codomain_action,
            lipschitz_bound: None,
        })
    }

    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz_bound = Some(bound);
        self
    }

    pub fn eval(&self, x: &Signal) -> Signal {
        (self.eval)(x)
    }

    pub fn domain_action(&self) -> &Arc<GroupAction> {
        &self.domain_action
    }

    pub fn codomain_action(&self) -> &Arc<GroupAction> {
        &self.codomain_action
    }
}

impl std::fmt::Debug for EquivariantMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EquivariantMap")
            .field("domain_size", &self.domain_action.size())
            .field("codomain_size", &self.codomain_action.size())
            .finish()
    }
}

/// The generator of an equivariant map: compose with restriction onto the
/// codomain base space.
pub fn restrict_to_generator(
    map: &EquivariantMap,
    codomain_decomp: &Arc<ActionDecomposition>,
) -> Result<GeneratorMap> {
    if codomain_decomp.action() != map.codomain_action().as_ref() {
        return Err(Error::ActionMismatch(
            "decomposition does not decompose the map's codomain action".into(),
        ));
    }
    let domain_decomp = Arc::new(crate::group::decompose(map.domain_action())?);
    let inner = map.clone();
    let base: Vec<usize> = codomain_decomp.base_space().to_vec();
    let eval: EvalFn = Arc::new(move |x: &Signal| {
        let full = inner.eval(x);
        restrict(&full, &base).expect("base space indices are in range")
    });
    GeneratorMap::new(eval, domain_decomp, Arc::clone(codomain_decomp))
}

/// Lift a generator to the full map on the codomain index set.
pub fn lift_generator(generator: &GeneratorMap) -> Result<EquivariantMap> {
    let dom = Arc::new(generator.domain_decomp().action().clone());
    let cod = Arc::new(generator.codomain_decomp().action().clone());
    let gen = generator.clone();
    let codomain_decomp = Arc::clone(generator.codomain_decomp());
    let domain_action = generator.domain_decomp().action().clone();
    let eval: EvalFn = Arc::new(move |x: &Signal| {
        let size = codomain_decomp.action().size();
        let mut out = vec![0.0; size];
        for t in 0..size {
            let g_t = codomain_decomp.section(t);
            let g_inv = codomain_decomp.group().inverse(g_t);
            let translated =
                translate(g_inv, x, &domain_action).expect("lift input length checked by caller");
            let restricted = gen.eval(&translated);
            out[t] = restricted.get(codomain_decomp.base_pos(t));
        }
        Signal::from(out)
    });
    EquivariantMap::new(eval, dom, cod)
}

/// Max equivariance violation of an arbitrary evaluation function:
/// exhaustive over the group, randomized over inputs drawn uniformly from
/// [-1, 1]^S with the given seed.
pub fn equivariance_violation(
    eval: &dyn Fn(&Signal) -> Signal,
    domain_action: &GroupAction,
    codomain_action: &GroupAction,
    trials: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x = Signal::from(
            (0..domain_action.size())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect::<Vec<f64>>(),
        );
        let fx = eval(&x);
        for g in domain_action.group().elements() {
            let gx = translate(g, &x, domain_action).expect("sizes match");
            let f_gx = eval(&gx);
            let g_fx = translate(g, &fx, codomain_action).expect("sizes match");
            let d = sup_norm_diff(&f_gx, &g_fx).expect("codomain sizes match");
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Equivariance violation of an [`EquivariantMap`].
pub fn check_equivariance(map: &EquivariantMap, trials: usize, seed: u64) -> f64 {
    equivariance_violation(
        &|x| map.eval(x),
        map.domain_action(),
        map.codomain_action(),
        trials,
        seed,
    )
}

/// Sup distance between two maps over a sample set, computed two ways: on
/// the full codomain over the samples, and on the codomain base space over
/// the group closure of the samples. For genuinely equivariant maps the two
/// agree exactly: restriction onto a base space is an isometry.
pub fn generator_distance(
    f: &EquivariantMap,
    f2: &EquivariantMap,
    samples: &CompactSampleSet,
    codomain_decomp: &ActionDecomposition,
) -> Result<(f64, f64)> {
    if f.domain_action() != f2.domain_action() || f.codomain_action() != f2.codomain_action() {
        return Err(Error::ActionMismatch(
            "generator_distance requires maps on the same actions".into(),
        ));
    }
    if codomain_decomp.action() != f.codomain_action().as_ref() {
        return Err(Error::ActionMismatch(
            "decomposition does not match the maps' codomain".into(),
        ));
    }
    let base = codomain_decomp.base_space();
    let domain_action = f.domain_action();
    let mut full = 0.0f64;
    let mut gen = 0.0f64;
    for x in &samples.signals {
        let d = sup_norm_diff(&f.eval(x), &f2.eval(x))?;
        if d > full {
            full = d;
        }
        // Group closure of the sample on the generator side.
        for g in domain_action.group().elements() {
            let gx = translate(g, x, domain_action)?;
            let ra = restrict(&f.eval(&gx), base)?;
            let rb = restrict(&f2.eval(&gx), base)?;
            let d = sup_norm_diff(&ra, &rb)?;
            if d > gen {
                gen = d;
            }
        }
    }
    Ok((full, gen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{decompose, FiniteGroup, GroupAction};

    fn s3_setup() -> (Arc<GroupAction>, Arc<ActionDecomposition>) {
        let act = Arc::new(GroupAction::symmetric_natural(3).unwrap());
        let d = Arc::new(decompose(&act).unwrap());
        (act, d)
    }

    fn random_signals(len: usize, count: usize, seed: u64) -> Vec<Signal> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| Signal::from((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
            .collect()
    }

    #[test]
    fn restrict_identity_map_generator() {
        let (act, d) = s3_setup();
        let id = EquivariantMap::new(Arc::new(|x: &Signal| x.clone()), Arc::clone(&act), act.clone())
            .unwrap();
        let gen = restrict_to_generator(&id, &d).unwrap();
        let x = Signal::from(vec![3.0, 1.0, 2.0]);
        assert_eq!(gen.eval(&x).values(), &[3.0]);
    }

    #[test]
    fn restrict_constant_and_max_generators() {
        let (act, d) = s3_setup();
        let constant = EquivariantMap::new(
            Arc::new(|x: &Signal| Signal::from(vec![7.5; x.len()])),
            Arc::clone(&act),
            Arc::clone(&act),
        )
        .unwrap();
        let gen = restrict_to_generator(&constant, &d).unwrap();
        assert_eq!(gen.eval(&Signal::from(vec![0.0, 1.0, 2.0])).values(), &[7.5]);

        // F[x](t) = max(x) for all t; generator evaluates the max, checked
        // against restricting the full output by hand.
        let max_map = EquivariantMap::new(
            Arc::new(|x: &Signal| {
                let m = x.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Signal::from(vec![m; x.len()])
            }),
            Arc::clone(&act),
            Arc::clone(&act),
        )
        .unwrap();
        let gen = restrict_to_generator(&max_map, &d).unwrap();
        for x in random_signals(3, 20, 5) {
            let full = max_map.eval(&x);
            let by_hand = restrict(&full, d.base_space()).unwrap();
            assert_eq!(gen.eval(&x), by_hand);
        }
    }

    #[test]
    fn lift_of_first_coordinate_is_identity() {
        // F_B(x) = (x(0)) on S3 permuting [3] lifts to the identity map.
        let (_, d) = s3_setup();
        let gen = GeneratorMap::new(
            Arc::new(|x: &Signal| Signal::from(vec![x.get(0)])),
            Arc::clone(&d),
            Arc::clone(&d),
        )
        .unwrap();
        let lifted = lift_generator(&gen).unwrap();
        for x in random_signals(3, 100, 11) {
            assert_eq!(lifted.eval(&x), x);
        }
    }

    #[test]
    fn lift_of_sum_generator_is_equivariant() {
        let (_, d) = s3_setup();
        let gen = GeneratorMap::new(
            Arc::new(|x: &Signal| Signal::from(vec![x.values().iter().sum::<f64>()])),
            Arc::clone(&d),
            Arc::clone(&d),
        )
        .unwrap();
        let lifted = lift_generator(&gen).unwrap();
        let x = Signal::from(vec![1.0, 2.0, 4.0]);
        assert_eq!(lifted.eval(&x).values(), &[7.0, 7.0, 7.0]);
        assert!(check_equivariance(&lifted, 50, 3) < 1e-12);
    }

    #[test]
    fn lift_under_trivial_group_is_generator_itself() {
        let act = Arc::new(GroupAction::trivial(FiniteGroup::trivial(), 3).unwrap());
        let d = Arc::new(decompose(&act).unwrap());
        assert_eq!(d.base_space(), &[0, 1, 2]);
        let gen = GeneratorMap::new(
            Arc::new(|x: &Signal| {
                Signal::from(x.values().iter().map(|v| v * 2.0).collect::<Vec<_>>())
            }),
            Arc::clone(&d),
            Arc::clone(&d),
        )
        .unwrap();
        let lifted = lift_generator(&gen).unwrap();
        let x = Signal::from(vec![1.0, -2.0, 0.5]);
        assert_eq!(lifted.eval(&x).values(), &[2.0, -4.0, 1.0]);
        assert_eq!(check_equivariance(&lifted, 10, 0), 0.0);
    }

    #[test]
    fn non_equivariant_map_has_positive_violation() {
        let (act, _) = s3_setup();
        let skew = EquivariantMap::new(
            Arc::new(|x: &Signal| {
                let mut v = x.values().to_vec();
                v[0] += 1.0;
                Signal::from(v)
            }),
            Arc::clone(&act),
            Arc::clone(&act),
        )
        .unwrap();
        assert!(check_equivariance(&skew, 20, 7) > 0.5);
    }

    #[test]
    fn roundtrip_lift_of_restriction() {
        // lift(restrict(F)) agrees with F pointwise for equivariant F.
        let (act, d) = s3_setup();
        let f = EquivariantMap::new(
            Arc::new(|x: &Signal| {
                let mean = x.values().iter().sum::<f64>() / x.len() as f64;
                Signal::from(x.values().iter().map(|v| v * v + mean).collect::<Vec<_>>())
            }),
            Arc::clone(&act),
            Arc::clone(&act),
        )
        .unwrap();
        let gen = restrict_to_generator(&f, &d).unwrap();
        let lifted = lift_generator(&gen).unwrap();
        for x in random_signals(3, 50, 23) {
            let d = sup_norm_diff(&f.eval(&x), &lifted.eval(&x)).unwrap();
            assert!(d < 1e-14, "roundtrip defect {d}");
        }
    }

    #[test]
    fn lift_section_independence_for_true_generators() {
        // Evaluating the lift with every valid section element gives the
        // same value when the generator came from an equivariant map.
        let (act, d) = s3_setup();
        let f = EquivariantMap::new(
            Arc::new(|x: &Signal| {
                let m = x.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Signal::from(x.values().iter().map(|v| v + m).collect::<Vec<_>>())
            }),
            Arc::clone(&act),
            Arc::clone(&act),
        )
        .unwrap();
        let gen = restrict_to_generator(&f, &d).unwrap();
        for x in random_signals(3, 10, 31) {
            for t in 0..act.size() {
                let mut values = Vec::new();
                for g in act.group().elements() {
                    if act.apply(g, d.projection(t)) == t {
                        let translated =
                            translate(act.group().inverse(g), &x, &act).unwrap();
                        values.push(gen.eval(&translated).get(d.base_pos(t)));
                    }
                }
                for w in values.windows(2) {
                    assert!((w[0] - w[1]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn generator_distance_cases() {
        let (_, d) = s3_setup();
        let make = |c: f64| {
            let gen = GeneratorMap::new(
                Arc::new(move |x: &Signal| {
                    Signal::from(vec![x.values().iter().sum::<f64>() + c])
                }),
                Arc::clone(&d),
                Arc::clone(&d),
            )
            .unwrap();
            lift_generator(&gen).unwrap()
        };
        let f = make(0.0);
        let samples = CompactSampleSet::new(random_signals(3, 10, 41), "E").unwrap();

        let (full, gen) = generator_distance(&f, &f, &samples, &d).unwrap();
        assert_eq!((full, gen), (0.0, 0.0));

        let f2 = make(2.5);
        let (full, gen) = generator_distance(&f, &f2, &samples, &d).unwrap();
        assert!((full - 2.5).abs() < 1e-12);
        assert!((gen - 2.5).abs() < 1e-12);
    }

    #[test]
    fn isometry_on_closed_samples() {
        let (_, d) = s3_setup();
        let lift_poly = |a: f64, b: f64| {
            let gen = GeneratorMap::new(
                Arc::new(move |x: &Signal| {
                    let s: f64 = x.values().iter().sum();
                    Signal::from(vec![a * x.get(0) * x.get(0) + b * s])
                }),
                Arc::clone(&d),
                Arc::clone(&d),
            )
            .unwrap();
            lift_generator(&gen).unwrap()
        };
        let f = lift_poly(1.0, 0.25);
        let f2 = lift_poly(0.75, 0.5);
        // Close the sample set under the S3 action.
        let mut signals = Vec::new();
        for x in random_signals(3, 8, 59) {
            for g in d.group().elements() {
                signals.push(translate(g, &x, d.action()).unwrap());
            }
        }
        let closed = CompactSampleSet::new(signals, "closure").unwrap();
        let (full, gen) = generator_distance(&f, &f2, &closed, &d).unwrap();
        assert!(
            (full - gen).abs() < 1e-12,
            "full {full} vs generator {gen}"
        );
    }
}
