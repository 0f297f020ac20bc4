//! Dense real-valued functions on finite index sets, point-mass measures,
//! restriction maps, and sup-norm computations.
//!
//! Integrals against a [`WeightedMeasure`] are exact weighted sums, so the
//! affine and convolution layers built on top of them are exact on finite
//! index sets rather than quadrature approximations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real-valued function on a finite index set, stored densely.
/// Serializes as a flat JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signal {
    values: Vec<f64>,
}

impl Signal {
    /// All values must be finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite signal value at index {i}")));
        }
        Ok(Signal { values })
    }

    pub fn zeros(len: usize) -> Self {
        Signal {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: usize) -> f64 {
        self.values[s]
    }
}

impl From<Vec<f64>> for Signal {
    fn from(values: Vec<f64>) -> Self {
        Signal { values }
    }
}

/// A point-mass measure on a finite index set: one non-negative weight per
/// index id. Serializes as a flat JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightedMeasure {
    weights: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Parse(format!(
                "measure weight at index {i} must be finite and non-negative"
            )));
        }
        Ok(WeightedMeasure { weights })
    }

    /// The counting measure: unit mass on every index.
    pub fn counting(len: usize) -> Self {
        WeightedMeasure {
            weights: vec![1.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, s: usize) -> f64 {
        self.weights[s]
    }

    pub fn is_counting(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }
}

/// A finite sample of signals standing in for a compact set of inputs.
/// Every sup-over-the-set quantity computed from it is a certified lower
/// bound of the true sup. Serializes as an array of arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSampleSet {
    pub signals: Vec<Signal>,
    pub label: String,
}

impl CompactSampleSet {
    /// All member signals must share one index set size.
    pub fn new(signals: Vec<Signal>, label: impl Into<String>) -> Result<Self> {
        if let Some(first) = signals.first() {
            let n = first.len();
            for (i, s) in signals.iter().enumerate() {
                if s.len() != n {
                    return Err(Error::SizeMismatch {
                        what: "sample set member",
                        expected: n,
                        got: s.len(),
                    });
                }
                let _ = i;
            }
        }
        Ok(CompactSampleSet {
            signals,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }
}

impl Serialize for CompactSampleSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.signals.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CompactSampleSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let signals = Vec::<Signal>::deserialize(deserializer)?;
        CompactSampleSet::new(signals, "").map_err(serde::de::Error::custom)
    }
}

/// Restriction of a signal to a list of index ids, in the order given.
pub fn restrict(x: &Signal, indices: &[usize]) -> Result<Signal> {
    let mut out = Vec::with_capacity(indices.len());
    for &s in indices {
        if s >= x.len() {
            return Err(Error::IndexOutOfRange {
                index: s,
                size: x.len(),
            });
        }
        out.push(x.get(s));
    }
    Ok(Signal::from(out))
}

/// Supremum-norm distance between two signals of equal length.
pub fn sup_norm_diff(x: &Signal, y: &Signal) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch {
            what: "sup_norm_diff operands",
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(x.values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Outcome of the absolute-continuity check `mu << nu`.
///
/// When it holds, `derivative` is the pointwise density d(mu)/d(nu) with the
/// convention 0/0 = 0; those points carry no mass in either integral.
#[derive(Debug, Clone, PartialEq)]
pub enum AbsoluteContinuity {
    Holds { derivative: Vec<f64> },
    /// First index where nu vanishes but mu does not.
    Fails { index: usize },
}

impl AbsoluteContinuity {
    pub fn holds(&self) -> bool {
        matches!(self, AbsoluteContinuity::Holds { .. })
    }
}

/// True iff every nu-null point is mu-null; on success also returns the
/// pointwise Radon-Nikodym derivative.
pub fn is_absolutely_continuous(
    mu: &WeightedMeasure,
    nu: &WeightedMeasure,
) -> Result<AbsoluteContinuity> {
    if mu.len() != nu.len() {
        return Err(Error::SizeMismatch {
            what: "absolute-continuity operands",
            expected: mu.len(),
            got: nu.len(),
        });
    }
    let mut derivative = Vec::with_capacity(mu.len());
    for s in 0..mu.len() {
        let (m, n) = (mu.get(s), nu.get(s));
        if n == 0.0 {
            if m != 0.0 {
                return Ok(AbsoluteContinuity::Fails { index: s });
            }
            derivative.push(0.0);
        } else {
            derivative.push(m / n);
        }
    }
    Ok(AbsoluteContinuity::Holds { derivative })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restrict_direct() {
        let x = Signal::from(vec![1.0, 2.0, 3.0]);
        assert_eq!(restrict(&x, &[0]).unwrap().values(), &[1.0]);
        assert_eq!(restrict(&x, &[0, 1, 2]).unwrap(), x);
        let y = Signal::from(vec![4.0, 8.0, 15.0, 16.0]);
        assert_eq!(restrict(&y, &[1, 3]).unwrap().values(), &[8.0, 16.0]);
    }

    #[test]
    fn restrict_out_of_range() {
        let x = Signal::from(vec![1.0, 2.0]);
        assert!(matches!(
            restrict(&x, &[5]),
            Err(Error::IndexOutOfRange { index: 5, size: 2 })
        ));
    }

    #[test]
    fn restrict_is_linear() {
        let x = Signal::from(vec![1.0, -2.0, 3.5, 0.25]);
        let y = Signal::from(vec![0.5, 4.0, -1.0, 2.0]);
        let (a, b) = (2.5, -0.75);
        let b_set = [0, 2, 3];
        let combo: Vec<f64> = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(u, v)| a * u + b * v)
            .collect();
        let lhs = restrict(&Signal::from(combo), &b_set).unwrap();
        let rx = restrict(&x, &b_set).unwrap();
        let ry = restrict(&y, &b_set).unwrap();
        for i in 0..b_set.len() {
            assert_eq!(lhs.get(i), a * rx.get(i) + b * ry.get(i));
        }
    }

    #[test]
    fn sup_norm_cases() {
        let x = Signal::from(vec![1.0, 2.0]);
        assert_eq!(sup_norm_diff(&x, &x).unwrap(), 0.0);
        let z = Signal::from(vec![0.0, 0.0]);
        let w = Signal::from(vec![3.0, -4.0]);
        assert_eq!(sup_norm_diff(&z, &w).unwrap(), 4.0);
        assert!(sup_norm_diff(&x, &Signal::from(vec![1.0])).is_err());
    }

    #[test]
    fn sup_norm_matches_elementwise_oracle() {
        // Brute-force oracle: scan every coordinate.
        let x = Signal::from(vec![0.3, -1.7, 2.2, 0.0, 5.5]);
        let y = Signal::from(vec![-0.2, 1.0, 2.0, 4.0, 5.0]);
        let mut best = 0.0f64;
        for i in 0..x.len() {
            let d = (x.get(i) - y.get(i)).abs();
            if d > best {
                best = d;
            }
        }
        assert_eq!(sup_norm_diff(&x, &y).unwrap(), best);
    }

    #[test]
    fn absolute_continuity_cases() {
        let counting = WeightedMeasure::counting(3);
        match is_absolutely_continuous(&counting, &counting).unwrap() {
            AbsoluteContinuity::Holds { derivative } => {
                assert_eq!(derivative, vec![1.0, 1.0, 1.0])
            }
            _ => panic!("counting << counting"),
        }

        let mu = WeightedMeasure::new(vec![1.0, 0.0, 0.0]).unwrap();
        match is_absolutely_continuous(&mu, &counting).unwrap() {
            AbsoluteContinuity::Holds { derivative } => {
                assert_eq!(derivative, vec![1.0, 0.0, 0.0])
            }
            _ => panic!("mu << counting"),
        }

        let mu = WeightedMeasure::new(vec![0.0, 1.0, 0.0]).unwrap();
        let nu = WeightedMeasure::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            is_absolutely_continuous(&mu, &nu).unwrap(),
            AbsoluteContinuity::Fails { index: 1 }
        );
    }

    #[test]
    fn derivative_reproduces_mu_exactly() {
        let mu = WeightedMeasure::new(vec![0.5, 0.0, 3.0, 0.0]).unwrap();
        let nu = WeightedMeasure::new(vec![2.0, 0.0, 1.5, 4.0]).unwrap();
        match is_absolutely_continuous(&mu, &nu).unwrap() {
            AbsoluteContinuity::Holds { derivative } => {
                for s in 0..mu.len() {
                    assert_eq!(mu.get(s), derivative[s] * nu.get(s));
                }
            }
            _ => panic!("mu << nu"),
        }
    }

    #[test]
    fn signal_rejects_non_finite() {
        assert!(Signal::new(vec![1.0, f64::NAN]).is_err());
        assert!(WeightedMeasure::new(vec![-1.0]).is_err());
    }

    #[test]
    fn sample_set_requires_uniform_length() {
        let ok = CompactSampleSet::new(
            vec![Signal::from(vec![1.0, 2.0]), Signal::from(vec![3.0, 4.0])],
            "e",
        );
        assert!(ok.is_ok());
        let bad = CompactSampleSet::new(
            vec![Signal::from(vec![1.0, 2.0]), Signal::from(vec![3.0])],
            "e",
        );
        assert!(bad.is_err());
    }
}
