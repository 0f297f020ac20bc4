use std::fmt;

/// Errors raised across the crate. Typed variants carry enough context to
/// tell which contract was violated and where.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Length or dimension mismatch between two objects that must agree.
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// An index id fell outside its index set.
    IndexOutOfRange { index: usize, size: usize },
    /// The supplied tables do not describe a group (Latin square, identity,
    /// inverse, or associativity failure).
    NotAGroup(String),
    /// Point stabilizers differ across orbits: condition (C1) has no common
    /// stabilizer type. The two offending orbits are reported by their
    /// smallest index ids.
    NonUniformStabilizer {
        orbit_a: usize,
        orbit_b: usize,
        order_a: usize,
        order_b: usize,
    },
    /// Action or decomposition does not match the object it is used with.
    ActionMismatch(String),
    /// The codomain stabilizer is not contained in the domain stabilizer
    /// (includes the invariant case where it equals the whole group).
    StabilizerNotNested { missing_element: usize },
    /// The first-layer measure puts mass where the invariant measure has none.
    NotAbsolutelyContinuous { index: usize },
    /// The supplied measure is not invariant under the group action.
    NoInvariantMeasure(String),
    /// A kernel on the full symmetric-group action must take exactly one
    /// value on the diagonal and one off it.
    NotSymmetricInvariant(String),
    /// The action is not the left-translation action of the group on itself.
    NotLeftTranslation,
    /// Training produced a non-finite loss.
    DivergedFit { epoch: usize, loss: f64 },
    /// Only cyclic quotients carry the circular mollifier.
    MollifierUnsupported(String),
    /// Construction is capped at a desk-scale order.
    OrderTooLarge { requested: usize, max: usize },
    /// Malformed serialized input.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SizeMismatch {
                what,
                expected,
                got,
            } => write!(f, "size mismatch in {what}: expected {expected}, got {got}"),
            Error::IndexOutOfRange { index, size } => {
                write!(f, "index {index} out of range for index set of size {size}")
            }
            Error::NotAGroup(msg) => write!(f, "not a group: {msg}"),
            Error::NonUniformStabilizer {
                orbit_a,
                orbit_b,
                order_a,
                order_b,
            } => {
                if order_a != order_b {
                    write!(
                        f,
                        "stabilizer orders differ across orbits {orbit_a} (order {order_a}) and {orbit_b} (order {order_b})"
                    )
                } else {
                    write!(
                        f,
                        "stabilizers of orbits {orbit_a} and {orbit_b} have order {order_a} but are not conjugate"
                    )
                }
            }
            Error::ActionMismatch(msg) => write!(f, "action mismatch: {msg}"),
            Error::StabilizerNotNested { missing_element } => write!(
                f,
                "codomain stabilizer not contained in domain stabilizer (element {missing_element} missing)"
            ),
            Error::NotAbsolutelyContinuous { index } => write!(
                f,
                "first-layer measure is not absolutely continuous: mass at index {index} where the invariant measure vanishes"
            ),
            Error::NoInvariantMeasure(msg) => write!(f, "no invariant measure: {msg}"),
            Error::NotSymmetricInvariant(msg) => {
                write!(f, "not a symmetric-group invariant kernel: {msg}")
            }
            Error::NotLeftTranslation => {
                write!(f, "action is not left translation of the group on itself")
            }
            Error::DivergedFit { epoch, loss } => {
                write!(f, "fit diverged at epoch {epoch} with loss {loss}")
            }
            Error::MollifierUnsupported(msg) => write!(f, "mollifier unsupported: {msg}"),
            Error::OrderTooLarge { requested, max } => {
                write!(f, "order {requested} exceeds supported maximum {max}")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
