//! Scalar abstraction so the core works with `f32` or `f64` weights.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Vertex/edge weight scalar.
///
/// Implemented by `f32` and `f64`. Integer-valued inputs are represented
/// exactly as long as they fit the mantissa (2^53 for `f64`), which covers
/// the common benchmark graphs; all bookkeeping in this crate then stays
/// exact integer arithmetic.
pub trait Weight:
    Float + FromPrimitive + ToPrimitive + Sum + Display + Debug + Default + Send + Sync + 'static
{
}

impl<T> Weight for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Display
        + Debug
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Lossy-but-checked conversion from `f64` used for parameters (epsilon, rho).
pub(crate) fn from_f64<S: Weight>(x: f64) -> S {
    S::from_f64(x).expect("parameter not representable in the weight type")
}

pub(crate) fn from_usize<S: Weight>(x: usize) -> S {
    S::from_usize(x).expect("count not representable in the weight type")
}

/// Formats a weight for text output: integers without a fractional part,
/// everything else via the shortest round-trip representation.
pub(crate) fn format_weight<S: Weight>(w: S) -> String {
    if w.fract() == S::zero() && w.abs() <= from_f64(2f64.powi(53)) {
        if let Some(i) = w.to_i64() {
            return i.to_string();
        }
    }
    format!("{w}")
}
