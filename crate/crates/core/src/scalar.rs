//! Floating point abstraction shared by the clustering and layout code.
//!
//! Geometry is computed in pixels and the temporal axis is normalized to
//! `[0, 100]`; neither needs more than `f32`, but callers that compare layouts
//! across runs usually want `f64`. Everything numeric in this crate is generic
//! over [`Scalar`] and the crate root exposes `f64` aliases.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts a literal. Only used with small, finite constants.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Maximum of two scalars that never propagates NaN from the left operand.
#[inline]
pub(crate) fn max<S: Scalar>(a: S, b: S) -> S {
    if a >= b {
        a
    } else {
        b
    }
}

#[inline]
pub(crate) fn min<S: Scalar>(a: S, b: S) -> S {
    if a <= b {
        a
    } else {
        b
    }
}
