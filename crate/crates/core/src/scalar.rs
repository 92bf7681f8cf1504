use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the clustering math is written against.
///
/// Implemented for `f32` and `f64`. `Display` and `FromStr` are required so
/// datasets round-trip through text exactly (Rust prints the shortest
/// representation that parses back to the same value).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for random draws and constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count is representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Squared Euclidean distance between two equal-length slices.
#[inline]
pub fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// Threshold above which sums switch to pairwise summation.
pub const PAIRWISE_THRESHOLD: usize = 4096;

const PAIRWISE_BLOCK: usize = 256;

/// Sum of a slice: sequential up to [`PAIRWISE_THRESHOLD`] terms, pairwise
/// (tree) summation beyond. The order is a fixed function of the length.
pub fn stable_sum<T: Scalar>(values: &[T]) -> T {
    if values.len() <= PAIRWISE_THRESHOLD {
        values.iter().copied().fold(T::zero(), |a, b| a + b)
    } else {
        pairwise(values)
    }
}

fn pairwise<T: Scalar>(values: &[T]) -> T {
    if values.len() <= PAIRWISE_BLOCK {
        values.iter().copied().fold(T::zero(), |a, b| a + b)
    } else {
        let mid = values.len() / 2;
        pairwise(&values[..mid]) + pairwise(&values[mid..])
    }
}
