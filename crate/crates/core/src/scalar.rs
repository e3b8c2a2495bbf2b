//! Numeric bounds shared by the solvers.
//!
//! Cost-side algorithms (the transportation solver, QAP objectives, TSP) only
//! need ordered field arithmetic, so they are generic over [`Scalar`]. This
//! admits `f32`, `f64` and exact rationals such as `num_rational::Ratio<i64>`.
//! Anything that takes a square root (geometry, cost functions) additionally
//! requires [`num_traits::Float`].

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Ordered numeric type usable as a transport or tour cost.
pub trait Scalar:
    Num + Copy + PartialOrd + Debug + Sum + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Multiply by a nonnegative integer count.
    #[inline]
    fn times(self, count: u64) -> Self {
        Self::from_u64(count).expect("flow count representable in scalar") * self
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + Debug + Sum + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// `a < b` for partially ordered scalars, treating incomparable as "not less".
#[inline]
pub(crate) fn lt<T: PartialOrd>(a: T, b: T) -> bool {
    matches!(a.partial_cmp(&b), Some(std::cmp::Ordering::Less))
}
