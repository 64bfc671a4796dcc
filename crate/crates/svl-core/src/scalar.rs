//! Scalar trait aliases so the weight algebra and exact engine work over
//! both floating point and arbitrary-precision rational numbers.

use num::BigRational;

/// Anything the weight/partition arithmetic needs: ring ops, order, clone.
pub trait Scalar: Clone + PartialOrd + num::Num {}

impl<T> Scalar for T where T: Clone + PartialOrd + num::Num {}

/// Floating-point scalars (phase geometry, slopes, schedules).
pub trait Real: Scalar + num_traits::Float {}

impl<T> Real for T where T: Scalar + num_traits::Float {}

/// Exact rational scalar used by the enumeration backends.
pub type Exact = BigRational;
