//! Six-vertex lattice toolkit for the ferroelectric/stochastic regime:
//! phase-diagram geometry, exact small-domain enumeration, seeded Markovian
//! sampling, boundary sparsification, regularity statistics and constructive
//! ensemble extension.

pub mod exact;
pub mod extend;
pub mod lattice;
pub mod regularity;
pub mod restrict;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod weights;

pub use scalar::{Exact, Real, Scalar};

/// Concrete f64 aliases for the generic weight algebra.
pub type Weights = weights::WeightSystem<f64>;
pub type WeightsExact = weights::WeightSystem<Exact>;
pub type Stochastic = weights::StochasticParams<f64>;
pub type Slope = weights::SlopePair<f64>;
pub type Gauge = weights::GaugeParams<f64>;
