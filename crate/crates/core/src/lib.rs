//! Temporal local variation of graph signals and its use for finding and
//! isolating influential regions in metapopulation epidemics.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: weighted undirected graphs, generators, Laplacian and centrality.
//! - [`spectral`]: Laplacian eigenbasis, graph Fourier transform, high-pass
//!   filtering and an exact spectral graph wavelet transform.
//! - [`variation`]: total, local, temporal and temporal local variation (TLV).
//! - [`epidemic`]: network SIR dynamics and an adaptive RK4 integrator.
//! - [`influence`]: online identification, staged isolation control and the
//!   Monte Carlo alpha sweep.
//!
//! Numerical code is generic over [`Real`] (implemented for `f32` and `f64`);
//! the `*64` aliases below fix the scalar to `f64`.

pub mod epidemic;
pub mod error;
pub mod graph;
pub mod influence;
pub mod rng;
pub mod scalar;
pub mod signal;
pub mod spectral;
pub mod variation;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Graph64 = graph::Graph<f64>;
pub type Laplacian64 = graph::Laplacian<f64>;
pub type Spectrum64 = spectral::Spectrum<f64>;
pub type SignalSeries64 = signal::SignalSeries<f64>;
pub type VariationField64 = variation::VariationField<f64>;
pub type SirParams64 = epidemic::SirParams<f64>;
pub type EpidemicState64 = epidemic::EpidemicState<f64>;
pub type RunRecord64 = epidemic::RunRecord<f64>;
pub type InfluentialSet64 = influence::InfluentialSet<f64>;
pub type ControlOutcome64 = influence::ControlOutcome<f64>;

pub type Graph32 = graph::Graph<f32>;
pub type SignalSeries32 = signal::SignalSeries<f32>;
