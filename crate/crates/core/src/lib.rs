//! Scattering of a two-particle bound system at delta-function mirrors.
//!
//! The internal (relative) coordinate is expanded in the eigenbasis of the
//! binding potential, which turns the two-dimensional problem into a set of
//! coupled one-dimensional channels for the center-of-mass coordinate.

pub mod basis;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod mirror1d;
pub mod observables;
pub mod resonance;
pub mod stationary;
pub mod wkb;

pub use basis::{BindingBasis, BindingKind, MirrorConfig, PotentialMatrix};
pub use error::{Error, Result};
pub use evolution::{init_wavepacket, ChannelField, SplitStepPropagator, WavepacketSpec};
pub use grid::SpatialGrid;
