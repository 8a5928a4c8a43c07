//! Spin-orbit-coupled spin-1/2 particle in a symmetric double well under a
//! periodically modulated Rabi coupling.
//!
//! Units: `hbar = M = 1`. The crate provides the stationary eigenstructure,
//! split-step wave-packet dynamics with observables, the reduced four-state
//! model with its Floquet quasienergies, and the effective two-level analytics.

pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod io;
pub mod model;
pub mod observables;
pub mod stationary;

pub use error::{Error, Result};
pub use model::{normalize, potential, ModelParams, SpatialGrid, SpinorField};
pub use stationary::{build_h0, lowest_four, EigenSolution, Level};
