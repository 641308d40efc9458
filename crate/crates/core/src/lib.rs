//! Velocity statistics of an ideal gas whose N molecules share a fixed
//! total kinetic energy.
//!
//! When every admissible velocity state on the constant-energy shell is
//! equally likely, one molecule's velocity follows a bounded power-law
//! density that only approaches the familiar Gaussian as N grows. This
//! crate evaluates that finite-N law and its Gaussian limit (densities,
//! CDFs, moments, the mean-speed correction factor γ(N)), draws exact
//! seeded samples from it, runs an energy-conserving pair-collision
//! simulation that must reproduce it independently, and provides the
//! quadrature and statistical machinery used to verify all of the above.

pub mod analysis;
pub mod distribution;
mod error;
pub mod sampler;
pub mod shellsim;
pub mod specialfn;

pub use error::{Error, Result};
