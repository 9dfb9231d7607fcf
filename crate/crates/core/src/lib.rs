//! Simulation and analysis engine for a dual-type trapped-ion quantum-network
//! node: heralded ion-photon entanglement over fiber links, rate and
//! infidelity budgets, memory-qubit noise models, crosstalk estimators,
//! discrete-event protocol Monte Carlo, entanglement-swapping performance
//! curves, and measurement/estimation tooling (tomography, histogram fits,
//! frequency-conversion models).
//!
//! The crate is organised around a small dense linear-algebra engine for
//! composite Hilbert spaces up to dimension 64 ([`quantum`]), parametric
//! noise channels ([`noise`]), the three heralding primitives ([`herald`]),
//! analytic ledgers ([`budget`], [`crosstalk`]), the protocol simulator
//! ([`protocol`]), estimation routines ([`analysis`]) and named parameter
//! scenarios ([`scenario`]).
//!
//! All state types are immutable values after construction and all
//! operations are pure functions, so everything here is safe to share
//! across threads; the Monte Carlo entry points use rayon internally with
//! per-trial counter-based RNG streams so results are independent of the
//! worker count.

pub mod analysis;
pub mod budget;
pub mod crosstalk;
pub mod error;
pub mod herald;
pub mod linalg;
pub mod noise;
pub mod numeric;
pub mod protocol;
pub mod quantum;
pub mod scenario;

pub use error::{Error, Result};
pub use quantum::QuantumState;
