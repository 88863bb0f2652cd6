//! Simulation and analysis of one-way communication protocols for the
//! Hidden Matching (HM) and Sampling Matching (SM) problems.
//!
//! The crate covers the classical birthday-paradox strategy and its bounds,
//! the ideal fingerprint (qubit) protocol, the coherent-state photonic
//! protocol with loss, limited visibility and dark counts, the search for the
//! optimal mean photon number and quantum-advantage thresholds, and a
//! block-based interferometer phase-drift correction loop.
//!
//! Node and slot indices exposed by the API are 1-based.

pub mod bits;
pub mod classical;
pub mod coherent;
pub mod drift;
pub mod error;
pub mod matchings;
pub mod output;
pub mod qubit;
pub mod resource;
pub mod seed;
pub mod stats;

pub use bits::BitString;
pub use classical::{ClassicalMessage, ErrorEstimate, ProtocolOutcome};
pub use coherent::{
    AbstainPolicy, ClickTrace, CoherentConfig, ImperfectionModel, Protocol, RunRecord, RunStats,
    SimOptions,
};
pub use drift::{BlockLayout, DriftModel, DriftReport};
pub use error::{Error, Result};
pub use matchings::{Edge, Matching, MatchingSet};
pub use qubit::Fingerprint;
pub use resource::{ClassicalBound, ResourcePoint, Threshold, TiMetric};
