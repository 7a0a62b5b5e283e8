//! Location-aware uplink beam planning for massive-MIMO mobile relays on
//! high-speed trains.
//!
//! The crate is organised bottom-up:
//!
//! * [`array`] - closed-form beam geometry of a uniform linear array
//!   (beamwidth, directivity, beam indexing, rail-projected beam bounds).
//! * [`positioning`] - Gaussian positioning-error model and the doubling
//!   search for the largest beam count that keeps the serving beam on the
//!   base station with a required probability.
//! * [`codebook`] - the offline phase-excitation table, steering vectors,
//!   array-factor evaluation and location-driven beam selection.
//! * [`encounter`] - the two-train encounter model: phase partition,
//!   channel-inversion power allocation and rate-region construction.
//! * [`harness`] - configuration loading, experiment sweeps and CSV output
//!   used by the `hst-beam` binary.
//!
//! All angles are radians unless a name says otherwise.

pub mod array;
pub mod codebook;
pub mod encounter;
pub mod error;
pub mod harness;
pub mod positioning;
pub mod quadrature;
pub mod table;
pub mod units;

pub use array::{ArrayConfig, ArrayType, BeamGeometry, RailGeometry};
pub use codebook::{BeamSelection, BeamWeight, PhaseMapper, SteeringVector, TraverseLog};
pub use encounter::{AllocationProfile, EncounterScenario, PhasePartition, RateRegion};
pub use error::{Error, Result};
pub use positioning::{PositioningModel, SearchMode, SearchResult};
