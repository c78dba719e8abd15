//! Qubit random access codes and their temporal (Leggett-Garg type) counterparts.
//!
//! The crate computes success probabilities of n↦1 random access codes, the
//! signed two-time correlator sums `K` that bound them, classical and
//! no-signaling maxima, seesaw optimization of the quantum value, and
//! linear-programming certificates of min-entropy under no-signaling-in-time
//! constraints.

pub mod bloch;
pub mod certify;
pub mod classical;
pub mod error;
pub mod optimizer;
pub mod rac;
pub mod simplex;
pub mod temporal;

pub use bloch::{BlochVector, Projector};
pub use error::{Error, Result};
pub use rac::RacStrategy;
pub use temporal::{SignMatrix, TemporalStrategy};
