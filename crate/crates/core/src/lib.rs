//! Linear secret sharing with access-structure contraction.
//!
//! * [`galois`]: prime-field arithmetic and matrix algebra.
//! * [`access`]: explicit monotone access structures and contraction.
//! * [`msp`]: monotone span programs, Shamir, and the contraction transforms.
//! * [`relocate`]: moving shares off removed servers (lc, ps, is, cs).
//! * [`simcloud`]: scenario-driven storage simulation and sweeps.
//! * [`abe`]: CP-ABE with ciphertext contraction over an abstract pairing.

pub mod abe;
pub mod access;
pub mod error;
pub mod galois;
pub mod msp;
pub mod relocate;
pub mod simcloud;

pub use access::{AccessStructure, ParticipantSet};
pub use error::{Error, Result};
pub use galois::{Fe, Field, FieldMatrix};
pub use msp::{Msp, ShareVector};
