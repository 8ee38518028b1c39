//! Desk-scale laboratory for bosonic mean-field dynamics.
//!
//! The crate couples three layers:
//!
//! * [`lattice`] — a periodic 1D grid with discrete differential operators,
//!   convolution and `L^p` norms,
//! * [`meanfield`] — a Hartree solver for the condensate orbital, and
//!   [`fock`] — exact N-boson propagation in the symmetric occupation basis,
//! * [`counting`] / [`validation`] — projector-based counting of particles
//!   outside the condensate orbital, together with the identities and
//!   Grönwall-type bounds that tie the N-body flow to the Hartree flow.

pub mod counting;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod meanfield;
pub mod validation;

pub use error::{Error, Result};
