//! Spectral Galerkin truncations of the periodic Navier-Stokes equations in
//! Fourier space: the vector field, lattice-sum constants, trapping regions
//! with their boundary certification, and the log-norm error machinery for
//! comparing projections.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod flow;
pub mod lattice;
pub mod sampling;
pub mod spectral;
pub mod trapping;

pub use error::{Error, Invariant, Result};
pub use spectral::{Dim, ForceField, Mode, ModeSet, PhysicsParams, SpectralField};
