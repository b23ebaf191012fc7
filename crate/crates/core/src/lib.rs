//! Numerical machinery for symmetry reduction of mechanical systems:
//! momentum maps, mechanical connections, locked inertia tensors, amended
//! potentials, horizontal lifts, and the phase decomposition of reconstructed
//! motion, instantiated for the free rigid body, the heavy top, and a charged
//! particle in a magnetic field. Every formula is cross-checked against
//! brute-force integration of the unreduced dynamics.

pub mod error;
pub mod heavytop;
pub mod integrate;
pub mod kaluza;
pub mod liegroup;
pub mod mechsys;
pub mod rigidbody;
pub mod selftest;

pub use error::{Error, Result};
