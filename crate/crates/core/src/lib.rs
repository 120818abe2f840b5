//! Numerical harmonic analysis on simply connected nilpotent Lie groups.
//!
//! Groups are given by structure constants and handled in exponential
//! coordinates. The crate builds induced representations from Vergne
//! polarizations, assembles group Fourier transforms as integral operators
//! on `L^2(H\G)`, and checks the kernel factorization, the Plancherel
//! constant and the vanishing sets of kernels on sampled test functions.

pub mod catalog;
pub mod chirpz;
pub mod error;
pub mod functions;
pub mod grid;
pub mod induce;
pub mod interp;
pub mod interval;
pub mod lie;
pub mod linalg;
pub mod orbits;
pub mod transform;

pub use catalog::{get_group, GroupBundle};
pub use error::{Error, Result};
pub use grid::{Axis, GridSpec};
pub use induce::{InducedRep, RepFamily, XPoint};
pub use lie::{AlgebraElement, GroupElement, StructureConstants};
pub use orbits::{DualChart, LinearFunctional, Polarization};
