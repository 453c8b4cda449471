//! Discrete harmonic maps of weighted graphs on closed hyperbolic surfaces,
//! minimization of their energy over Teichmüller space, and weighted
//! Delaunay certificates.

pub mod cli_io;
pub mod complex;
pub mod delaunay_cert;
pub mod dual_cocycle;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod fuchsian;
pub mod harmonic;
pub mod minkowski;
pub mod surface;
pub mod teich_opt;
pub mod tol;
pub mod word;

pub use error::{Error, Result};
pub use tol::Tolerances;
