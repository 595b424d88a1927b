//! Forward scattering by random periodic gratings, Monte Carlo shape
//! reconstruction from far-field data, and estimation of the surface
//! statistics from the reconstructed ensemble.

pub mod config;
pub mod error;
pub mod forward;
pub mod harness;
pub mod inversion;
pub mod linalg;
pub mod oracle;
pub mod profile;
pub mod rng;
pub mod stats;
pub mod surface;
pub mod waves;

pub use error::{Error, ErrorKind, Result};
