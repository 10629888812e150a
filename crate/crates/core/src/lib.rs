//! Reconstruction of piecewise-smooth functions on `(0, 1)` from nonuniform
//! samples of their Fourier transform by weighted least squares, together
//! with the stability and approximation quantities that govern it.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod io;
pub mod plot;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod solver;
pub mod spaces;
pub mod special;

pub use error::{Error, Result};
