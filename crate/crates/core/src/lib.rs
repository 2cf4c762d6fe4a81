//! Pseudo-spectral Navier–Stokes on the periodic box T³ together with the
//! two-point statistics and exact scale-space relations built on top of it.
//!
//! Layers, bottom up: [`grid`], [`fft`] and [`field`] hold the band-limited
//! representation; [`forcing`] and [`solver`] evolve it; [`quadrature`] and
//! [`stats`] evaluate structure functions and correlators; [`laws`]
//! assembles residuals of the exact relations.

pub mod error;
pub mod fft;
pub mod field;
pub mod forcing;
pub mod grid;
pub mod laws;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod quadrature;
pub mod snapshot;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
pub use fft::Fft3;
pub use field::{Norms, PhysicalField, SpectralField};
pub use grid::GridSpec;
