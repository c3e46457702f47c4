//! Nearly tight frames of spin-weighted wavelets on the sphere.
//!
//! The library builds scale-discretized wavelet systems for spin-s fields on
//! S²: spectral kernels of filtered spin Laplacians, wavelets centered on
//! diameter-certified partitions, frame analysis and dual-frame
//! reconstruction, plus empirical diagnostics for admissibility bounds,
//! near-diagonal kernel localization and compact support.

pub mod diagnostics;
pub mod error;
pub mod filters;
pub mod frames;
pub mod harmonics;
pub mod io;
pub mod sphere;

pub use error::{Error, Result};
