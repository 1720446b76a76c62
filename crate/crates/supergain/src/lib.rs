//! Synthesis of maximum-gain excitation currents for uniform linear arrays
//! under mutual coupling and antenna losses.
//!
//! The crate is organized around the stable spectral decomposition of the
//! prolate/coupling matrix pair:
//!
//! - [`array`]: geometry, current vectors and spectra, and the gain /
//!   directivity / Q functionals for arbitrary excitations.
//! - [`spectrum`]: discrete prolate spheroidal sequences, their
//!   band-concentrated spectra, and the coupling eigenstructure.
//! - [`synthesis`]: closed-form maximum-gain beamforming through the DPSS
//!   expansion, with supergain, Q factor, and conditioning diagnostics.
//! - [`small_spacing`]: closed-form d -> 0 asymptotics (Legendre regime).
//! - [`wide_aperture`]: N -> infinity asymptotics at fixed spacing (WKB
//!   regime): supergain bounds, the loss gap, and the linear-scaling factor.
//! - [`numerics`]: compensated summation, Legendre recurrences, and
//!   Gauss–Legendre quadrature with order doubling.

pub mod array;
pub mod error;
pub mod numerics;
pub mod small_spacing;
pub mod spectrum;
pub mod synthesis;
pub mod wide_aperture;

pub use array::{ArrayConfig, CurrentVector, SpectrumGrid};
pub use error::{Error, Result};
pub use spectrum::{CouplingSpectrum, LossyCoupling, ProlateMatrix};
pub use synthesis::{BeamSolution, BeamSynthesizer, EllipsoidDiagnostics};
