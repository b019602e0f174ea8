//! Numerical laboratory for exponential systems `E(Λ) = {e^{2πiλt}}` on
//! spectra `S ⊂ ℝ` given as finite unions of intervals.
//!
//! Modules, bottom-up:
//! - [`spectrum`]: the set `S`, its measure and `1̂_S`.
//! - [`pointset`]: frequency generators, windows, separation, density.
//! - [`specmat`]: Gram assembly and Hermitian spectral primitives.
//! - [`frames`]: frame operator, frame-measure, critical-density scans.
//! - [`hull`]: local matching, weak distance, orbits and repetitivity.

pub mod error;
pub mod frames;
pub mod hull;
pub mod numeric;
pub mod pointset;
pub mod specmat;
pub mod spectrum;

pub use error::{LabError, Result};
pub use pointset::{FrequencyGenerator, WindowedPointSet};
pub use specmat::HermitianMatrix;
pub use num_complex::Complex64;
pub use spectrum::Spectrum;
