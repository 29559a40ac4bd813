//! Unlimited sampling for signals bandlimited in a fractional Fourier domain.
//!
//! A self-reset (modulo) ADC folds every sample into [−λ, λ). This crate
//! simulates that acquisition and undoes it: the folds form a sparse spike
//! train in the first difference of the measurements, and that train is
//! recovered from the part of the fractional spectrum the signal itself
//! cannot occupy.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod frft;
pub mod io;
pub mod linalg;
pub mod modulo;
pub mod reconstruction;
pub mod scalar;
pub mod spectral;
pub mod testbench;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Real;

pub type Angle = frft::FrftAngle<f64>;
pub type Signal = frft::ComplexSignal<f64>;
pub type Spectrum = frft::FrftSpectrum<f64>;
pub type SeriesCoefficients = frft::FrfsCoefficients<f64>;
pub type Folded = modulo::FoldedSamples<f64>;
pub type Residual = modulo::ResidualSequence<f64>;
pub type Spikes = spectral::SpikeTrain<f64>;
pub type Criterion = reconstruction::SamplingCriterion<f64>;
pub type Report = reconstruction::ReconstructionReport<f64>;
pub type Complex64 = num_complex::Complex<f64>;
