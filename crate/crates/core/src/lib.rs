//! Positive-definite isotropic kernels on the sphere `S^d`.
//!
//! Schoenberg and Fourier coefficient sequences by closed form, projection
//! from the Hilbert sphere and a quadrature oracle; Sobolev order of the
//! native space from coefficient decay; kernel cubature and worst-case
//! errors.
//!
//! Everything numeric is generic over [`Real`]; the aliases below fix the
//! scalar to `f64`.

pub mod cubature;
pub mod error;
pub mod kernels;
pub mod quadrature;
pub mod real;
pub mod schoenberg;
pub mod sobolev;
pub mod specfun;

pub use cubature::{
    discrepancy_between, generate_points, optimal_weights, rate_study, worst_case_error,
    CubatureOptions, Generator, WeightMode,
};
pub use error::{Error, Result};
pub use kernels::{eval_kernel, Family};
pub use real::Real;
pub use schoenberg::{
    reconstruct_kernel, schoenberg_coeffs, CoeffOptions, Dim, Provenance, Route, Truncation,
};
pub use sobolev::{fit_decay, FitRange};

/// Default scalar.
pub type Scalar = f64;

pub type Kernel = kernels::IsotropicKernel<Scalar>;
pub type Point = kernels::SpherePoint<Scalar>;
pub type Sequence = schoenberg::SchoenbergSequence<Scalar>;
pub type Fourier = schoenberg::FourierSequence<Scalar>;
pub type Harmonics = sobolev::HarmonicCoefficients<Scalar>;
pub type Fit = sobolev::DecayFit<Scalar>;
pub type Rule = cubature::CubatureRule<Scalar>;
pub type Report = cubature::DiscrepancyReport<Scalar>;
pub type Study = cubature::RateStudy<Scalar>;
