//! Numerical laboratory for operator-Lipschitz estimates in Schatten
//! quasi-Banach ideals.
//!
//! The crate is organised bottom-up:
//!
//! * [`matrix`] and [`spectral`]: dense complex matrices, singular spectra,
//!   Schatten and weak quasi-norms, functional calculus, submajorization and
//!   the cut projection.
//! * [`schur`]: Schur products, divided-difference matrices, certified lower
//!   bounds on `m_p` multiplier norms, Toeplitz `m_1` upper bounds, block
//!   diagonal combination and the tensor inflation identity.
//! * [`wavelet`] and [`besov`]: Daubechies systems, wavelet coefficients,
//!   level projections and homogeneous Besov seminorms (wavelet and
//!   Littlewood-Paley paths).
//! * [`experiments`]: seeded ensembles and the experiment drivers.
//! * [`config`]: the textual key-value run configuration shared with the CLI.

pub mod besov;
pub mod config;
pub mod error;
pub mod experiments;
pub mod function;
pub mod matrix;
pub mod rng;
pub mod schur;
pub mod spectral;
pub mod wavelet;

pub use error::{Error, Result};
pub use function::{FunctionTag, ScalarFunction};
pub use matrix::{CMatrix, C64};
pub use schur::{
    block_diagonal_bound, divided_difference_matrix, inflate, mp_lower_bound, schur_product,
    toeplitz_m1_upper, verify_inflation_identity, DividedDifferenceMatrix, InflationWitness,
    MpConfig, MultiplierEstimate,
};
pub use spectral::{
    apply_complex_function, apply_function, cut_projection, schatten_norm, singular_values,
    submajorization_holds, weak_norm, CutCertificate, HermitianOperator, SchattenIndex,
    SingularSpectrum,
};
pub use wavelet::{daubechies_system, WaveletCoefficients, WaveletSystem};
