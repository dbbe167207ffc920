//! Lattice point counting errors of ellipses and the covariance between two
//! such errors, together with the arithmetic constants (representation
//! numbers, L-values, local densities) that describe their asymptotics.

pub mod arith;
pub mod counting;
pub mod covariance;
pub mod error;
pub mod fit;
pub mod io;
pub mod lattice;
pub mod quadform;
pub mod singular;

pub use counting::{
    connection_defect, eigen_count, eigen_error, error_normalized, lattice_count, sample_error, sample_error_with,
    window_error, CountTable, EigenDomain, Eigenvalue, ErrorSamples, GridSpec, WindowNorm,
};
pub use error::{Error, Result};
pub use quadform::{
    common_frequencies, curvature_radius, enumerate_spectrum, freq_coefficient, y_key, CommonFrequency, FreqKey,
    QuadForm, Spectrum, SpectrumEntry,
};
