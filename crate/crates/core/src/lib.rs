//! Dissipative spectral form factor (DSFF) of real and complex i.i.d. random
//! matrices.
//!
//! The crate has two halves that check each other:
//!
//! * analytic predictions ([`theory`]) built from Bessel series ([`bessel`])
//!   and disk integrals ([`quadrature`]);
//! * Monte Carlo: i.i.d. matrix ensembles ([`ensembles`]), their spectra
//!   ([`spectra`]) and an unbiased DSFF estimator ([`estimator`]).
//!
//! [`verify`] bundles the deterministic identities both halves must satisfy.

pub mod bessel;
pub mod ensembles;
pub mod estimator;
pub mod quadrature;
pub mod spectra;
pub mod sum;
pub mod theory;
pub mod verify;

pub use num_complex::Complex64;

pub use bessel::{BesselError, BesselPolicy, SeriesWeight};
pub use ensembles::{EnsembleSpec, EntryDistribution, Field, MatrixSample};
pub use estimator::{build_tau_grid, dsff_grid, dsff_point, linear_stat, DsffEstimate, Spacing};
pub use quadrature::DiskGrid;
pub use spectra::{SpectraError, SpectrumSample, SpectrumSet};
pub use theory::{ComplexTime, GinibreExact, Symmetry, Theory, TheoryError, TheoryPrediction};
