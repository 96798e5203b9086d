//! Weak-probe absorption of a Doppler-broadened Λ-type three-level atom
//! driven by a strong coupling laser.
//!
//! The pipeline runs from parameter records ([`model`]) through the
//! single-velocity steady state ([`bloch`]) and the thermal average
//! ([`doppler`]) to line analysis ([`analysis`]). All routines are generic
//! over [`Real`]; the `*F64` aliases below name the concrete types the CLI
//! uses.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod bloch;
pub mod cli;
pub mod config;
pub mod doppler;
pub mod error;
pub mod linalg;
pub mod model;
pub mod num;

pub use error::{Error, FitError, Result, ValidationReport};
pub use num::Real;

pub type AtomSpecF64 = model::AtomSpec<f64>;
pub type FieldSpecF64 = model::FieldSpec<f64>;
pub type EnsembleSpecF64 = model::EnsembleSpec<f64>;
pub type ScanGridF64 = model::ScanGrid<f64>;
pub type SpectrumF64 = model::Spectrum<f64>;
pub type PeakFitF64 = model::PeakFit<f64>;
pub type RunConfigF64 = config::RunConfig<f64>;
pub type QuadratureF64 = doppler::Quadrature<f64>;
pub type DensityMatrixF64 = bloch::DensityMatrix<f64>;

pub type AtomSpecF32 = model::AtomSpec<f32>;
pub type FieldSpecF32 = model::FieldSpec<f32>;
pub type EnsembleSpecF32 = model::EnsembleSpec<f32>;
pub type SpectrumF32 = model::Spectrum<f32>;
pub type PeakFitF32 = model::PeakFit<f32>;
