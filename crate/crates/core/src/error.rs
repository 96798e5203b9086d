use std::fmt;

use thiserror::Error;

/// One violated invariant, named by the offending field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every invariant that failed during validation, in check order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub(crate) fn push(&mut self, field: &'static str, message: impl Into<String>) {
        self.violations.push(Violation {
            field,
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FitError {
    #[error("fit window holds {found} samples, need at least {needed}")]
    TooFewSamples { found: usize, needed: usize },
    #[error("no interior maximum inside the fit window")]
    NoMaximum,
    #[error("no convergence after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("fit converged to a non-physical line (fwhm {fwhm}, amplitude {amplitude})")]
    NonPhysical { fwhm: f64, amplitude: f64 },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Validation(ValidationReport),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(
        "linewidth formula is indeterminate at zero coupling Rabi frequency and zero detuning"
    )]
    Indeterminate,
    #[error("steady-state system is singular ({0})")]
    Singular(String),
    #[error("solver failed at probe detuning {detuning} MHz, Doppler shift {doppler_shift} MHz: {source}")]
    SolverAt {
        detuning: f64,
        doppler_shift: f64,
        source: Box<Error>,
    },
    #[error("grid is not uniformly spaced")]
    NonUniformGrid,
    #[error(transparent)]
    Fit(#[from] FitError),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_) | Error::SolverAt { .. } | Error::Fit(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
