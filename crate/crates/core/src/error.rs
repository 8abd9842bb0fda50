use alloc::string::String;

use crate::C64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-conditioned {what}: sigma_min/sigma_max = {ratio:e}")]
    Conditioning { what: String, ratio: f64 },

    #[error("target λ({m0},{k0}) coincides with grid point λ̃({m},{k})")]
    Coincidence {
        m: usize,
        k: i64,
        m0: usize,
        k0: i64,
    },

    #[error("truncated operator D_{m} is singular (condition estimate {condition:e})")]
    SolverSingular { m: usize, condition: f64 },

    #[error("alpha repair failed after {retries} retries (best condition {best_condition:e})")]
    AdjustmentFailed { retries: usize, best_condition: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (last iterate {last})")]
    NotConverged { last: C64, iterations: usize },

    #[error("contour passes through a root near {at} (sigma ratio {ratio:e})")]
    ContourThroughRoot { at: C64, ratio: f64 },

    #[error("winding number {value} is not close to an integer")]
    NonIntegerWinding { value: f64 },

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    /// Whether the failure is numerical (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidInput(_) | Error::Domain(_) | Error::Coincidence { .. })
    }
}
