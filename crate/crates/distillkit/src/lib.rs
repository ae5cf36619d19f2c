//! Numerical toolkit for one-way entanglement distillation at desk scale.
//!
//! The crate is organised around a small set of labelled-multipartite
//! linear-algebra types ([`qcore`]), completely positive maps and
//! instruments ([`channels`]), the explicit state/channel families under
//! study ([`families`]), majorization and pinching utilities
//! ([`majorization`]), spin-alignment entropy minimisation
//! ([`spinalign`]), and the distillation optimisers and falsifiers
//! ([`distill`]).
//!
//! All entropies are in bits (logarithms base 2) and `0 log 0 = 0`
//! throughout.

pub mod channels;
pub mod distill;
pub mod families;
pub mod linalg;
pub mod majorization;
pub mod optim;
pub mod qcore;
pub mod sample;
pub mod spinalign;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("labels {0:?} do not partition the state's subsystems")]
    BadPartition(Vec<String>),

    #[error("matrix is not Hermitian (max |M - M^dag| entry = {0:.3e})")]
    NotHermitian(f64),

    #[error("operator has eigenvalue {0:.3e} below the -{1:.1e} tolerance")]
    NegativeEigenvalue(f64, f64),

    #[error("trace is {0} but must be 1 within {1:.1e}")]
    BadTrace(f64, f64),

    #[error("vector norm is {0} but must be 1 within {1:.1e}")]
    BadNorm(f64, f64),

    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("instrument is not complete (sum of K^dag K deviates from identity by {0:.3e})")]
    IncompleteInstrument(f64),

    #[error("map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("zero map: Choi operator has vanishing trace")]
    ZeroMap,

    #[error("invalid projector set: {0}")]
    BadProjectors(String),

    #[error("supports are not orthogonal on A (overlap {0:.3e})")]
    NotOrthogonal(f64),

    #[error("dimension budget exceeded: requested {requested}, budget {budget}")]
    BudgetExceeded { requested: usize, budget: usize },

    #[error("internal consistency check failed: {0}")]
    ConsistencyCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Validation tolerances. The defaults match the contracts of the public
/// operations; callers that construct operators from noisier data can relax
/// them explicitly.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Max allowed |M - M^dag| entry for Hermiticity checks.
    pub hermiticity: f64,
    /// Eigenvalues in [-psd, 0) are clipped to 0; below -psd is an error.
    pub psd: f64,
    /// Allowed deviation of a state's trace from 1.
    pub trace: f64,
    /// Allowed deviation of a pure state's norm from 1.
    pub norm: f64,
    /// Rank cutoff for eigendecompositions (purification, Kraus extraction).
    pub rank_cutoff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-10,
            psd: 1e-10,
            trace: 1e-10,
            norm: 1e-12,
            rank_cutoff: 1e-12,
        }
    }
}

impl Tolerances {
    /// Uniformly scaled copy, used by the CLI `--tol` override.
    pub fn scaled(self, factor: f64) -> Self {
        Tolerances {
            hermiticity: self.hermiticity * factor,
            psd: self.psd * factor,
            trace: self.trace * factor,
            norm: self.norm * factor,
            rank_cutoff: self.rank_cutoff,
        }
    }
}

pub use channels::{Instrument, KrausMap};
pub use qcore::{DensityOperator, PureStateVector, Spectrum};
