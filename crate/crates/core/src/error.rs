use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use crate::map::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse map: {0}")]
    Parse(String),
    #[error("invalid map: {} violation(s), first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidMap(Vec<Violation>),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("three grid lines meet near {0}")]
    DegenerateMultigrid(Complex64),
    #[error("multigrid patch is not a valid critical map: {0}")]
    BadMultigrid(String),
    #[error("integration is path dependent: cycle defect {defect:e} exceeds {tolerance:e} at face {face}")]
    PathDependent {
        face: usize,
        defect: f64,
        tolerance: f64,
    },
    #[error("vertex {0} is on the boundary")]
    BoundaryVertex(usize),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("lambda = {lambda} is a pole of the exponential (train-track {track})")]
    AtPole { lambda: Complex64, track: usize },
    #[error("division by a jet whose leading coefficient vanishes")]
    JetDivisionByZero,
    #[error("numerical rank is ambiguous (singular-value gap ratio {gap:e})")]
    RankAmbiguous { gap: f64 },
    #[error("basis is rank deficient (rank {rank} of {size})")]
    RankDeficientBasis { rank: usize, size: usize },
    #[error("closed-form prefactor vanishes ({0:e})")]
    DegeneratePrefactor(f64),
    #[error("gluing system for special exponential of track {track} is underdetermined")]
    UnderdeterminedGlue { track: usize },
    #[error("gluing system for special exponential of track {track} is inconsistent (residual {residual:e})")]
    InconsistentGlue { track: usize, residual: f64 },
    #[error("no level combination found: {0}")]
    NoSolution(String),
    #[error("special exponentials are rank deficient: {0}")]
    RankDeficientSpecials(String),
    #[error("minimal polynomial is ill-conditioned (gap ratio {gap:e})")]
    IllConditionedMinimalPolynomial { gap: f64 },
    #[error("contour node within {distance:e} of pole {pole}")]
    ContourTooClose { pole: Complex64, distance: f64 },
    #[error("pole {0} lies inside the keyhole slit")]
    PoleInSlit(Complex64),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("unknown train-track {0}")]
    UnknownTrack(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
