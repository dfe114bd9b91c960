use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("material parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("Poisson's ratio must lie in (0, 0.5), got {0}")]
    PoissonOutOfRange(f64),
    #[error("residual strength kappa must lie in (0, 1), got {0}")]
    ResidualStrength(f64),
    #[error("residual stiffness kappa_t must lie in (0, 1e-2], got {0}")]
    ResidualStiffness(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstitutiveError {
    #[error("non-finite input to the return map (strain or phase field)")]
    NonFiniteInput,
    #[error("eigenstrain direction {0} is unavailable for this strain state")]
    UnavailableDirection(usize),
    #[error("direction index {index} out of range for a criterion with {count} direction(s)")]
    DirectionIndex { index: usize, count: usize },
    #[error(
        "return map did not converge after {iterations} iterations \
         (residual {residual:.3e}, multipliers {multipliers:?})"
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        multipliers: [f64; 2],
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("target element size {0} is out of the supported range")]
    ElementSize(f64),
    #[error("the hole is under-resolved: {0} elements around the circumference (need at least 8)")]
    HoleUnderResolved(usize),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("element {element} has non-positive Jacobian determinant {det:.3e}")]
    InvertedElement { element: usize, det: f64 },
    #[error("unsupported quadrature order {0} (supported: 2, 3)")]
    QuadratureOrder(usize),
    #[error("mesh file parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("unknown boundary set `{0}`")]
    UnknownSet(String),
    #[error("boundary set `{0}` has no edges; tractions need an edge set")]
    NotAnEdgeSet(String),
    #[error("return map failed in element {element}, integration point {ip}: {source}")]
    ReturnMap {
        element: usize,
        ip: usize,
        #[source]
        source: ConstitutiveError,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(
        "singular system matrix ({0}); the boundary conditions probably leave a \
         rigid-body null space"
    )]
    Singular(String),
    #[error("linear solver failed: {0}")]
    Linear(String),
    #[error(
        "Newton solve did not converge in {iterations} iterations (residual ratio {ratio:.3e})"
    )]
    NewtonNotConverged { iterations: usize, ratio: f64 },
    #[error("step at t = {time:.6e} s failed after {cutbacks} cutbacks: {reason}")]
    Aborted {
        time: f64,
        cutbacks: usize,
        reason: String,
    },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {second}: duplicate key `{key}` (first set on line {first})")]
    DuplicateKey {
        key: String,
        first: usize,
        second: usize,
    },
    #[error("line {line}: malformed value `{value}` for `{key}`")]
    Malformed {
        line: usize,
        key: String,
        value: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("line {line}: `{key}` must be positive, got {value}")]
    Positivity {
        line: usize,
        key: String,
        value: f64,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Top-level error for running cases and writing outputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
