use thiserror::Error;

use crate::expr::EvalError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("evaluation failed at node {node} (x = {x}): {source}")]
    Eval {
        node: usize,
        x: f64,
        #[source]
        source: EvalError,
    },

    #[error("non-finite value in {what} at node {node}")]
    NonFinite { what: &'static str, node: usize },

    #[error("coefficient p vanishes at node {node}")]
    PVanishes { node: usize },

    #[error("seed g0 vanishes at node {node} (|g0| = {modulus:e}){hint}")]
    SeedVanishes {
        node: usize,
        modulus: f64,
        hint: &'static str,
    },

    #[error("explicit seed does not solve (p g0')' + q g0 = 0: relative residual {residual:e} exceeds {threshold:e}")]
    SeedResidualTooLarge { residual: f64, threshold: f64 },

    #[error("power table overflowed at index {n}; reduce the interval or the table depth")]
    PowerOverflow { n: usize },

    #[error("series tail bound for |omega| M a = {z} cannot reach {tol:e} within N <= {n_max}")]
    TruncationCapExceeded { z: f64, tol: f64, n_max: usize },

    #[error("power table depth {available} is below the required {required}")]
    TableTooShallow { required: usize, available: usize },

    #[error("Darboux transformation requires p == 1")]
    NonUnitP,

    #[error("left boundary angle is a multiple of pi (Dirichlet-left); gamma is undefined")]
    DirichletLeft,

    #[error("Newton refinement failed near lambda = {lambda} after {iterations} iterations despite a sign change")]
    ConvergenceFailure { lambda: f64, iterations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
