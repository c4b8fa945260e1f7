use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("perturbed weight {value:e} on edge ({i}, {j}) is below the feasibility tolerance")]
    Infeasible { i: usize, j: usize, value: f64 },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("eigensolver did not converge (residual {0:e})")]
    NoConvergence(f64),
    #[error("eigenvalue is not simple (gap {gap:e} below guard {guard:e})")]
    Degenerate { gap: f64, guard: f64 },
    #[error("bordered system is numerically singular")]
    Singular,
    #[error("eigenvector does not change sign; set averages are undefined")]
    OneSigned,
    #[error("constraint sets overlap at vertex {0}")]
    SetsOverlap(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the free part of the perturbation vanishes")]
    NoFreeMass,
    #[error("feasibility projection broke down: the cut edges carry the whole norm")]
    Breakdown,
    #[error("feasibility projection did not settle within {0} rounds")]
    ProjectionRounds(usize),
    #[error("graph too large for enumeration (n = {0})")]
    TooLarge(usize),
    #[error("graph is disconnected")]
    Disconnected,
}
