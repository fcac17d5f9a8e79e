use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PillarError {
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("singular evaluation in {function} at argument {argument}")]
    Singularity {
        function: &'static str,
        argument: String,
    },

    #[error("incident wave must use a propagating harmonic; m = {m} has eta^2 = {eta_sq:e}")]
    InvalidIncident { m: i64, eta_sq: f64 },

    #[error("invalid medium: {}", .0.join("; "))]
    InvalidMedium(Vec<String>),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("subspace restriction retained no Fourier index")]
    EmptySubspace,

    #[error("system is numerically singular at omega = {omega}, kappa = {kappa} (condition estimate {condition:e}); possible guided-mode frequency")]
    NearSingular {
        omega: f64,
        kappa: f64,
        condition: f64,
    },

    #[error("propagating window is empty: {0}")]
    WindowEmpty(String),

    #[error("contrast continuation exhausted: {0}")]
    ContinuationExhausted(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("certificate contradicted by a verified guided mode: {0}")]
    Contradiction(String),
}

pub type Result<T, E = PillarError> = std::result::Result<T, E>;

impl PillarError {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        PillarError::Domain {
            function,
            detail: detail.into(),
        }
    }
}
