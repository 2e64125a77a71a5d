use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: need at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("detuning is zero; the dispersive mapping is singular")]
    DispersiveSingularity,

    #[error("Rabi frequency is zero; the dressed-qubit drive is degenerate")]
    DegenerateDrive,

    #[error("frame mismatch: probe frequency {probe} differs from renormalized frequency {omega_bar}")]
    FrameMismatch { probe: f64, omega_bar: f64 },

    #[error("integrator step size underflow at t = {time}")]
    Stiffness { time: f64 },

    #[error("no unique steady state without dissipation")]
    NoUniqueSteadyState,

    #[error("steady state is degenerate: {0}")]
    DegenerateSteadyState(String),

    #[error("collapse operator annihilates the state at t = {time}")]
    NumericalDegeneracy { time: f64 },

    #[error("cannot aggregate trajectories: {0}")]
    Aggregation(String),

    #[error("s = 1 (P function) is too singular to evaluate")]
    UnsupportedSingularDistribution,

    #[error("steady state residual {residual:e} exceeds {limit:e}")]
    StaleSteadyState { residual: f64, limit: f64 },

    #[error("correlation has not decayed at the last lag: |C(tau_max)| / |C(0)| = {ratio:e}")]
    TruncatedCorrelation { ratio: f64 },

    #[error("overdamped: (8 eps)^2 < gamma^2 (1 + 2 nbar)^2, no underdamped side peaks")]
    Overdamped,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
