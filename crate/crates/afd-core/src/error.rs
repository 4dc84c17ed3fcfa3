use thiserror::Error;

/// Errors surfaced by the design and evaluation pipeline.
#[derive(Debug, Error)]
pub enum AfdError {
    /// A state derivative became non-finite during integration.
    #[error("integration diverged at t = {time} s, state = {state:?}")]
    IntegrationDiverged { time: f64, state: Vec<f64> },

    /// Integration span or measurement time is not aligned to the fixed step.
    #[error("span [{t0}, {t1}] is not an integer number of steps of dt = {dt}")]
    MisalignedSpan { t0: f64, t1: f64, dt: f64 },

    /// All samples of an ensemble are identical; the ML variance is zero.
    #[error("degenerate ensemble: sample variance is zero")]
    DegenerateEnsemble,

    /// Requested moments cannot be realized by the requested family.
    #[error("infeasible moments: {0}")]
    InfeasibleMoments(String),

    /// A precondition on an argument failed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature failed to converge to tolerance {tol}")]
    QuadratureFailed { tol: f64 },

    /// The moment bound is undefined when every moment is zero.
    #[error("undefined bound: all moments are zero")]
    UndefinedBound,

    /// No candidate input satisfied the state constraints on an interval.
    #[error("design infeasible on interval [{t0} s, {t1} s]: no feasible candidate")]
    DesignInfeasible { t0: f64, t1: f64 },

    /// A scenario name was not recognized by the bank builder.
    #[error("unknown scenario: {0}")]
    UnknownScenario(String),
}

pub type Result<T> = std::result::Result<T, AfdError>;
