use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate potential: {0}")]
    DegeneratePotential(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("Neumann problem is not solvable: right-hand side has mean {mean:.3e}")]
    Solvability { mean: f64 },

    #[error("inner coupling iteration failed to contract (relative residual {residual:.3e})")]
    StepFailed { residual: f64 },

    #[error("blow-up at t = {t:.6e}: {detail}; try a smaller time step")]
    BlowUp { t: f64, detail: String },

    #[error("maximum principle violated: nutrient range [{min:.3e}, {max:.3e}] leaves [0, 1]")]
    MaximumPrinciple { min: f64, max: f64 },

    #[error("pure phase: |[phi]| = {average:.6} >= 1, average bound for mu does not apply")]
    PurePhase { average: f64 },

    #[error("phi does not change sign, no interface to extract")]
    EmptyInterface,

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("step {step} failed: {source}")]
    Run {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
