use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid emitter level label `{0}` (expected one of 1, 2, e)")]
    InvalidLevel(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("mode {mode} has zero total loss rate")]
    ZeroModeLoss { mode: u8 },

    #[error("effective drive is zero, stationary ratio diverges")]
    ZeroDrive,

    #[error("coupling to both modes is required for the drive threshold")]
    ZeroCoupling,

    #[error("g2(0) undefined: mean photon number {mean:e} is below the floor")]
    UndefinedCorrelation { mean: f64 },

    #[error("mode truncation n_max = {n_max} cannot represent two-photon correlations")]
    TruncationTooSmall { n_max: usize },

    #[error("integrator did not converge at t = {time:e}: {reason}")]
    NonConvergence { time: f64, reason: &'static str },

    #[error("non-finite state encountered at t = {time:e}")]
    NonFinite { time: f64 },

    #[error("trace drifted by {drift:e} at t = {time:e}")]
    TraceDrift { time: f64, drift: f64 },

    #[error("steady state is not unique (kernel dimension > 1)")]
    MultipleSteadyStates,

    #[error("steady-state solve failed: {0}")]
    LinearSolve(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateData(&'static str),

    #[error("least-squares fit did not converge after {iterations} iterations")]
    FitNonConvergence { iterations: usize },

    #[error("resonances are disjoint: centers {center_a:e} and {center_b:e} differ by more than half a linewidth")]
    DisjointResonances { center_a: f64, center_b: f64 },

    #[error("no enhancement: scattered power ratio {0} is below one")]
    NoEnhancement(f64),
}
