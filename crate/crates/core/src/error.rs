use thiserror::Error;

use crate::blackhole::RNdSParams;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("potential is not positive at x = {x} (a = {value})")]
    NonPositive { x: f64, value: f64 },

    #[error("invalid profile parameters: {0}")]
    InvalidProfile(String),

    #[error("table line {line}: {msg}")]
    Table { line: usize, msg: String },

    #[error("asymptotic fit failed on the {side} tail: {reason} (residual {residual:e})")]
    FitFailure {
        side: &'static str,
        reason: String,
        residual: f64,
    },

    #[error("quadrature did not converge on [{lo}, {hi}] (error estimate {estimate:e})")]
    Quadrature { lo: f64, hi: f64, estimate: f64 },

    #[error("{what} = {value} lies outside the admissible domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("degenerate horizons: {0}")]
    DegenerateHorizons(String),

    #[error("Newton inversion did not converge at x = {x}")]
    NewtonFailure { x: f64 },

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("integrator exceeded {steps} steps near x = {x}")]
    MaxSteps { steps: usize, x: f64 },

    #[error("tail truncation error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    TailTruncation { estimate: f64, tolerance: f64 },

    #[error("Neumann series did not converge in {terms} terms (last term norm {last_term_norm:e})")]
    OracleNonConvergence { terms: usize, last_term_norm: f64 },

    #[error("transfer matrix depends on the matching point: relative mismatch {residual:e}")]
    MatchingMismatch { residual: f64 },

    #[error("unitarity violated: |a_L1| = {abs_al1} < 1 at real angular momentum {n}")]
    Unitarity { abs_al1: f64, n: f64 },

    #[error("|a_L3| too small on the contour after {dilations} dilations (closest approach near z = {re}{im:+}i)")]
    BoundaryTooClose { dilations: usize, re: f64, im: f64 },

    #[error("argument principle counted {winding} zeros but localisation found {found}")]
    WindingMismatch { winding: i64, found: usize },

    #[error("need at least {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    #[error("non-positive magnitude {value} at sample {index}")]
    NonPositiveMagnitude { index: usize, value: f64 },

    #[error("Gamma function pole at {re}{im:+}i")]
    GammaPole { re: f64, im: f64 },

    #[error("phase jump of {jump} rad between consecutive samples at n = {n}; sample more densely")]
    PhaseUnwrap { n: f64, jump: f64 },

    #[error("data are not RN-dS consistent: residual {residual:e} (best fit {best:?})")]
    NotRnds { residual: f64, best: RNdSParams },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("solver failure at z = {re}{im:+}i: {source}")]
    AtNode {
        re: f64,
        im: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_node(self, z: num_complex::Complex64) -> Error {
        Error::AtNode {
            re: z.re,
            im: z.im,
            source: Box::new(self),
        }
    }
}
