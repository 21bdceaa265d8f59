use thiserror::Error;

/// Errors produced by the flight-dynamics workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Euler rate map is singular near the pole (|det| = {det:.3e})")]
    SingularPole { det: f64 },

    #[error("generalized mass matrix is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("invalid airframe configuration: {0}")]
    InvalidConfig(String),

    #[error("aerodynamic surface `{0}` has zero span")]
    ZeroSpan(String),

    #[error("angle {0} rad is outside the principal range (-pi, pi]")]
    AngleOutOfRange(f64),

    #[error("thrust must be non-negative, got {0} N")]
    NegativeThrust(f64),

    #[error("coefficient table: {0}")]
    Table(String),

    #[error("step size underflow at t = {t} s (h = {h:.3e} s)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {t} s")]
    NonFinite { t: f64 },

    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),

    #[error("trim solve did not converge after {iterations} iterations (|F| = {residual:.3e}, active limits: {active:?})")]
    TrimNotConverged {
        iterations: usize,
        residual: f64,
        active: Vec<String>,
    },

    #[error("trim Jacobian is singular (condition number {cond:.3e})")]
    SingularJacobian { cond: f64 },

    #[error("continuation failed at the first point: {0}")]
    FirstPointFailure(Box<Error>),

    #[error("continuation failed at knot {knot} (t = {t} s, active limits: {active:?})")]
    ContinuationFailure {
        knot: usize,
        t: f64,
        active: Vec<String>,
    },

    #[error("refusing to linearize off-trim (residual {residual:.3e})")]
    OffTrim { residual: f64 },

    #[error("series too short for spectral analysis ({len} samples, need at least 16)")]
    SeriesTooShort { len: usize },

    #[error("airspeed samples must be strictly positive")]
    NonPositiveAirspeed,

    #[error("target frequency {omega} rad/s lies outside the spectrum range")]
    TargetOutOfRange { omega: f64 },

    #[error("control schedule does not cover t = {0} s")]
    ScheduleCoverage(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
