use thiserror::Error;

/// Phase-space axis of a two-dimensional product system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => f.write_str("x"),
            Axis::Y => f.write_str("y"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Lagrangian denominator {value:e} is below epsilon{}", axis_suffix(.axis))]
    SingularDenominator { axis: Option<Axis>, value: f64 },

    #[error("closed-form solution is singular at t = {t}")]
    SingularTime { t: f64 },

    #[error("x = {x} lies outside the allowed region (1 + kEU = {discriminant:e} < 0)")]
    OutsideAllowedRegion { x: f64, discriminant: f64 },

    #[error("velocity branches degenerate at zero energy")]
    ZeroEnergy,

    #[error("quadrature integrand is singular at x = {x}")]
    SingularIntegrand { x: f64 },

    #[error("quadrature did not reach tolerance (estimated error {estimate:e})")]
    QuadratureNotConverged { estimate: f64 },

    #[error("linearized solution u vanishes at t = {t}")]
    ZeroCrossing { t: f64 },

    #[error("non-finite stage value in Runge-Kutta step")]
    NonFiniteStage,

    #[error("t = {t} is outside the trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("momentum p = {p} must be negative")]
    PositiveMomentum { p: f64 },

    #[error("momentum branch with negative Lagrangian denominator is not supported")]
    NegativeBranch,

    #[error("square-root argument -k*p = {value} must be positive")]
    RootDomain { value: f64 },

    #[error("state has {found} degrees of freedom, system expects {expected}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("frequencies w1 = {w1}, w2 = {w2} are not in ratio {n1}:{n2}")]
    IncommensurateFrequencies { w1: f64, w2: f64, n1: u32, n2: u32 },

    #[error("{0} is not defined for this system")]
    Unsupported(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

fn axis_suffix(axis: &Option<Axis>) -> String {
    match axis {
        Some(a) => format!(" on axis {a}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
