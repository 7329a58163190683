use thiserror::Error;

/// Errors raised by the geometry, profile and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector cannot be normalized (signed radicand {radicand:e})")]
    NonNormalizable { radicand: f64 },

    #[error("stereographic projection undefined at the pole (1 + T3 = {denominator:e})")]
    ProjectionPole { denominator: f64 },

    #[error("point leaves the Poincare disc (|z|^2 = {modulus_sq})")]
    DiscBoundary { modulus_sq: f64 },

    #[error("domain half-width {length} too small for asymptotic extraction (need >= {required})")]
    InsufficientDomain { length: f64, required: f64 },

    #[error("need at least {required} nodes, got {got}")]
    TooFewNodes { required: usize, got: usize },

    #[error("bad transform length {0}: expected N + 1 samples with N even and N >= 2")]
    BadLength(usize),

    #[error("boundary-augmented linear system is singular")]
    SolverSingular,

    #[error("point {point} lies outside [-{half_width}, {half_width}]")]
    OutOfDomain { point: f64, half_width: f64 },

    #[error("frame undefined where |z_s| = {modulus:e}")]
    FrameDegenerate { modulus: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
