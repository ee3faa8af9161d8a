//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be 1, 2 or 3, got {0}")]
    BadDimension(usize),

    #[error("points per axis must be a power of two >= 8, got {0}")]
    BadGridSize(usize),

    #[error("box half-width must be positive, got {0}")]
    BadHalfWidth(f64),

    #[error("fractional order must lie in (0, 1], got {0}")]
    BadFractionalOrder(f64),

    #[error("nonlinearity exponent must be > 1, got {0}")]
    BadExponent(f64),

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field contains non-finite values")]
    NonFiniteValues,

    #[error("dilation factor {0} outside the per-call range [0.5, 2]; compose smaller steps")]
    DilationOutOfRange(f64),

    #[error(
        "direct seminorm quadrature limited to {limit} total points, grid has {points} (cost is quadratic)"
    )]
    DirectSeminormTooLarge { points: usize, limit: usize },

    #[error("seminorm is zero; the ratio is undefined")]
    ZeroSeminorm,

    #[error("operation requires N > 2s, got N = {dim}, s = {s}")]
    DegenerateOrder { dim: usize, s: f64 },

    #[error("field is not radial non-increasing: {0}")]
    NotRadialDecreasing(String),

    #[error("barrier support radius {support} does not fit inside the box of half-width {half_width}")]
    BarrierOutsideBox { support: f64, half_width: f64 },

    #[error("plateau height {zeta} is at or below the positivity threshold {zeta_min}")]
    PlateauBelowThreshold { zeta: f64, zeta_min: f64 },

    #[error("no scanned radius gives a positive constraint value inside the box")]
    NoFeasibleRadius,

    #[error("initial field violates the constraint: V = {0}, expected 1 within 1e-6")]
    InfeasibleInit(f64),

    #[error("exponent p = {p} is supercritical (p_crit = {p_crit}); use the dilation probe instead")]
    SupercriticalExponent { p: f64, p_crit: f64 },

    #[error("solver diverged at iteration {0}: seminorm kept growing across 20 step halvings")]
    Divergence(usize),

    #[error("constraint escape at iteration {0}: dilation clip saturated for 50 consecutive steps")]
    ConstraintEscape(usize),

    #[error("multiplier estimates disagree beyond 5%: theta = {theta}, theta_alt = {theta_alt}")]
    MultiplierMismatch { theta: f64, theta_alt: f64 },

    #[error("rescale factor {0} is not positive")]
    BadRescaleFactor(f64),

    #[error("fixed-point scale factor is nonpositive: gamma = {0}")]
    NonpositiveGamma(f64),

    #[error("fixed-point iteration did not converge within {0} iterations")]
    FixedPointStalled(usize),

    #[error("dilation factor {sigma} pushes the field support outside the box")]
    ProbeOutsideBox { sigma: f64 },

    #[error("bad magic bytes {0:?}, expected \"FSF1\"")]
    BadMagic([u8; 4]),

    #[error("unsupported field file version {0}, expected 1")]
    UnsupportedVersion(u8),

    #[error("truncated field file: expected {expected} payload values, got {got}")]
    Truncated { expected: usize, got: usize },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
