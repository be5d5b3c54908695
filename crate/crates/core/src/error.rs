use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeoError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("kernel pole: singular value {sigma} lies within tolerance of a pole")]
    KernelPole { sigma: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("map evaluation failed: {0}")]
    EvaluationFailure(String),

    #[error("geodesic left the chart: singular value {sigma} reached pi/2")]
    ChartEscape { sigma: f64 },

    #[error("plane lies on the polar divisor (smallest top-block singular value {smallest})")]
    OnPolarDivisor { smallest: f64 },

    #[error("diastasis undefined: overlap modulus {modulus} vanishes")]
    DiastasisUndefined { modulus: f64 },

    #[error("zero vector has no projective class")]
    ZeroVector,

    #[error("point outside the bounded domain: largest singular value {sigma_max} >= 1")]
    OutsideDomain { sigma_max: f64 },

    #[error("transformation is not block diagonal (off-block norm {leak})")]
    KNotBlockDiagonal { leak: f64 },

    #[error("zero tangent vector has no cut time")]
    ZeroTangent,

    #[error("integer overflow for n + m = {total}")]
    Overflow { total: usize },

    #[error("enumeration too large for n + m = {total}")]
    TooLarge { total: usize },

    #[error("energy weights are degenerate (minimum gap {gap})")]
    DegenerateWeights { gap: f64 },

    #[error("invalid shape: n = {n}, m = {m}")]
    InvalidShape { n: usize, m: usize },

    #[error("direction is not normalized: sum of squares = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("frame columns are not orthonormal (defect {defect})")]
    NotOrthonormal { defect: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
