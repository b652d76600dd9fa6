use thiserror::Error;

pub type Result<T> = std::result::Result<T, WaveError>;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("grid spacing must be positive (axis {axis}: {spacing})")]
    NonPositiveSpacing { axis: usize, spacing: f64 },
    #[error("extent on axis {axis} is not an integral number of cells ({cells} cells)")]
    NonIntegralPointCount { axis: usize, cells: f64 },
    #[error("axis {axis} has {n} points; at least 8 are required")]
    TooFewPoints { axis: usize, n: usize },
    #[error("unsupported dimension {0}; expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("sound speed must be positive, got {0}")]
    NonPositiveSoundSpeed(f64),
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("axis {0} out of range")]
    AxisOutOfRange(usize),

    #[error("disc radius must be positive and at least max_edge (radius {radius}, max_edge {max_edge})")]
    DegenerateRadius { radius: f64, max_edge: f64 },
    #[error("points coincide")]
    CoincidentPoints,
    #[error("mesh: {0}")]
    InvalidMesh(String),

    #[error("position {0:?} lies outside the grid interior")]
    OutOfGrid([f64; 3]),
    #[error("pulse carries quantity '{found}', expected '{expected}'")]
    QuantityMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("a_p must be 1 or 2, got {0}")]
    BadApFactor(f64),
    #[error("pulse: {0}")]
    InvalidPulse(String),

    #[error("time step {dt:e} s exceeds the CFL bound {limit:e} s")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite value in solver state at step {0}")]
    NumericalFailure(usize),
    #[error("{traces} traces for {vertices} surface vertices")]
    TraceMeshMismatch { traces: usize, vertices: usize },

    #[error("source and field point coincide")]
    ZeroSeparation,
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("field point lies on the aperture")]
    PointOnAperture,
    #[error("frequency {f} Hz outside (0, {nyquist}] Hz")]
    FrequencyOutOfRange { f: f64, nyquist: f64 },

    #[error("reference has zero norm")]
    ZeroReference,
    #[error("config: {0}")]
    Config(String),
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl WaveError {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        WaveError::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
