use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid structure constants: {0}")]
    InvalidAlgebra(String),

    #[error("algebra is not nilpotent: lower central series stalls at dimension {stalled_at}")]
    NotNilpotent { stalled_at: usize },

    #[error("nilpotency step {0} exceeds the supported group-law depth of 4")]
    UnsupportedStep(usize),

    #[error("matrix is not skew-symmetric (residual {residual:.3e})")]
    NotSkew { residual: f64 },

    #[error("pfaffian cross-check failed: pf^2 = {pf_sq:.6e}, det = {det:.6e}")]
    PfaffianMismatch { pf_sq: f64, det: f64 },

    #[error("flag is not an ideal flag: [e_{basis}, f_{flag_index}] leaves the span (residual {residual:.3e})")]
    FlagNotIdeal {
        basis: usize,
        flag_index: usize,
        residual: f64,
    },

    #[error("polarization check failed: {0}")]
    Polarization(String),

    #[error("element does not lie in the subgroup H (residual {residual:.3e})")]
    NotInSubgroup { residual: f64 },

    #[error("complement is not coexponential (back-substitution residual {residual:.3e})")]
    NotCoexponential { residual: f64 },

    #[error("polarization varies across the lambda grid (at point {index})")]
    PolarizationVaries { index: usize },

    #[error("no chart available for group '{0}'")]
    NoChart(String),

    #[error("no closed-form oracle for group '{0}'")]
    NoOracle(String),

    #[error("unknown group '{name}'; available presets: {available}")]
    UnknownGroup { name: String, available: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "aliasing: frequency {frequency:.4} on H-axis {axis} exceeds the Nyquist limit {nyquist:.4}"
    )]
    Aliasing {
        axis: usize,
        frequency: f64,
        nyquist: f64,
    },

    #[error("lambda point {0:?} is not on the kernel's lambda grid")]
    OffGrid(Vec<f64>),

    #[error("convolution support overflows the grid; required box {required:?}")]
    SupportOverflow { required: Vec<(f64, f64)> },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
