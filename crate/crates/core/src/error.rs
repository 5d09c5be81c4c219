use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector norm {norm:e} is below 1e-14")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("post-selected state is orthogonal to the pre-selected state (|overlap| = {overlap:e})")]
    OrthogonalPostSelection { overlap: f64 },

    #[error("pointer grid too small: shifted pointer at {shift} needs halfwidth >= {required}, have {halfwidth}")]
    GridTooSmall {
        shift: f64,
        required: f64,
        halfwidth: f64,
    },

    #[error("invalid pointer: {0}")]
    InvalidPointer(String),

    #[error("pointer distribution carries no probability")]
    EmptyDistribution,

    #[error("no trial passed post-selection ({m_total} trials)")]
    NoAcceptedTrials { m_total: u64 },

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("band width x tau = {phase_span} >= 2 pi, branch phases wrap")]
    InfeasibleBand { phase_span: f64 },

    #[error("design coefficients are all zero")]
    ZeroDesign,

    #[error("post-selection never succeeds (|K psi| = {norm:e})")]
    PostSelectionNeverSucceeds { norm: f64 },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("transmission amplitude vanishes (|t| = {magnitude:e})")]
    VanishingTransmission { magnitude: f64 },

    #[error("mode grids differ")]
    ModeGridMismatch,

    #[error("invalid wave packet: {0}")]
    InvalidPacket(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
