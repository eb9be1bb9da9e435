use thiserror::Error;

/// Errors raised by the numerical laboratory.
///
/// Variant names are stable: the CLI prints them on stderr and maps
/// [`Error::is_solver_failure`] variants to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("HermitianViolation: coefficients of ({j},{k}) and ({k},{j}) are not conjugate")]
    HermitianViolation { j: u32, k: u32 },
    #[error("RealnessViolation: imaginary part {imag:e} exceeds tolerance")]
    RealnessViolation { imag: f64 },
    #[error("OutOfRange: order {order} outside [{lo}, {hi}]")]
    OutOfRange { order: u32, lo: u32, hi: u32 },
    #[error("DimensionMismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("DegenerateType: polynomial is identically zero")]
    DegenerateType,
    #[error("InvalidDomain: {0}")]
    InvalidDomain(String),
    #[error("PointNotInterior: defining value {value:e} is not negative")]
    PointNotInterior { value: f64 },
    #[error("ZeroVector: tangent vector vanishes")]
    ZeroVector,
    #[error("EmptyIntersection: no sample point lies in both domains")]
    EmptyIntersection,
    #[error("CurveExitsDomain: quadrature node with defining value {value:e}")]
    CurveExitsDomain { value: f64 },
    #[error("InvalidCurve: {0}")]
    InvalidCurve(String),
    #[error("NotBoundaryPoint: defining value {value:e} is not zero")]
    NotBoundaryPoint { value: f64 },
    #[error("Disconnected: endpoints lie in different lattice components")]
    Disconnected,
    #[error("InfiniteTypePoint: every coefficient cap vanishes")]
    InfiniteTypePoint,
    #[error("NotNormalApproach: no boundary point on the normal through the sample")]
    NotNormalApproach,
    #[error("DegenerateLimit: {0}")]
    DegenerateLimit(String),
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
    #[error("Io: {0}")]
    Io(String),
    #[error("Parse: {0}")]
    Parse(String),
}

impl Error {
    /// The variant name, as printed on the diagnostics stream.
    pub fn name(&self) -> &'static str {
        match self {
            Error::HermitianViolation { .. } => "HermitianViolation",
            Error::RealnessViolation { .. } => "RealnessViolation",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegenerateType => "DegenerateType",
            Error::InvalidDomain(_) => "InvalidDomain",
            Error::PointNotInterior { .. } => "PointNotInterior",
            Error::ZeroVector => "ZeroVector",
            Error::EmptyIntersection => "EmptyIntersection",
            Error::CurveExitsDomain { .. } => "CurveExitsDomain",
            Error::InvalidCurve(_) => "InvalidCurve",
            Error::NotBoundaryPoint { .. } => "NotBoundaryPoint",
            Error::Disconnected => "Disconnected",
            Error::InfiniteTypePoint => "InfiniteTypePoint",
            Error::NotNormalApproach => "NotNormalApproach",
            Error::DegenerateLimit(_) => "DegenerateLimit",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
        }
    }

    /// Solver failures (as opposed to bad input) map to a distinct exit code.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Disconnected | Error::EmptyIntersection)
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
