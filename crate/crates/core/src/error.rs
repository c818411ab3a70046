use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite {0} component")]
    NonFinite(&'static str),
    #[error("bearing vector norm {0:e} is too small to normalize")]
    ZeroBearing(f64),
    #[error("expected exactly 3 correspondences, found {0}")]
    CorrespondenceCount(usize),
    #[error("degenerate geometry: bearings {0} and {1} coincide")]
    DuplicateBearings(usize, usize),
    #[error("degenerate geometry: points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("degenerate geometry: {0}")]
    DegenerateInput(String),
    #[error("degenerate geometry: the three world points are collinear")]
    CollinearPoints,
    #[error("leading coefficient is negligible; solve the reduced-degree polynomial")]
    DegenerateLeading,
    #[error("every polynomial coefficient is zero")]
    NoPolynomial,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for inputs that parse but describe a configuration with no
    /// well-defined pose (coincident or collinear points, parallel bearings).
    pub fn is_degenerate_geometry(&self) -> bool {
        matches!(
            self,
            Error::DuplicateBearings(..)
                | Error::CoincidentPoints(..)
                | Error::DegenerateInput(_)
                | Error::CollinearPoints
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
