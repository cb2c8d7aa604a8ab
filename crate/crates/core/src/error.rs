use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("quaternion norm too small to normalize")]
    DegenerateQuaternion,
    #[error("Gibbs vector undefined for a 180 degree rotation")]
    GibbsSingularity,
    #[error("point is not in front of the image plane")]
    BehindImagePlane,
    #[error("vector pairs are collinear")]
    DegenerateGeometry,
    #[error("observations do not determine a unique attitude")]
    UnderdeterminedAttitude,
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
