use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular geometry: grid point ({x}, {y}, {z}) lies {distance:e} m from a conductor")]
    SingularGeometry { x: f64, y: f64, z: f64, distance: f64 },

    #[error("degenerate voxels with zero coil norm inside support: {voxels:?}")]
    DegenerateVoxel { voxels: Vec<usize> },

    /// Observations carry no signal; callers assign a zero sensitivity.
    #[error("vacant voxel: observations carry no signal")]
    VacantVoxel,

    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("truncated payload at byte offset {offset}: expected {expected} bytes, found {actual}")]
    Truncated { offset: u64, expected: u64, actual: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
