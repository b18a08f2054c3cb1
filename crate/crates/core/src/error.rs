use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {point:?} (voxel {voxel:?}) lies outside the volume")]
    OutOfBounds { point: [f64; 3], voxel: [f64; 3] },

    #[error("Gram matrix is not positive definite (pivot {index} = {pivot:e}); duplicate landmarks or jitter too small")]
    SingularGram { index: usize, pivot: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("test landmark {test_id} coincides with training landmark {train_id}")]
    DisjointnessViolation { test_id: i64, train_id: i64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical pipeline (as opposed to I/O or parsing).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularGram { .. }
                | Error::Degenerate(_)
                | Error::DisjointnessViolation { .. }
                | Error::OutOfBounds { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Reads a file, naming the path in any I/O error.
pub(crate) fn read_file(path: &std::path::Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String> {
    String::from_utf8(read_file(path)?).map_err(|_| Error::Parse(format!("{}: not valid UTF-8", path.display())))
}
