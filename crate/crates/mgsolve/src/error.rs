use thiserror::Error;

#[derive(Debug, Error)]
pub enum MgError {
    #[error(transparent)]
    Core(#[from] trilfa::Error),
    #[error("refinement level {level} outside [{min}, {max}]")]
    Levels { level: usize, min: usize, max: usize },
    #[error("singular local system in block {block} anchored at ({k}, {l})")]
    SingularBlock { block: usize, k: i32, l: i32 },
    #[error("coarsest-level direct solve failed: {0}")]
    CoarseSolve(String),
    #[error("invalid cycle: {0}")]
    Cycle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MgError>;
