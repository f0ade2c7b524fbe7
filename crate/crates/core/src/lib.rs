//! Local Fourier analysis of overlapping block smoothers on triangular grids.

pub mod discretization;
pub mod error;
pub mod fem;
pub mod lattice;
pub mod lfa;
pub mod linalg;
pub mod oracle;
pub mod smoother;
pub mod stencil;
pub mod transfer;

pub use error::{Error, Result};
