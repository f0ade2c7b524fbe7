//! Geometric multigrid on uniformly refined equilateral triangles with overlapping
//! block (Vanka-type) smoothers.
//!
//! The domain is the unit equilateral triangle with corners `(0,0)`, `(1,0)` and
//! `(1/2, sqrt(3)/2)`. At refinement level `L` the vertices are the lattice points
//! `(k, l)` with `0 <= l <= k <= 2^L`, using the same lattice axes as the Fourier
//! analysis crate, so interior rows coincide with its stencils.

pub mod assembly;
pub mod csr;
pub mod cycle;
pub mod error;
pub mod experiments;
pub mod hierarchy;
pub mod mesh;
pub mod transfer;
pub mod vanka;

pub use error::{MgError, Result};
