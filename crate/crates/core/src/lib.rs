//! Symmetry invariants of reductive homogeneous Riemannian spaces presented by Lie algebra data.
//!
//! A space is given as an [`IsometryModel`]: a Lie algebra of Killing fields, the
//! evaluation map onto the tangent space at a base point, and an invariant inner
//! product. From it the crate computes transvections, the index and co-index of
//! symmetry, the leaf of symmetry, curvature, and the isotropy representation.

pub mod catalog;
pub mod error;
pub mod geometry;
pub mod isotropy;
pub mod lie;
pub mod linalg;
pub mod model;
pub mod report;
pub mod sampling;
pub mod selfcheck;
pub mod symmetry;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use lie::LieAlgebra;
pub use linalg::Subspace;
pub use model::{Expectations, IsometryModel};
pub use tolerance::Tolerances;
