//! Matrices over local fields and the structure computations built on them.

pub mod contraction;
pub mod eigen;
pub mod growth;
pub mod matrix;

pub use contraction::{contraction_subgroup_padic, contraction_subgroup_real, ContractionData, Direction};
pub use eigen::{eigen_structure_padic, eigen_structure_real, EigenReport};
pub use growth::{cayley_growth_degree, GrowthGroup, GrowthReport};
pub use matrix::{norm, AnyMatrix, SquareMatrix};
