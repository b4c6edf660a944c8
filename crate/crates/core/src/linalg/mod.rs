//! Unbounded-integer linear algebra: determinants, bit bounds, cone
//! feasibility and extremal integral vectors.

mod cone;
mod extremal;
mod matrix;
mod simplex;

pub use cone::{extreme_rays, nullspace};
pub use extremal::{cramer_vector, extremal_vector};
pub use matrix::{bit_bound, determinant, hadamard_bound, normalize, rank, BigMatrix};
pub use simplex::{cone_feasible, cone_point};
