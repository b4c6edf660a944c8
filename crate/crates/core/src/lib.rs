//! Exact edge-vector coordinates for multicurves on marked surfaces, mapping
//! classes as flip paths between ideal triangulations, and certified
//! reducibility via cone feasibility over the piecewise-linear cells of the
//! induced action.

pub mod bits;
pub mod crushing;
pub mod curves;
mod error;
pub mod exec;
pub mod linalg;
pub mod mapping;
pub mod reducibility;
pub mod surfaces;
pub mod triangulation;

pub use bits::BitBound;
pub use curves::{CornerChoice, EdgeVector};
pub use error::{Error, Result};
pub use exec::Exec;
pub use linalg::BigMatrix;
pub use mapping::{CellMatrices, GeneratorTable, MappingClassPath, Move, Path, Word};
pub use reducibility::{ReducibilityReport, Verdict};
pub use triangulation::{SurfaceInvariants, Triangulation};
