//! Thermodynamics of coadjoint orbits: root and cone data of Lie algebras
//! with compactly embedded Cartan subalgebras, closed-form partition
//! functions, and an independent numerical integration oracle.

pub mod algebra;
pub mod config;
pub mod linalg;
pub mod nnls;
pub mod roots;
pub mod cones;
pub mod orbits;
pub mod thermo;
pub mod oracle;
pub mod pipeline;

pub use algebra::{DecompositionMeta, Element, Functional, LieAlgebra};
pub use config::{Tolerances, DEFAULT_SEED};
