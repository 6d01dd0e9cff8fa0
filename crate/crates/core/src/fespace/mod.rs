//! Tensor-product Lagrange spaces on a rectangulation: the 1-D nodal basis,
//! Gauss-Legendre rules and the global degree-of-freedom map.

mod basis;
mod dofmap;
mod quadrature;

pub use basis::{BasisError, BasisSet, BasisTable};
pub use dofmap::DofMap;
pub use quadrature::{cell_rules, gauss_rule, graded_rule, QuadError, QuadRule, LAYER_CELL_RATIO};
