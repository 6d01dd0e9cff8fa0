//! Galerkin finite elements of arbitrary order for the singularly perturbed
//! convection-diffusion problem
//!
//! ```text
//! −εΔu − b·∇u + cu = f  in (0, 1)²,   u = 0 on ∂Ω,
//! ```
//!
//! on Bakhvalov-type layer-adapted tensor meshes, plus the tooling to check
//! uniform convergence: error norms, interpolation studies and tables.

pub mod analysis;
pub mod assembly;
pub mod config;
pub mod fespace;
pub mod interpolant;
pub mod linsolve;
pub mod mesh;
pub mod problems;
