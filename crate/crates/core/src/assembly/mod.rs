//! Galerkin assembly of
//! `a(u, v) = ε(∇u, ∇v) + (−b·∇u, v) + (cu, v)` and `(f, v)` over the
//! continuous `Q_k` space with homogeneous Dirichlet data.
//!
//! Boundary nodes are dropped from the system entirely. The stiffness,
//! convection-reaction and mass parts are kept separately so energy norms
//! can be evaluated on discrete functions without reassembly.

mod csr;

pub use csr::CsrMatrix;

use rayon::prelude::*;
use thiserror::Error;

use crate::fespace::{cell_rules, BasisError, BasisSet, DofMap, QuadError};
use crate::mesh::TensorMesh2D;
use crate::problems::Problem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("degree-of-freedom map has N = {dofs}, mesh has N = {mesh}")]
    DofMismatch { dofs: usize, mesh: usize },
    #[error("vector length {got} does not match system dimension {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Gauss points per direction per cell; `None` selects `k + 2`.
    pub quad_points: Option<usize>,
    /// Serial cell traversal. Local blocks are always scattered in
    /// lexicographic cell order, so the parallel path gives the same bits.
    pub deterministic: bool,
    /// Graded composite rules in the wide fine-region cells next to the
    /// layer transition, see [`cell_rules`].
    pub layer_quadrature: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            quad_points: None,
            deterministic: true,
            layer_quadrature: true,
        }
    }
}

impl AssemblyOptions {
    pub fn with_quad_points(q: usize) -> Self {
        Self {
            quad_points: Some(q),
            ..Self::default()
        }
    }

    pub fn quad_points_for(&self, k: usize) -> usize {
        self.quad_points.unwrap_or(k + 2)
    }
}

/// The separately assembled bilinear form parts.
#[derive(Debug, Clone)]
pub struct SystemParts {
    /// `(∇θ_c, ∇θ_r)`
    pub stiffness: CsrMatrix,
    /// `(θ_c, θ_r)`
    pub mass: CsrMatrix,
    /// `(−b·∇θ_c + cθ_c, θ_r)`
    pub convection_reaction: CsrMatrix,
}

#[derive(Debug, Clone)]
pub struct SparseSystem {
    /// `ε·K + C`
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub parts: SystemParts,
    pub dofs: DofMap,
    pub epsilon: f64,
}

impl SparseSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

struct LocalBlock {
    stiffness: Vec<f64>,
    mass: Vec<f64>,
    conv: Vec<f64>,
    load: Vec<f64>,
}

fn sparsity(dofs: &DofMap) -> Vec<Vec<usize>> {
    let n = dofs.n_cells();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); dofs.n_interior()];
    let mut local = Vec::new();
    for j in 0..n {
        for i in 0..n {
            dofs.cell_dofs(i, j, &mut local);
            for r in local.iter().flatten() {
                rows[*r].extend(local.iter().flatten());
            }
        }
    }
    for r in rows.iter_mut() {
        r.sort_unstable();
        r.dedup();
    }
    rows
}

/// Assembles the discrete system for degree `k` on `mesh`.
pub fn assemble_system(
    mesh: &TensorMesh2D,
    k: usize,
    problem: &Problem,
    opts: &AssemblyOptions,
) -> Result<SparseSystem, AssemblyError> {
    let basis = BasisSet::new(k)?;
    let dofs = DofMap::new(mesh, k);
    assemble_with_dofs(mesh, &basis, dofs, problem, opts)
}

pub fn assemble_with_dofs(
    mesh: &TensorMesh2D,
    basis: &BasisSet,
    dofs: DofMap,
    problem: &Problem,
    opts: &AssemblyOptions,
) -> Result<SparseSystem, AssemblyError> {
    let n = mesh.n();
    if dofs.n_cells() != n || dofs.degree() != basis.degree() {
        return Err(AssemblyError::DofMismatch {
            dofs: dofs.n_cells(),
            mesh: n,
        });
    }
    let k = basis.degree();
    let q = opts.quad_points_for(k);
    let scale = opts.layer_quadrature.then_some(problem.epsilon);
    let rules_x = cell_rules(mesh.mesh_x.points(), q, scale)?;
    let rules_y = cell_rules(mesh.mesh_y.points(), q, scale)?;
    let tables_x: Vec<_> = rules_x.iter().map(|r| basis.tabulate(&r.points)).collect();
    let tables_y: Vec<_> = rules_y.iter().map(|r| basis.tabulate(&r.points)).collect();
    let nb = k + 1;
    let nloc = nb * nb;

    let local_block = |cell: usize| -> LocalBlock {
        let (i, j) = (cell % n, cell / n);
        let (x0, x1, y0, y1) = mesh.cell(i, j);
        let (hx, hy) = (x1 - x0, y1 - y0);
        let (rx, ry) = (&rules_x[i], &rules_y[j]);
        let (tx, ty) = (&tables_x[i], &tables_y[j]);
        let mut blk = LocalBlock {
            stiffness: vec![0.0; nloc * nloc],
            mass: vec![0.0; nloc * nloc],
            conv: vec![0.0; nloc * nloc],
            load: vec![0.0; nloc],
        };
        let mut phi = vec![0.0; nloc];
        let mut dphi_x = vec![0.0; nloc];
        let mut dphi_y = vec![0.0; nloc];
        for qy in 0..ry.len() {
            let y = y0 + hy * ry.points[qy];
            for qx in 0..rx.len() {
                let x = x0 + hx * rx.points[qx];
                let w = rx.weights[qx] * ry.weights[qy] * hx * hy;
                for b in 0..nb {
                    for a in 0..nb {
                        let l = a + nb * b;
                        phi[l] = tx.value(qx, a) * ty.value(qy, b);
                        dphi_x[l] = tx.deriv(qx, a) / hx * ty.value(qy, b);
                        dphi_y[l] = tx.value(qx, a) * ty.deriv(qy, b) / hy;
                    }
                }
                let b1 = (problem.b1)(x, y);
                let b2 = (problem.b2)(x, y);
                let c = (problem.c)(x, y);
                let f = (problem.f)(x, y);
                for l in 0..nloc {
                    let wl = w * phi[l];
                    blk.load[l] += wl * f;
                    let row = l * nloc;
                    for m in 0..nloc {
                        blk.stiffness[row + m] +=
                            w * (dphi_x[m] * dphi_x[l] + dphi_y[m] * dphi_y[l]);
                        blk.mass[row + m] += wl * phi[m];
                        blk.conv[row + m] +=
                            wl * (c * phi[m] - (b1 * dphi_x[m] + b2 * dphi_y[m]));
                    }
                }
            }
        }
        blk
    };

    let n_cells = n * n;
    let blocks: Vec<LocalBlock> = if opts.deterministic {
        (0..n_cells).map(local_block).collect()
    } else {
        (0..n_cells).into_par_iter().map(local_block).collect()
    };

    let pattern = sparsity(&dofs);
    let mut stiffness = CsrMatrix::from_pattern(&pattern);
    let mut mass = stiffness.clone();
    let mut conv = stiffness.clone();
    let mut rhs = vec![0.0; dofs.n_interior()];
    let mut local = Vec::with_capacity(nloc);
    for (cell, blk) in blocks.iter().enumerate() {
        dofs.cell_dofs(cell % n, cell / n, &mut local);
        for (l, r) in local.iter().enumerate() {
            let Some(r) = *r else { continue };
            rhs[r] += blk.load[l];
            for (m, c) in local.iter().enumerate() {
                let Some(c) = *c else { continue };
                let p = l * nloc + m;
                stiffness.add(r, c, blk.stiffness[p]);
                mass.add(r, c, blk.mass[p]);
                conv.add(r, c, blk.conv[p]);
            }
        }
    }

    let matrix = stiffness.linear_combination(problem.epsilon, &conv, 1.0);
    Ok(SparseSystem {
        matrix,
        rhs,
        parts: SystemParts {
            stiffness,
            mass,
            convection_reaction: conv,
        },
        dofs,
        epsilon: problem.epsilon,
    })
}

/// `A x`.
pub fn apply_operator(sys: &SparseSystem, x: &[f64]) -> Result<Vec<f64>, AssemblyError> {
    if x.len() != sys.dim() {
        return Err(AssemblyError::Dimension {
            expected: sys.dim(),
            got: x.len(),
        });
    }
    Ok(sys.matrix.mul_vec(x))
}

/// `(ε·vᵀKv + vᵀMv)^{1/2}` for the discrete function with interior
/// coefficients `v`.
pub fn discrete_energy_norm(
    parts: &SystemParts,
    epsilon: f64,
    v: &[f64],
) -> Result<f64, AssemblyError> {
    let dim = parts.mass.dim();
    if v.len() != dim {
        return Err(AssemblyError::Dimension {
            expected: dim,
            got: v.len(),
        });
    }
    let s = epsilon * parts.stiffness.quadratic_form(v) + parts.mass.quadratic_form(v);
    Ok(s.max(0.0).sqrt())
}
