use rayon::prelude::*;
use thiserror::Error;

use super::norms::{error_norms, error_norms_layered, ErrorNorms};
use super::table::ConvergenceTable;
use crate::assembly::{assemble_system, AssemblyError, AssemblyOptions, SparseSystem};
use crate::fespace::QuadError;
use crate::interpolant::{interpolate_standard, FemFunction, InterpolantError};
use crate::linsolve::{relative_residual, solve, SolveError, SolveOptions, SolveStats};
use crate::mesh::{tensor_mesh, MeshConfig, MeshError, TensorMesh2D};
use crate::problems::{ExactSolution, ProblemError, ProblemSpec, SmoothField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StudyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Interpolant(#[from] InterpolantError),
    #[error("study needs at least one epsilon and one N")]
    EmptyLists,
}

/// Parameters shared by every `(ε, N)` cell of a study.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub k: usize,
    /// `None` selects `k + 1`.
    pub sigma: Option<f64>,
    /// Mesh decay constants `(β_x, β_y)`.
    pub beta: (f64, f64),
    pub eps_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub problem: ProblemSpec,
    pub solver: SolveOptions,
    pub assembly: AssemblyOptions,
    /// Error-norm Gauss points per direction; `None` selects `k + 3`.
    pub q_err: Option<usize>,
    pub allow_large_eps: bool,
    /// Run cells on the rayon pool.
    pub parallel: bool,
}

impl StudyConfig {
    pub fn new(k: usize, eps_list: Vec<f64>, n_list: Vec<usize>) -> Self {
        Self {
            k,
            sigma: None,
            beta: (2.0, 1.0),
            eps_list,
            n_list,
            problem: ProblemSpec::paper_example(),
            solver: SolveOptions::default(),
            assembly: AssemblyOptions::default(),
            q_err: None,
            allow_large_eps: false,
            parallel: true,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or((self.k + 1) as f64)
    }

    pub fn q_err(&self) -> usize {
        self.q_err.unwrap_or(self.k + 3)
    }

    /// Error norms with the quadrature matching `assembly.layer_quadrature`.
    pub fn error_norms(&self, uh: &FemFunction, exact: &SmoothField, epsilon: f64) -> Result<ErrorNorms, QuadError> {
        if self.assembly.layer_quadrature {
            error_norms_layered(uh, exact, epsilon, self.q_err())
        } else {
            error_norms(uh, exact, epsilon, self.q_err())
        }
    }

    pub fn mesh(&self, epsilon: f64, n: usize) -> Result<TensorMesh2D, MeshError> {
        let s = self.sigma();
        let cx = MeshConfig::new(n, epsilon, s, self.beta.0).allow_large_eps(self.allow_large_eps);
        let cy = MeshConfig::new(n, epsilon, s, self.beta.1).allow_large_eps(self.allow_large_eps);
        tensor_mesh(&cx, &cy)
    }

    fn cells(&self) -> Vec<(f64, usize)> {
        self.eps_list
            .iter()
            .flat_map(|&e| self.n_list.iter().map(move |&n| (e, n)))
            .collect()
    }
}

/// Everything produced by one discrete solve.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub mesh: TensorMesh2D,
    pub system: SparseSystem,
    pub uh: FemFunction,
    pub interior: Vec<f64>,
    pub stats: SolveStats,
    pub exact: ExactSolution,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub epsilon: f64,
    pub n: usize,
    pub outcome: Result<CellReport, StudyError>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellReport {
    pub norms: ErrorNorms,
    pub stats: SolveStats,
    /// `‖Ax − b‖/‖b‖` recomputed from the assembled system.
    pub recomputed_residual: f64,
    pub dim: usize,
}

/// Builds, assembles and solves one cell.
pub fn solve_cell(cfg: &StudyConfig, epsilon: f64, n: usize) -> Result<CellSolution, StudyError> {
    let mesh = cfg.mesh(epsilon, n)?;
    let (problem, exact) = cfg.problem.build(epsilon)?;
    let system = assemble_system(&mesh, cfg.k, &problem, &cfg.assembly)?;
    let (interior, stats) = solve(&system, &cfg.solver)?;
    let uh = FemFunction::from_interior(&mesh, cfg.k, &interior)?;
    Ok(CellSolution {
        mesh,
        system,
        uh,
        interior,
        stats,
        exact,
    })
}

fn run_cell(cfg: &StudyConfig, epsilon: f64, n: usize) -> CellResult {
    let outcome = solve_cell(cfg, epsilon, n).and_then(|sol| {
        let norms = cfg.error_norms(&sol.uh, &sol.exact.u, epsilon)?;
        Ok(CellReport {
            norms,
            stats: sol.stats,
            recomputed_residual: relative_residual(&sol.system.matrix, &sol.interior, &sol.system.rhs),
            dim: sol.system.dim(),
        })
    });
    CellResult {
        epsilon,
        n,
        outcome,
    }
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub table: ConvergenceTable,
    pub cells: Vec<CellResult>,
}

impl StudyResult {
    pub fn all_solved(&self) -> bool {
        self.cells.iter().all(|c| c.outcome.is_ok())
    }

    pub fn cell(&self, epsilon: f64, n: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.epsilon == epsilon && c.n == n)
    }
}

/// Energy-norm error `‖u − u^N‖_ε` for every `(ε, N)`; failing cells are
/// annotated in the table rather than aborting the study.
pub fn solve_convergence_study(cfg: &StudyConfig) -> Result<StudyResult, StudyError> {
    if cfg.eps_list.is_empty() || cfg.n_list.is_empty() {
        return Err(StudyError::EmptyLists);
    }
    let cells = cfg.cells();
    let results: Vec<CellResult> = if cfg.parallel {
        cells.par_iter().map(|&(e, n)| run_cell(cfg, e, n)).collect()
    } else {
        cells.iter().map(|&(e, n)| run_cell(cfg, e, n)).collect()
    };

    let mut table = ConvergenceTable::new(vec!["energy".into()])
        .with_metadata("problem", &cfg.problem.name)
        .with_metadata("k", cfg.k)
        .with_metadata("sigma", cfg.sigma())
        .with_metadata("beta", format!("({}, {})", cfg.beta.0, cfg.beta.1))
        .with_metadata(
            "solver",
            format!(
                "{} precond={} restart={} tol={:e}",
                cfg.solver.method, cfg.solver.precondition, cfg.solver.restart, cfg.solver.rel_tol
            ),
        )
        .with_metadata(
            "quadrature",
            format!(
                "assembly q={} error q={}{}",
                cfg.assembly.quad_points_for(cfg.k),
                cfg.q_err(),
                if cfg.assembly.layer_quadrature { " layer-graded" } else { "" }
            ),
        );
    for r in &results {
        match &r.outcome {
            Ok(rep) => table.push(r.epsilon, r.n, vec![Some(rep.norms.energy)], None),
            Err(e) => table.push(r.epsilon, r.n, vec![None], Some(e.to_string())),
        }
    }
    table.fill_orders();
    Ok(StudyResult {
        table,
        cells: results,
    })
}

/// Column names of [`interp_convergence_study`].
pub const INTERP_COLUMNS: [&str; 8] = [
    "S_l2", "S_energy", "E1_l2", "E1_energy", "E2_l2", "E2_energy", "E12_l2", "E12_energy",
];

/// Standard-interpolation errors of each decomposition component.
pub fn interp_convergence_study(
    k: usize,
    sigma: f64,
    beta: (f64, f64),
    epsilon: f64,
    n_list: &[usize],
    problem: &ProblemSpec,
) -> Result<ConvergenceTable, StudyError> {
    if n_list.is_empty() {
        return Err(StudyError::EmptyLists);
    }
    let (_, exact) = problem.build(epsilon)?;
    let dec = exact
        .decomposition
        .as_ref()
        .ok_or(InterpolantError::MissingDecomposition)?;
    let mut table = ConvergenceTable::new(INTERP_COLUMNS.iter().map(|s| s.to_string()).collect())
        .with_metadata("problem", &problem.name)
        .with_metadata("k", k)
        .with_metadata("sigma", sigma)
        .with_metadata("beta", format!("({}, {})", beta.0, beta.1))
        .with_metadata("error q", format!("{} layer-graded", k + 3));
    let comps: [&SmoothField; 4] = dec.components();
    for &n in n_list {
        let cx = MeshConfig::new(n, epsilon, sigma, beta.0);
        let cy = MeshConfig::new(n, epsilon, sigma, beta.1);
        let mesh = tensor_mesh(&cx, &cy)?;
        let mut values = Vec::with_capacity(8);
        for c in comps {
            let ci = interpolate_standard(|x, y| c.eval(x, y), &mesh, k);
            let e = error_norms_layered(&ci, c, epsilon, k + 3)?;
            values.push(Some(e.l2));
            values.push(Some(e.energy));
        }
        table.push(epsilon, n, values, None);
    }
    table.fill_orders();
    Ok(table)
}
