//! Linear solvers for the assembled nonsymmetric systems: restarted GMRES
//! with optional ILU(0) preconditioning, and banded LU with partial
//! pivoting as a direct fallback.

mod banded;
mod gmres;
mod ilu;

pub use banded::BandedLu;
pub use ilu::Ilu0;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::assembly::{CsrMatrix, SparseSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Gmres,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precondition {
    None,
    Ilu0,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gmres" => Ok(Method::Gmres),
            "direct" => Ok(Method::Direct),
            _ => Err(format!("unknown solver `{s}` (gmres|direct)")),
        }
    }
}

impl FromStr for Precondition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Precondition::None),
            "ilu0" => Ok(Precondition::Ilu0),
            _ => Err(format!("unknown preconditioner `{s}` (none|ilu0)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gmres => "gmres",
            Method::Direct => "direct",
        })
    }
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precondition::None => "none",
            Precondition::Ilu0 => "ilu0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub restart: usize,
    pub rel_tol: f64,
    /// `None` caps at ten times the dimension.
    pub max_iters: Option<usize>,
    pub precondition: Precondition,
    /// Re-solve with banded LU when GMRES stagnates, hits the cap or the
    /// ILU(0) factorization breaks down.
    pub fallback_direct: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Gmres,
            restart: 50,
            rel_tol: 1e-12,
            max_iters: None,
            precondition: Precondition::Ilu0,
            fallback_direct: true,
        }
    }
}

impl SolveOptions {
    pub fn direct() -> Self {
        Self {
            method: Method::Direct,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(SolveError::InvalidOptions(format!(
                "rel_tol = {} must lie in (0, 1)",
                self.rel_tol
            )));
        }
        if self.restart == 0 {
            return Err(SolveError::InvalidOptions("restart must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b − Ax‖₂ / ‖b‖₂`, recomputed from the returned `x`.
    pub rel_residual: f64,
    pub seconds: f64,
    /// `x` came from the direct fallback after GMRES gave up.
    pub fell_back: bool,
}

impl fmt::Display for SolveStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iters={} relres={:.3e} secs={:.3}",
            self.iterations, self.rel_residual, self.seconds
        )?;
        if self.fell_back {
            f.write_str(" fallback=direct")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("GMRES {} ({stats})", if *.stagnated { "stagnated" } else { "did not reach the tolerance" })]
    NotConverged { stats: SolveStats, stagnated: bool },
    #[error("zero pivot in ILU(0) at row {row}")]
    ZeroPivot { row: usize },
    #[error("singular pivot in banded LU at row {row}")]
    SingularPivot { row: usize },
    #[error("system is empty")]
    Empty,
    #[error("right-hand side has length {got}, matrix dimension is {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("{0}")]
    InvalidOptions(String),
}

/// Right preconditioner `M⁻¹`.
pub enum Preconditioner {
    Identity,
    Ilu0(Ilu0),
}

impl Preconditioner {
    pub fn build(kind: Precondition, a: &CsrMatrix) -> Result<Self, SolveError> {
        Ok(match kind {
            Precondition::None => Preconditioner::Identity,
            Precondition::Ilu0 => Preconditioner::Ilu0(Ilu0::factor(a)?),
        })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Identity => z.copy_from_slice(r),
            Preconditioner::Ilu0(f) => f.apply(r, z),
        }
    }
}

/// `‖b − Ax‖₂ / ‖b‖₂`, or `‖b − Ax‖₂` when `b = 0`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (q - p).powi(2)).sum::<f64>().sqrt();
    let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bn > 0.0 {
        r / bn
    } else {
        r
    }
}

/// Solves `A x = b` for a raw CSR matrix.
pub fn solve_matrix(
    a: &CsrMatrix,
    b: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveStats), SolveError> {
    opts.validate()?;
    let n = a.dim();
    if n == 0 {
        return Err(SolveError::Empty);
    }
    if b.len() != n {
        return Err(SolveError::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let start = Instant::now();
    match opts.method {
        Method::Direct => {
            let x = BandedLu::factor(a)?.solve(b);
            let stats = SolveStats {
                iterations: 1,
                rel_residual: relative_residual(a, &x, b),
                seconds: start.elapsed().as_secs_f64(),
                fell_back: false,
            };
            Ok((x, stats))
        }
        Method::Gmres => match run_gmres(a, b, opts, start) {
            Err(e @ (SolveError::NotConverged { .. } | SolveError::ZeroPivot { .. }))
                if opts.fallback_direct =>
            {
                let spent = match e {
                    SolveError::NotConverged { stats, .. } => stats.iterations,
                    _ => 0,
                };
                let x = BandedLu::factor(a)?.solve(b);
                let stats = SolveStats {
                    iterations: spent,
                    rel_residual: relative_residual(a, &x, b),
                    seconds: start.elapsed().as_secs_f64(),
                    fell_back: true,
                };
                Ok((x, stats))
            }
            other => other,
        },
    }
}

fn run_gmres(
    a: &CsrMatrix,
    b: &[f64],
    opts: &SolveOptions,
    start: Instant,
) -> Result<(Vec<f64>, SolveStats), SolveError> {
    let n = a.dim();
    let pc = Preconditioner::build(opts.precondition, a)?;
    let mut x = vec![0.0; n];
    let max_iters = opts.max_iters.unwrap_or(10 * n);
    let out = gmres::gmres(a, b, &mut x, &pc, opts.restart, opts.rel_tol, max_iters);
    let stats = SolveStats {
        iterations: out.iterations,
        rel_residual: relative_residual(a, &x, b),
        seconds: start.elapsed().as_secs_f64(),
        fell_back: false,
    };
    if out.converged && stats.rel_residual <= opts.rel_tol {
        Ok((x, stats))
    } else {
        Err(SolveError::NotConverged {
            stats,
            stagnated: out.stagnated,
        })
    }
}

pub fn solve(sys: &SparseSystem, opts: &SolveOptions) -> Result<(Vec<f64>, SolveStats), SolveError> {
    solve_matrix(&sys.matrix, &sys.rhs, opts)
}
