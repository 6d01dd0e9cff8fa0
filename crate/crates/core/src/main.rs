use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bakhvalov_fem::analysis::{
    emit_rates, emit_table, interp_convergence_study, solve_convergence_study, solve_cell,
    StudyConfig, TableFormat,
};
use bakhvalov_fem::assembly::AssemblyOptions;
use bakhvalov_fem::config::{parse_list, read_entries};
use bakhvalov_fem::linsolve::{relative_residual, Method, Precondition, SolveOptions};
use bakhvalov_fem::mesh::{bakhvalov_points, dump_points, mesh_report, MeshConfig};
use bakhvalov_fem::problems::ProblemSpec;

#[derive(Parser)]
#[command(name = "bakfem", version, about = "Q_k finite elements on Bakhvalov-type meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the points of a one-dimensional mesh.
    Mesh(MeshArgs),
    /// Energy-norm convergence study over lists of ε and N.
    Converge(ConvergeArgs),
    /// Solve a single (ε, N) cell.
    Solve(SolveArgs),
    /// Standard-interpolation error rates of the solution components.
    InterpCheck(InterpArgs),
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Decay constant; defaults to 2 for `x` and 1 for `y`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_parser = ["x", "y"])]
    axis: Option<String>,
    /// Print step-size diagnostics instead of the points.
    #[arg(long)]
    report: bool,
    #[arg(long)]
    allow_large_eps: bool,
    /// `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct StudyArgs {
    #[arg(long)]
    k: Option<usize>,
    /// Defaults to k + 1.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta_x: Option<f64>,
    #[arg(long)]
    beta_y: Option<f64>,
    /// `paper-example` or `constant-coefficients`.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    solver: Option<Method>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    restart: Option<usize>,
    #[arg(long)]
    precond: Option<Precondition>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Report GMRES failures instead of re-solving with banded LU.
    #[arg(long)]
    no_fallback: bool,
    /// Assembly Gauss points per direction (default k + 2).
    #[arg(long)]
    quad: Option<usize>,
    /// Error-norm Gauss points per direction (default k + 3).
    #[arg(long)]
    q_err: Option<usize>,
    /// Plain Gauss rules in every cell, also next to the layer transition.
    #[arg(long)]
    plain_quad: bool,
    #[arg(long)]
    allow_large_eps: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// Comma-separated ε values.
    #[arg(long)]
    eps: Option<String>,
    /// Comma-separated N values.
    #[arg(long)]
    n: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the text table to stdout.
    #[arg(long)]
    text: bool,
    /// Run cells one after another.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    study: StudyArgs,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Write the system matrix in Matrix Market format.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    /// Write `index x y` for every interior degree of freedom.
    #[arg(long)]
    dump_dofs: Option<PathBuf>,
}

#[derive(Args)]
struct InterpArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta_x: Option<f64>,
    #[arg(long)]
    beta_y: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    /// Also write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Command-line values layered over an optional config file.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => read_entries(p)?,
            None => BTreeMap::new(),
        };
        Ok(Self { file })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| anyhow!("config: cannot parse {key} = {v}")))
            .transpose()
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.get(flag, key)?
            .ok_or_else(|| anyhow!("missing --{key} (flag or config entry)"))
    }

    fn list<T: FromStr>(&self, flag: Option<String>, key: &str) -> Result<Vec<T>> {
        let raw: String = self.require(flag, key)?;
        parse_list(&raw).map_err(|e| anyhow!("--{key}: {e}"))
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.get(None::<bool>, key)?.unwrap_or(false))
    }

    /// Registry problem, optionally overridden by `problem-*` entries.
    fn problem(&self, flag: Option<String>) -> Result<ProblemSpec> {
        let custom: BTreeMap<String, String> = self
            .file
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("problem-").map(|s| (s.to_string(), v.clone())))
            .collect();
        let name: Option<String> = self.get(flag, "problem")?;
        if custom.is_empty() {
            return Ok(ProblemSpec::by_name(name.as_deref().unwrap_or("paper-example"))?);
        }
        let mut entries = custom;
        if let Some(n) = name {
            entries.entry("convection".into()).or_insert(n);
        }
        Ok(ProblemSpec::from_entries(&entries)?)
    }
}

fn study_config(s: &Settings, a: &StudyArgs, eps: Vec<f64>, n: Vec<usize>) -> Result<StudyConfig> {
    let k = s.get(a.k, "k")?.unwrap_or(1);
    let mut cfg = StudyConfig::new(k, eps, n);
    cfg.sigma = s.get(a.sigma, "sigma")?;
    cfg.beta = (
        s.get(a.beta_x, "beta-x")?.unwrap_or(cfg.beta.0),
        s.get(a.beta_y, "beta-y")?.unwrap_or(cfg.beta.1),
    );
    cfg.problem = s.problem(a.problem.clone())?;
    let mut solver = SolveOptions::default();
    if let Some(m) = s.get(a.solver, "solver")? {
        solver.method = m;
    }
    if let Some(t) = s.get(a.tol, "tol")? {
        solver.rel_tol = t;
    }
    if let Some(r) = s.get(a.restart, "restart")? {
        solver.restart = r;
    }
    if let Some(p) = s.get(a.precond, "precond")? {
        solver.precondition = p;
    }
    solver.max_iters = s.get(a.max_iters, "max-iters")?;
    solver.fallback_direct = !s.flag(a.no_fallback, "no-fallback")?;
    cfg.solver = solver;
    cfg.assembly = AssemblyOptions {
        quad_points: s.get(a.quad, "quad")?,
        layer_quadrature: !s.flag(a.plain_quad, "plain-quad")?,
        ..AssemblyOptions::default()
    };
    cfg.q_err = s.get(a.q_err, "q-err")?;
    cfg.allow_large_eps = s.flag(a.allow_large_eps, "allow-large-eps")?;
    Ok(cfg)
}

fn run_mesh(a: MeshArgs) -> Result<bool> {
    let s = Settings::load(a.config.as_deref())?;
    let axis: String = s.get(a.axis, "axis")?.unwrap_or_else(|| "x".into());
    let default_beta = if axis == "x" { 2.0 } else { 1.0 };
    let cfg = MeshConfig::new(
        s.require(a.n, "n")?,
        s.require(a.eps, "eps")?,
        s.require(a.sigma, "sigma")?,
        s.get(a.beta, "beta")?.unwrap_or(default_beta),
    )
    .allow_large_eps(s.flag(a.allow_large_eps, "allow-large-eps")?);
    let mesh = bakhvalov_points(&cfg)?;
    if s.flag(a.report, "report")? {
        println!("{}", mesh_report(&mesh, &cfg));
    } else {
        print!("{}", dump_points(&mesh));
    }
    Ok(true)
}

fn run_converge(a: ConvergeArgs) -> Result<bool> {
    let s = Settings::load(a.study.config.as_deref())?;
    let eps = s.list(a.eps, "eps")?;
    let n = s.list(a.n, "n")?;
    let mut cfg = study_config(&s, &a.study, eps, n)?;
    cfg.parallel = !s.flag(a.serial, "serial")?;
    let result = solve_convergence_study(&cfg)?;
    for c in &result.cells {
        match &c.outcome {
            Ok(r) => eprintln!(
                "eps={:e} N={} dim={} {} energy={:.6e}",
                c.epsilon, c.n, r.dim, r.stats, r.norms.energy
            ),
            Err(e) => eprintln!("eps={:e} N={} failed: {e}", c.epsilon, c.n),
        }
    }
    let out: Option<PathBuf> = s.get(a.out, "out")?;
    if let Some(path) = &out {
        std::fs::write(path, emit_table(&result.table, TableFormat::Csv)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if s.flag(a.text, "text")? || out.is_none() {
        print!("{}", emit_table(&result.table, TableFormat::Text)?);
    }
    Ok(result.all_solved())
}

fn run_solve(a: SolveArgs) -> Result<bool> {
    let s = Settings::load(a.study.config.as_deref())?;
    let eps: f64 = s.require(a.eps, "eps")?;
    let n: usize = s.require(a.n, "n")?;
    let cfg = study_config(&s, &a.study, vec![eps], vec![n])?;
    let sol = solve_cell(&cfg, eps, n)?;
    if let Some(path) = s.get(a.dump_matrix, "dump-matrix")? {
        let mut f = std::fs::File::create(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        sol.system.matrix.write_matrix_market(&mut f)?;
    }
    if let Some(path) = s.get(a.dump_dofs, "dump-dofs")? {
        std::fs::write(&path, sol.system.dofs.dump())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let norms = cfg.error_norms(&sol.uh, &sol.exact.u, eps)?;
    println!("dim={} {}", sol.system.dim(), sol.stats);
    println!(
        "residual={:.3e}",
        relative_residual(&sol.system.matrix, &sol.interior, &sol.system.rhs)
    );
    println!(
        "energy={:.6e} l2={:.6e} h1_semi={:.6e} linf={:.6e}",
        norms.energy, norms.l2, norms.h1_semi, norms.linf_quad
    );
    Ok(true)
}

fn run_interp(a: InterpArgs) -> Result<bool> {
    let s = Settings::load(a.config.as_deref())?;
    let k: usize = s.get(a.k, "k")?.unwrap_or(1);
    let sigma = s.get(a.sigma, "sigma")?.unwrap_or((k + 1) as f64);
    let beta = (
        s.get(a.beta_x, "beta-x")?.unwrap_or(2.0),
        s.get(a.beta_y, "beta-y")?.unwrap_or(1.0),
    );
    let eps: f64 = s.require(a.eps, "eps")?;
    let n_list: Vec<usize> = s.list(a.n_list, "n-list")?;
    let problem = s.problem(a.problem)?;
    if k == 0 {
        bail!("--k must be at least 1");
    }
    let table = interp_convergence_study(k, sigma, beta, eps, &n_list, &problem)?;
    if let Some(path) = s.get(a.out, "out")? {
        std::fs::write(&path, emit_table(&table, TableFormat::Csv)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", emit_rates(&table)?);
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mesh(a) => run_mesh(a),
        Command::Converge(a) => run_converge(a),
        Command::Solve(a) => run_solve(a),
        Command::InterpCheck(a) => run_interp(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
