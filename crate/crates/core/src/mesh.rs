//! Bakhvalov-type layer-adapted meshes.
//!
//! In each direction the mesh is logarithmically graded on `[0, x_{N/2}]`
//! with the transition point `x_{N/2} = -(σε/β) ln ε`, and uniform on
//! `[x_{N/2}, 1]`. The two-dimensional mesh is the tensor product of two
//! such one-dimensional meshes.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("number of cells N = {0} must be even and at least 4")]
    InvalidCellCount(usize),
    #[error("epsilon = {0} must lie in (0, 1)")]
    InvalidEpsilon(f64),
    #[error("epsilon = {eps} exceeds 1/N = {inv_n}; pass the large-epsilon override to build it anyway")]
    EpsilonTooLarge { eps: f64, inv_n: f64 },
    #[error("sigma = {0} must be at least 1")]
    InvalidSigma(f64),
    #[error("beta = {0} must be positive")]
    InvalidBeta(f64),
    #[error("transition point {0} is not inside (0, 1)")]
    TransitionOutside(f64),
    #[error("x- and y-meshes disagree on N ({nx} vs {ny})")]
    MismatchedCellCount { nx: usize, ny: usize },
}

/// Parameters of a one-dimensional Bakhvalov-type mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshConfig {
    /// Number of cells, even.
    pub n: usize,
    pub epsilon: f64,
    /// Grading exponent.
    pub sigma: f64,
    /// Decay rate of the layer resolved by this direction.
    pub beta: f64,
    /// Skip the `ε ≤ 1/N` requirement.
    pub allow_large_eps: bool,
}

impl MeshConfig {
    pub fn new(n: usize, epsilon: f64, sigma: f64, beta: f64) -> Self {
        Self {
            n,
            epsilon,
            sigma,
            beta,
            allow_large_eps: false,
        }
    }

    pub fn allow_large_eps(mut self, allow: bool) -> Self {
        self.allow_large_eps = allow;
        self
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.n < 4 || self.n % 2 != 0 {
            return Err(MeshError::InvalidCellCount(self.n));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(MeshError::InvalidEpsilon(self.epsilon));
        }
        let inv_n = 1.0 / self.n as f64;
        if !self.allow_large_eps && self.epsilon > inv_n {
            return Err(MeshError::EpsilonTooLarge {
                eps: self.epsilon,
                inv_n,
            });
        }
        if !(self.sigma >= 1.0) {
            return Err(MeshError::InvalidSigma(self.sigma));
        }
        if !(self.beta > 0.0) {
            return Err(MeshError::InvalidBeta(self.beta));
        }
        Ok(())
    }

    /// `x_{N/2} = -(σε/β) ln ε`.
    pub fn transition_point(&self) -> f64 {
        -(self.sigma * self.epsilon / self.beta) * self.epsilon.ln()
    }
}

/// Ordered mesh points `x_0 = 0 < x_1 < … < x_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    points: Vec<f64>,
}

impl Mesh1D {
    /// Wraps an arbitrary strictly increasing point set on `[0, 1]`.
    pub fn from_points(points: Vec<f64>) -> Option<Self> {
        let ok = points.len() >= 2
            && points[0] == 0.0
            && *points.last().unwrap() == 1.0
            && points.windows(2).all(|w| w[1] > w[0]);
        ok.then_some(Self { points })
    }

    /// Uniform mesh with `n` cells.
    pub fn uniform(n: usize) -> Self {
        let mut points: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        points[n] = 1.0;
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n_cells(&self) -> usize {
        self.points.len() - 1
    }

    pub fn step(&self, i: usize) -> f64 {
        self.points[i + 1] - self.points[i]
    }

    pub fn steps(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_step(&self) -> f64 {
        self.steps().into_iter().fold(0.0, f64::max)
    }

    /// Index of the cell containing `x`; points on an interior mesh line
    /// belong to the cell on their right, `x = 1` to the last cell.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.n_cells();
        match self.points.partition_point(|&p| p <= x) {
            0 => 0,
            i => (i - 1).min(n - 1),
        }
    }
}

/// Builds the one-dimensional Bakhvalov-type mesh.
pub fn bakhvalov_points(cfg: &MeshConfig) -> Result<Mesh1D, MeshError> {
    cfg.validate()?;
    let n = cfg.n;
    let half = n / 2;
    let nf = n as f64;
    let scale = cfg.sigma * cfg.epsilon / cfg.beta;
    let transition = cfg.transition_point();
    if !(transition > 0.0 && transition < 1.0) {
        return Err(MeshError::TransitionOutside(transition));
    }

    let mut points = Vec::with_capacity(n + 1);
    for i in 0..half {
        let arg = 1.0 - 2.0 * (1.0 - cfg.epsilon) * i as f64 / nf;
        points.push(-scale * arg.ln());
    }
    // The i = N/2 argument is ε up to rounding; use the closed form.
    points.push(transition);
    for i in half + 1..=n {
        points.push(1.0 - 2.0 * (1.0 - transition) * (n - i) as f64 / nf);
    }
    points[0] = 0.0;

    if !points.windows(2).all(|w| w[1] > w[0]) {
        return Err(MeshError::TransitionOutside(transition));
    }
    Ok(Mesh1D { points })
}

/// Tensor-product rectangulation of the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMesh2D {
    pub mesh_x: Mesh1D,
    pub mesh_y: Mesh1D,
}

impl TensorMesh2D {
    pub fn new(mesh_x: Mesh1D, mesh_y: Mesh1D) -> Result<Self, MeshError> {
        if mesh_x.n_cells() != mesh_y.n_cells() {
            return Err(MeshError::MismatchedCellCount {
                nx: mesh_x.n_cells(),
                ny: mesh_y.n_cells(),
            });
        }
        Ok(Self { mesh_x, mesh_y })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            mesh_x: Mesh1D::uniform(n),
            mesh_y: Mesh1D::uniform(n),
        }
    }

    /// Cells per direction.
    pub fn n(&self) -> usize {
        self.mesh_x.n_cells()
    }

    /// `[x_i, x_{i+1}] × [y_j, y_{j+1}]` as `(x0, x1, y0, y1)`.
    pub fn cell(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        let px = self.mesh_x.points();
        let py = self.mesh_y.points();
        (px[i], px[i + 1], py[j], py[j + 1])
    }
}

pub fn tensor_mesh(cfg_x: &MeshConfig, cfg_y: &MeshConfig) -> Result<TensorMesh2D, MeshError> {
    if cfg_x.n != cfg_y.n {
        return Err(MeshError::MismatchedCellCount {
            nx: cfg_x.n,
            ny: cfg_y.n,
        });
    }
    TensorMesh2D::new(bakhvalov_points(cfg_x)?, bakhvalov_points(cfg_y)?)
}

/// Step-size diagnostics of a Bakhvalov-type mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshReport {
    /// `h_0 / (ε/N)`.
    pub h0_over_eps_n: f64,
    /// `h_0 ≤ h_1 ≤ … ≤ h_{N/2-2}`.
    pub fine_monotone: bool,
    /// Extremes of `N·h_i` over the uniform part `i ≥ N/2`.
    pub coarse_min: f64,
    pub coarse_max: f64,
    /// `x_{N/2}`.
    pub transition_value: f64,
    /// `exp(-β x_{N/2-1}/ε)`, equal to `(ε + 2(1-ε)/N)^σ`.
    pub layer_width_value: f64,
    /// `exp(-β x_{N/2}/ε)`, equal to `ε^σ`.
    pub transition_decay: f64,
}

pub fn mesh_report(mesh: &Mesh1D, cfg: &MeshConfig) -> MeshReport {
    let n = mesh.n_cells();
    let half = n / 2;
    let nf = n as f64;
    let steps = mesh.steps();
    let fine_monotone = steps[..half - 1].windows(2).all(|w| w[0] <= w[1]);
    let (coarse_min, coarse_max) = steps[half..]
        .iter()
        .map(|h| h * nf)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    let pts = mesh.points();
    MeshReport {
        h0_over_eps_n: steps[0] / (cfg.epsilon / nf),
        fine_monotone,
        coarse_min,
        coarse_max,
        transition_value: pts[half],
        layer_width_value: (-cfg.beta * pts[half - 1] / cfg.epsilon).exp(),
        transition_decay: (-cfg.beta * pts[half] / cfg.epsilon).exp(),
    }
}

impl std::fmt::Display for MeshReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "h0_over_epsN:      {:.16e}", self.h0_over_eps_n)?;
        writeln!(f, "fine_monotone:     {}", self.fine_monotone)?;
        writeln!(f, "coarse_min:        {:.16e}", self.coarse_min)?;
        writeln!(f, "coarse_max:        {:.16e}", self.coarse_max)?;
        writeln!(f, "transition_value:  {:.16e}", self.transition_value)?;
        writeln!(f, "layer_width_value: {:.16e}", self.layer_width_value)?;
        write!(f, "transition_decay:  {:.16e}", self.transition_decay)
    }
}

/// One line per point, `<index> <coordinate>`, 17 significant digits.
pub fn dump_points(mesh: &Mesh1D) -> String {
    let mut out = String::new();
    for (i, x) in mesh.points().iter().enumerate() {
        out.push_str(&format!("{i} {x:.16e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg8() -> MeshConfig {
        MeshConfig::new(8, 0.01, 2.0, 1.0)
    }

    #[test]
    fn transition_and_first_points() {
        let m = bakhvalov_points(&cfg8()).unwrap();
        let p = m.points();
        assert_eq!(p.len(), 9);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[8], 1.0);
        let x4 = -0.02 * 0.01f64.ln();
        assert!((p[4] - x4).abs() < 1e-16);
        assert!((p[4] - 0.092_103_403_719_761_8).abs() < 1e-15);
        let x1 = -0.02 * (1.0 - 2.0 * 0.99 / 8.0f64).ln();
        assert!((p[1] - x1).abs() < 1e-17);
        assert!((p[1] - 0.005_687_085_647_182_126).abs() < 1e-16);
    }

    #[test]
    fn uniform_part_is_equispaced() {
        let m = bakhvalov_points(&cfg8()).unwrap();
        let s = m.steps();
        for i in 4..8 {
            assert!((s[i] - s[4]).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert_eq!(
            bakhvalov_points(&MeshConfig::new(7, 0.01, 2.0, 1.0)),
            Err(MeshError::InvalidCellCount(7))
        );
        assert!(matches!(
            bakhvalov_points(&MeshConfig::new(8, 0.0, 2.0, 1.0)),
            Err(MeshError::InvalidEpsilon(_))
        ));
        assert!(matches!(
            bakhvalov_points(&MeshConfig::new(8, 0.2, 2.0, 1.0)),
            Err(MeshError::EpsilonTooLarge { .. })
        ));
        assert!(matches!(
            bakhvalov_points(&MeshConfig::new(8, 0.01, 2.0, 0.0)),
            Err(MeshError::InvalidBeta(_))
        ));
        // 0.2 > 1/8 is fine with the override, transition = -0.2 ln 0.2 ≈ 0.32.
        assert!(bakhvalov_points(&MeshConfig::new(8, 0.2, 1.0, 1.0).allow_large_eps(true)).is_ok());
    }

    #[test]
    fn anisotropic_tensor_mesh() {
        let cx = MeshConfig::new(8, 0.01, 2.0, 2.0);
        let cy = MeshConfig::new(8, 0.01, 2.0, 1.0);
        let m = tensor_mesh(&cx, &cy).unwrap();
        assert!((m.mesh_x.points()[4] - 0.046_051_701_859_880_9).abs() < 1e-15);
        assert!((m.mesh_y.points()[4] - 0.092_103_403_719_761_8).abs() < 1e-15);
        let (x0, x1, y0, y1) = m.cell(0, 0);
        assert!((x1 - x0) * (y1 - y0) > 0.0);
        assert!(tensor_mesh(&cx, &MeshConfig::new(10, 0.01, 2.0, 1.0)).is_err());
    }

    #[test]
    fn degenerate_near_uniform_mesh_is_increasing() {
        let c = MeshConfig::new(16, 1.0 / 16.0, 1.0, 4.0);
        let m = tensor_mesh(&c, &c).unwrap();
        assert!(m.mesh_x.points().windows(2).all(|w| w[1] > w[0]));
        assert!(m.mesh_y.points().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn report_values() {
        let c = cfg8();
        let m = bakhvalov_points(&c).unwrap();
        let r = mesh_report(&m, &c);
        assert!(r.fine_monotone);
        assert!(r.coarse_min >= 1.0 && r.coarse_max <= 2.0);
        assert!((r.layer_width_value - 0.2575f64.powi(2)).abs() < 1e-14);
        assert!((r.layer_width_value - 0.066_306_25).abs() < 1e-14);
        assert!((r.transition_decay - 1e-4).abs() < 1e-17);
    }

    #[test]
    fn locate_cells() {
        let m = Mesh1D::uniform(4);
        assert_eq!(m.locate(0.0), 0);
        assert_eq!(m.locate(0.25), 1);
        assert_eq!(m.locate(0.3), 1);
        assert_eq!(m.locate(1.0), 3);
    }

    #[test]
    fn dump_format() {
        let d = dump_points(&Mesh1D::uniform(2));
        assert_eq!(d.lines().next().unwrap(), "0 0.0000000000000000e0");
        assert_eq!(d.lines().count(), 3);
    }
}
