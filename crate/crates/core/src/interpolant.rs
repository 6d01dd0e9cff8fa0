//! Piecewise `Q_k` functions, standard Lagrange interpolation and the
//! boundary-respecting interpolant `Πu` built from the solution
//! decomposition.
//!
//! `Πu = S^I + π₁E₁ + π₂E₂ + π₁₂E₁₂`, where each `πᵢEᵢ` is the standard
//! interpolant of the layer component with its nodal values removed on the
//! strip lines `x = x^s_{N/2−1}` (for `E₁`), `y = y^t_{N/2−1}` (for `E₂`)
//! and at their crossings (for `E₁₂`), `s, t = 0..k−1`.

use thiserror::Error;

use crate::fespace::{BasisSet, DofMap};
use crate::mesh::TensorMesh2D;
use crate::problems::{combine, ExactSolution, SmoothField, SolutionDecomposition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpolantError {
    #[error("exact solution carries no S/E1/E2/E12 decomposition")]
    MissingDecomposition,
    #[error("interior vector has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Continuous piecewise `Q_k` function given by its values at all
/// `(kN+1)²` lattice nodes, boundary included.
#[derive(Debug, Clone)]
pub struct FemFunction {
    mesh: TensorMesh2D,
    basis: BasisSet,
    dofs: DofMap,
    coeffs: Vec<f64>,
}

impl FemFunction {
    pub fn zeros(mesh: &TensorMesh2D, k: usize) -> Self {
        let dofs = DofMap::new(mesh, k);
        Self {
            mesh: mesh.clone(),
            basis: BasisSet::new(k).expect("degree >= 1"),
            coeffs: vec![0.0; dofs.n_nodes()],
            dofs,
        }
    }

    /// Lifts interior coefficients (solver output) with zero boundary values.
    pub fn from_interior(
        mesh: &TensorMesh2D,
        k: usize,
        interior: &[f64],
    ) -> Result<Self, InterpolantError> {
        let mut f = Self::zeros(mesh, k);
        if interior.len() != f.dofs.n_interior() {
            return Err(InterpolantError::Dimension {
                expected: f.dofs.n_interior(),
                got: interior.len(),
            });
        }
        for (r, &v) in interior.iter().enumerate() {
            let (ix, iy) = f.dofs.interior_position(r);
            let p = f.dofs.node_index(ix, iy);
            f.coeffs[p] = v;
        }
        Ok(f)
    }

    pub fn mesh(&self) -> &TensorMesh2D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficient(&self, ix: usize, iy: usize) -> f64 {
        self.coeffs[self.dofs.node_index(ix, iy)]
    }

    pub fn set_coefficient(&mut self, ix: usize, iy: usize, v: f64) {
        let p = self.dofs.node_index(ix, iy);
        self.coeffs[p] = v;
    }

    /// Interior coefficients in solver ordering.
    pub fn interior(&self) -> Vec<f64> {
        (0..self.dofs.n_interior())
            .map(|r| {
                let (ix, iy) = self.dofs.interior_position(r);
                self.coefficient(ix, iy)
            })
            .collect()
    }

    /// Coefficients of cell `(i, j)` in local order `a + (k+1)·b`.
    pub fn cell_coefficients(&self, i: usize, j: usize, out: &mut Vec<f64>) {
        out.clear();
        let k = self.degree();
        for b in 0..=k {
            for a in 0..=k {
                out.push(self.coefficient(k * i + a, k * j + b));
            }
        }
    }

    fn locate(&self, x: f64, y: f64) -> (usize, usize, f64, f64, f64, f64) {
        let i = self.mesh.mesh_x.locate(x);
        let j = self.mesh.mesh_y.locate(y);
        let (x0, x1, y0, y1) = self.mesh.cell(i, j);
        let (hx, hy) = (x1 - x0, y1 - y0);
        let tx = ((x - x0) / hx).clamp(0.0, 1.0);
        let ty = ((y - y0) / hy).clamp(0.0, 1.0);
        (i, j, tx, ty, hx, hy)
    }

    /// Value and gradient at `(x, y) ∈ [0, 1]²`.
    pub fn eval_with_grad(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let k = self.degree();
        let nb = k + 1;
        let (i, j, tx, ty, hx, hy) = self.locate(x, y);
        let mut vx = vec![0.0; nb];
        let mut dx = vec![0.0; nb];
        let mut vy = vec![0.0; nb];
        let mut dy = vec![0.0; nb];
        self.basis.eval_into(tx, &mut vx, &mut dx);
        self.basis.eval_into(ty, &mut vy, &mut dy);
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for b in 0..nb {
            for a in 0..nb {
                let c = self.coefficient(k * i + a, k * j + b);
                v += c * vx[a] * vy[b];
                gx += c * dx[a] * vy[b];
                gy += c * vx[a] * dy[b];
            }
        }
        (v, [gx / hx, gy / hy])
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_with_grad(x, y).0
    }

    fn map_coefficients(&self, coeffs: Vec<f64>) -> Self {
        Self {
            coeffs,
            ..self.clone()
        }
    }
}

/// Standard Lagrange interpolant: nodal values of `g` at `(x_i^s, y_j^t)`.
pub fn interpolate_standard(
    g: impl Fn(f64, f64) -> f64,
    mesh: &TensorMesh2D,
    k: usize,
) -> FemFunction {
    let mut f = FemFunction::zeros(mesh, k);
    let m = f.dofs.nodes_per_dir();
    for iy in 0..m {
        for ix in 0..m {
            let (x, y) = f.dofs.coordinates(ix, iy);
            f.coeffs[iy * m + ix] = g(x, y);
        }
    }
    f
}

/// Node-zeroing sets of the `Π` construction, in lattice coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiSpec {
    degree: usize,
    n: usize,
    /// Lattice indices `k(N/2 − 1) + s`, `s = 0..k−1`.
    strip: Vec<usize>,
}

impl PiSpec {
    pub fn new(n: usize, k: usize) -> Self {
        let start = k * (n / 2 - 1);
        Self {
            degree: k,
            n,
            strip: (start..start + k).collect(),
        }
    }

    /// Lattice indices of the strip lines, identical in `x` and `y`.
    pub fn strip_lines(&self) -> &[usize] {
        &self.strip
    }

    fn last(&self) -> usize {
        self.degree * self.n
    }

    pub fn zeroes_layer_x(&self, ix: usize, iy: usize) -> bool {
        self.strip.contains(&ix) && iy > 0 && iy < self.last()
    }

    pub fn zeroes_layer_y(&self, ix: usize, iy: usize) -> bool {
        self.strip.contains(&iy) && ix > 0 && ix < self.last()
    }

    pub fn zeroes_corner(&self, ix: usize, iy: usize) -> bool {
        self.strip.contains(&ix) && self.strip.contains(&iy)
    }

    pub fn in_any_set(&self, ix: usize, iy: usize) -> bool {
        self.zeroes_layer_x(ix, iy) || self.zeroes_layer_y(ix, iy) || self.zeroes_corner(ix, iy)
    }

    pub fn layer_x_nodes(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for iy in 1..self.last() {
            for &ix in &self.strip {
                v.push((ix, iy));
            }
        }
        v
    }

    pub fn layer_y_nodes(&self) -> Vec<(usize, usize)> {
        self.layer_x_nodes().into_iter().map(|(a, b)| (b, a)).collect()
    }

    pub fn corner_nodes(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for &iy in &self.strip {
            for &ix in &self.strip {
                v.push((ix, iy));
            }
        }
        v
    }
}

/// `Πu` together with its four parts.
#[derive(Debug, Clone)]
pub struct PiInterpolant {
    pub pi_u: FemFunction,
    /// `S^I`
    pub smooth: FemFunction,
    /// `π₁E₁`
    pub layer_x: FemFunction,
    /// `π₂E₂`
    pub layer_y: FemFunction,
    /// `π₁₂E₁₂`
    pub corner: FemFunction,
    pub spec: PiSpec,
}

fn masked(mut f: FemFunction, nodes: &[(usize, usize)]) -> FemFunction {
    for &(ix, iy) in nodes {
        f.set_coefficient(ix, iy, 0.0);
    }
    f
}

pub fn interpolate_pi(
    dec: &SolutionDecomposition,
    mesh: &TensorMesh2D,
    k: usize,
) -> PiInterpolant {
    let spec = PiSpec::new(mesh.n(), k);
    let smooth = interpolate_standard(|x, y| dec.smooth.eval(x, y), mesh, k);
    let layer_x = masked(
        interpolate_standard(|x, y| dec.layer_x.eval(x, y), mesh, k),
        &spec.layer_x_nodes(),
    );
    let layer_y = masked(
        interpolate_standard(|x, y| dec.layer_y.eval(x, y), mesh, k),
        &spec.layer_y_nodes(),
    );
    let corner = masked(
        interpolate_standard(|x, y| dec.corner.eval(x, y), mesh, k),
        &spec.corner_nodes(),
    );
    let coeffs = (0..smooth.coeffs.len())
        .map(|p| {
            combine(
                smooth.coeffs[p],
                layer_x.coeffs[p],
                layer_y.coeffs[p],
                corner.coeffs[p],
            )
        })
        .collect();
    PiInterpolant {
        pi_u: smooth.map_coefficients(coeffs),
        smooth,
        layer_x,
        layer_y,
        corner,
        spec,
    }
}

/// `Πu` from an exact solution that carries a decomposition.
pub fn interpolate_pi_exact(
    exact: &ExactSolution,
    mesh: &TensorMesh2D,
    k: usize,
) -> Result<PiInterpolant, InterpolantError> {
    let dec = exact
        .decomposition
        .as_ref()
        .ok_or(InterpolantError::MissingDecomposition)?;
    Ok(interpolate_pi(dec, mesh, k))
}

/// Worst cellwise ratio `max_K |interpolant| / max_K |component|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityEntry {
    pub standard: f64,
    pub modified: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `[S, E1, E2, E12]`
    pub components: [StabilityEntry; 4],
    pub worst: f64,
}

/// Cellwise magnitudes below this are dominated by subnormal rounding.
const NEGLIGIBLE: f64 = 1e-280;

fn cell_sup(
    g: &dyn Fn(f64, f64) -> f64,
    cell: (f64, f64, f64, f64),
    ref_pts: &[f64],
) -> f64 {
    let (x0, x1, y0, y1) = cell;
    let mut m: f64 = 0.0;
    for &ty in ref_pts {
        let y = y0 + ty * (y1 - y0);
        for &tx in ref_pts {
            m = m.max(g(x0 + tx * (x1 - x0), y).abs());
        }
    }
    m
}

/// Compares, cell by cell, the max of each interpolated component over a
/// `samples × samples` grid against the max of the component itself over a
/// denser grid that contains every interpolation node and sample point.
pub fn interp_stability_check(
    dec: &SolutionDecomposition,
    mesh: &TensorMesh2D,
    k: usize,
    samples: usize,
) -> StabilityReport {
    let samples = samples.max(2);
    let pi = interpolate_pi(dec, mesh, k);
    let sample_pts: Vec<f64> = (0..samples).map(|l| l as f64 / (samples - 1) as f64).collect();
    let dense_div = 4 * k * (samples - 1);
    let dense_pts: Vec<f64> = (0..=dense_div).map(|l| l as f64 / dense_div as f64).collect();

    let std_x = interp_of(&dec.layer_x, mesh, k);
    let std_y = interp_of(&dec.layer_y, mesh, k);
    let std_c = interp_of(&dec.corner, mesh, k);
    let comps: [(&SmoothField, &FemFunction, &FemFunction); 4] = [
        (&dec.smooth, &pi.smooth, &pi.smooth),
        (&dec.layer_x, &std_x, &pi.layer_x),
        (&dec.layer_y, &std_y, &pi.layer_y),
        (&dec.corner, &std_c, &pi.corner),
    ];

    let mut out = [StabilityEntry {
        standard: 0.0,
        modified: 0.0,
    }; 4];
    let n = mesh.n();
    for (entry, (field, standard, modified)) in out.iter_mut().zip(comps.iter()) {
        for j in 0..n {
            for i in 0..n {
                let cell = mesh.cell(i, j);
                let exact_max = cell_sup(&|x, y| field.eval(x, y), cell, &dense_pts);
                let std_max = cell_sup(&|x, y| standard.eval(x, y), cell, &sample_pts);
                let mod_max = cell_sup(&|x, y| modified.eval(x, y), cell, &sample_pts);
                if exact_max < NEGLIGIBLE {
                    continue;
                }
                entry.standard = entry.standard.max(std_max / exact_max);
                entry.modified = entry.modified.max(mod_max / exact_max);
            }
        }
    }
    let worst = out
        .iter()
        .map(|e| e.standard.max(e.modified))
        .fold(0.0, f64::max);
    StabilityReport {
        components: out,
        worst,
    }
}

fn interp_of(field: &SmoothField, mesh: &TensorMesh2D, k: usize) -> FemFunction {
    interpolate_standard(|x, y| field.eval(x, y), mesh, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{tensor_mesh, MeshConfig};
    use crate::problems::{paper_decomposition, paper_problem};
    use std::f64::consts::PI;

    fn model_mesh(n: usize, eps: f64, sigma: f64) -> TensorMesh2D {
        tensor_mesh(
            &MeshConfig::new(n, eps, sigma, 2.0),
            &MeshConfig::new(n, eps, sigma, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn nodal_interpolation() {
        let mesh = model_mesh(8, 1e-3, 2.0);
        let f = interpolate_standard(|x, y| x * y, &mesh, 1);
        let d = f.dofs().clone();
        for iy in 0..d.nodes_per_dir() {
            for ix in 0..d.nodes_per_dir() {
                let (x, y) = d.coordinates(ix, iy);
                assert_eq!(f.eval(x, y), x * y);
            }
        }
    }

    #[test]
    fn reproduces_qk() {
        let mesh = model_mesh(8, 1e-3, 3.0);
        for k in 1..=3 {
            let g = |x: f64, y: f64| x.powi(k as i32) * y.powi(k as i32) + 0.5 * x - y;
            let f = interpolate_standard(g, &mesh, k);
            for &(x, y) in &[(0.013, 0.77), (0.5, 0.0021), (0.999, 0.4)] {
                assert!((f.eval(x, y) - g(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bilinear_cell_centre() {
        let mesh = TensorMesh2D::uniform(4);
        let g = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
        let f = interpolate_standard(g, &mesh, 1);
        let avg = (g(0.0, 0.0) + g(0.25, 0.0) + g(0.0, 0.25) + g(0.25, 0.25)) / 4.0;
        assert!((f.eval(0.125, 0.125) - avg).abs() < 1e-15);
    }

    #[test]
    fn gradient_of_interpolant() {
        let mesh = TensorMesh2D::uniform(4);
        let f = interpolate_standard(|x, y| x * x * y, &mesh, 2);
        let (_, g) = f.eval_with_grad(0.3, 0.6);
        assert!((g[0] - 2.0 * 0.3 * 0.6).abs() < 1e-12);
        assert!((g[1] - 0.09).abs() < 1e-12);
    }

    #[test]
    fn zeroing_set_sizes() {
        for k in 1..=3 {
            for n in [8, 16] {
                let s = PiSpec::new(n, k);
                assert_eq!(s.layer_x_nodes().len(), k * (k * n - 1));
                assert_eq!(s.layer_y_nodes().len(), k * (k * n - 1));
                assert_eq!(s.corner_nodes().len(), k * k);
                let last = k * n;
                for (ix, iy) in s.layer_x_nodes().into_iter().chain(s.layer_y_nodes()) {
                    assert!(ix > 0 && iy > 0 && ix < last && iy < last);
                }
            }
        }
    }

    #[test]
    fn pi_boundary_is_exactly_zero() {
        for k in 1..=2 {
            for eps in [1e-4, 1e-8] {
                let mesh = model_mesh(8, eps, (k + 1) as f64);
                let pi = interpolate_pi(&paper_decomposition(eps).unwrap(), &mesh, k);
                let d = pi.pi_u.dofs();
                for iy in 0..d.nodes_per_dir() {
                    for ix in 0..d.nodes_per_dir() {
                        if d.is_boundary(ix, iy) {
                            assert_eq!(pi.pi_u.coefficient(ix, iy), 0.0, "({ix},{iy})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pi_on_the_x_strip_line() {
        let eps = 1e-4;
        let mesh = model_mesh(8, eps, 2.0);
        let dec = paper_decomposition(eps).unwrap();
        let (_, u) = paper_problem(eps).unwrap();
        let pi = interpolate_pi(&dec, &mesh, 1);
        // (x_3, y_4): on the x-strip line N/2 − 1 = 3, off the y-strip
        let (ix, iy) = (3, 4);
        assert!(pi.spec.zeroes_layer_x(ix, iy));
        assert!(!pi.spec.zeroes_layer_y(ix, iy) && !pi.spec.zeroes_corner(ix, iy));
        let (x, y) = pi.pi_u.dofs().coordinates(ix, iy);
        let direct = u.value(x, y) - dec.layer_x.eval(x, y);
        assert!((pi.pi_u.coefficient(ix, iy) - direct).abs() < 1e-14);
    }

    #[test]
    fn k1_stability_is_exact() {
        let eps = 1e-4;
        let mesh = model_mesh(16, eps, 2.0);
        let r = interp_stability_check(&paper_decomposition(eps).unwrap(), &mesh, 1, 5);
        assert!(r.worst <= 1.0 + 1e-12, "{r:?}");
    }

    #[test]
    fn lifting_interior_vector() {
        let mesh = TensorMesh2D::uniform(4);
        let d = DofMap::new(&mesh, 1);
        let v: Vec<f64> = (0..d.n_interior()).map(|i| i as f64).collect();
        let f = FemFunction::from_interior(&mesh, 1, &v).unwrap();
        assert_eq!(f.interior(), v);
        assert_eq!(f.coefficient(0, 2), 0.0);
        assert!(FemFunction::from_interior(&mesh, 1, &[1.0]).is_err());
    }
}
