//! Model problems `−εΔu − b·∇u + cu = f` on the unit square with
//! homogeneous Dirichlet data, and manufactured exact solutions.
//!
//! Every built-in problem has linear convection `b`, constant reaction `c`
//! and the separable exact solution
//!
//! ```text
//! u(x, y) = 2 sin(πx) (1 − e^{−λx·x/ε}) (1 − y)² (1 − e^{−λy·y/ε})
//! ```
//!
//! which carries exponential layers at `x = 0` and `y = 0` and splits into
//! a smooth part, two edge layers and a corner layer.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

pub type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type GradField = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem `{0}` (known: paper-example, constant-coefficients)")]
    Unknown(String),
    #[error("epsilon = {0} must lie in (0, 1)")]
    InvalidEpsilon(f64),
    #[error("problem config: {0}")]
    Config(String),
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    if r >= 1.0 {
        return -sin_pi(r - 1.0);
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `c0 + cx·x + cy·y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
}

impl LinearField {
    pub const fn new(c0: f64, cx: f64, cy: f64) -> Self {
        Self { c0, cx, cy }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.c0 + self.cx * x + self.cy * y
    }

    /// Minimum over the closed unit square together with its location.
    pub fn min_on_unit_square(&self) -> (f64, (f64, f64)) {
        [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
            .into_iter()
            .map(|(x, y)| (self.eval(x, y), (x, y)))
            .fold((f64::INFINITY, (0.0, 0.0)), |a, b| if b.0 < a.0 { b } else { a })
    }
}

/// Coefficients of a problem instance.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub epsilon: f64,
    pub b1: Field,
    pub b2: Field,
    pub c: Field,
    pub f: Field,
    /// `∂b1/∂x + ∂b2/∂y`.
    pub div_b: Field,
    /// Lower bound of `b1` on the domain.
    pub beta1: f64,
    /// Lower bound of `b2` on the domain.
    pub beta2: f64,
    /// Lower bound of `c + ½∇·b`.
    pub gamma: f64,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("epsilon", &self.epsilon)
            .field("beta1", &self.beta1)
            .field("beta2", &self.beta2)
            .field("gamma", &self.gamma)
            .finish_non_exhaustive()
    }
}

/// A scalar field with its gradient.
#[derive(Clone)]
pub struct SmoothField {
    pub value: Field,
    pub grad: GradField,
}

impl SmoothField {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.value)(x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        (self.grad)(x, y)
    }
}

/// `u = S + E1 + E2 + E12`.
#[derive(Clone)]
pub struct SolutionDecomposition {
    /// Smooth part `S`.
    pub smooth: SmoothField,
    /// Layer at `x = 0`, `E1`.
    pub layer_x: SmoothField,
    /// Layer at `y = 0`, `E2`.
    pub layer_y: SmoothField,
    /// Corner layer `E12`.
    pub corner: SmoothField,
}

impl SolutionDecomposition {
    /// Sum of the four components, grouped `(S + E2) + (E1 + E12)` so the
    /// cancellation along `y = 0` is exact.
    pub fn sum(&self, x: f64, y: f64) -> f64 {
        combine(
            self.smooth.eval(x, y),
            self.layer_x.eval(x, y),
            self.layer_y.eval(x, y),
            self.corner.eval(x, y),
        )
    }

    pub fn components(&self) -> [&SmoothField; 4] {
        [&self.smooth, &self.layer_x, &self.layer_y, &self.corner]
    }
}

/// `(s + e2) + (e1 + e12)`.
#[inline]
pub fn combine(s: f64, e1: f64, e2: f64, e12: f64) -> f64 {
    (s + e2) + (e1 + e12)
}

/// Exact solution with first derivatives.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: SmoothField,
    pub decomposition: Option<SolutionDecomposition>,
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactSolution")
            .field("decomposition", &self.decomposition.is_some())
            .finish_non_exhaustive()
    }
}

impl ExactSolution {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.u.eval(x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        self.u.gradient(x, y)
    }
}

/// Smooth factors in `x`: `X(x) = 2 sin(πx)` and its derivatives.
fn x_factor(x: f64) -> [f64; 3] {
    let s = sin_pi(x);
    let c = (PI * x).cos();
    [2.0 * s, 2.0 * PI * c, -2.0 * PI * PI * s]
}

/// Smooth factors in `y`: `Y(y) = (1 − y)²` and its derivatives.
fn y_factor(y: f64) -> [f64; 3] {
    let r = 1.0 - y;
    [r * r, -2.0 * r, 2.0]
}

/// `g(t)·e^{−rate·t}` and two derivatives from those of `g`.
fn with_layer(g: [f64; 3], t: f64, rate: f64) -> [f64; 3] {
    let e = (-rate * t).exp();
    [
        g[0] * e,
        (g[1] - rate * g[0]) * e,
        (g[2] - 2.0 * rate * g[1] + rate * rate * g[0]) * e,
    ]
}

/// `g(t)·(1 − e^{−rate·t})` and two derivatives.
fn with_layer_complement(g: [f64; 3], t: f64, rate: f64) -> [f64; 3] {
    let e = (-rate * t).exp();
    let one_minus = 1.0 - e;
    [
        g[0] * one_minus,
        g[1] * one_minus + rate * g[0] * e,
        g[2] * one_minus + 2.0 * rate * g[1] * e - rate * rate * g[0] * e,
    ]
}

/// Recipe for a built-in problem; instantiate with [`ProblemSpec::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub b1: LinearField,
    pub b2: LinearField,
    pub reaction: f64,
    /// Layer decay rates `(λx, λy)` of the exact solution, in units of `1/ε`.
    pub layer_rates: (f64, f64),
}

pub const REGISTRY: [&str; 2] = ["paper-example", "constant-coefficients"];

impl ProblemSpec {
    /// `b = (2 + x − y, 2 − x + y)`, `c = 2`, layers `e^{−2x/ε}`, `e^{−y/ε}`.
    pub fn paper_example() -> Self {
        Self {
            name: "paper-example".into(),
            b1: LinearField::new(2.0, 1.0, -1.0),
            b2: LinearField::new(2.0, -1.0, 1.0),
            reaction: 2.0,
            layer_rates: (2.0, 1.0),
        }
    }

    /// `b = (1, 1)`, `c = 1`, layers `e^{−x/ε}`, `e^{−y/ε}`.
    pub fn constant_coefficients() -> Self {
        Self {
            name: "constant-coefficients".into(),
            b1: LinearField::new(1.0, 0.0, 0.0),
            b2: LinearField::new(1.0, 0.0, 0.0),
            reaction: 1.0,
            layer_rates: (1.0, 1.0),
        }
    }

    pub fn by_name(name: &str) -> Result<Self, ProblemError> {
        match name {
            "paper-example" => Ok(Self::paper_example()),
            "constant-coefficients" => Ok(Self::constant_coefficients()),
            other => Err(ProblemError::Unknown(other.to_string())),
        }
    }

    /// Custom problem from `key = value` entries:
    /// `convection` (registry name supplying `b`), `reaction`, `layer_x`,
    /// `layer_y`, `name` (`-` and `_` are interchangeable). Missing keys fall back to the convection source.
    pub fn from_entries(entries: &BTreeMap<String, String>) -> Result<Self, ProblemError> {
        let entries: BTreeMap<String, String> = entries
            .iter()
            .map(|(k, v)| (k.trim().replace('-', "_"), v.trim().to_string()))
            .collect();
        let base_name = entries
            .get("convection")
            .map(String::as_str)
            .unwrap_or("paper-example");
        let mut spec = Self::by_name(base_name)?;
        let num = |key: &str| -> Result<Option<f64>, ProblemError> {
            entries
                .get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| ProblemError::Config(format!("{key} = {v} is not a number")))
                })
                .transpose()
        };
        if let Some(c) = num("reaction")? {
            spec.reaction = c;
        }
        if let Some(l) = num("layer_x")? {
            spec.layer_rates.0 = l;
        }
        if let Some(l) = num("layer_y")? {
            spec.layer_rates.1 = l;
        }
        spec.name = entries
            .get("name")
            .cloned()
            .unwrap_or_else(|| format!("custom({base_name})"));
        for key in entries.keys() {
            if !matches!(
                key.as_str(),
                "convection" | "reaction" | "layer_x" | "layer_y" | "name"
            ) {
                return Err(ProblemError::Config(format!("unknown key `{key}`")));
            }
        }
        Ok(spec)
    }

    pub fn build(&self, epsilon: f64) -> Result<(Problem, ExactSolution), ProblemError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ProblemError::InvalidEpsilon(epsilon));
        }
        let (b1, b2, c) = (self.b1, self.b2, self.reaction);
        let rx = self.layer_rates.0 / epsilon;
        let ry = self.layer_rates.1 / epsilon;

        let u_value: Field = Arc::new(move |x, y| {
            with_layer_complement(x_factor(x), x, rx)[0] * with_layer_complement(y_factor(y), y, ry)[0]
        });
        let u_grad: GradField = Arc::new(move |x, y| {
            let a = with_layer_complement(x_factor(x), x, rx);
            let b = with_layer_complement(y_factor(y), y, ry);
            [a[1] * b[0], a[0] * b[1]]
        });
        let f: Field = Arc::new(move |x, y| {
            let a = with_layer_complement(x_factor(x), x, rx);
            let b = with_layer_complement(y_factor(y), y, ry);
            let lap = a[2] * b[0] + a[0] * b[2];
            -epsilon * lap - b1.eval(x, y) * a[1] * b[0] - b2.eval(x, y) * a[0] * b[1]
                + c * a[0] * b[0]
        });

        let separable = |fx: fn(f64, f64) -> [f64; 3], fy: fn(f64, f64) -> [f64; 3], sign: f64| {
            let value: Field = Arc::new(move |x, y| sign * fx(x, rx)[0] * fy(y, ry)[0]);
            let grad: GradField = Arc::new(move |x, y| {
                let a = fx(x, rx);
                let b = fy(y, ry);
                [sign * a[1] * b[0], sign * a[0] * b[1]]
            });
            SmoothField { value, grad }
        };
        fn xs(x: f64, _r: f64) -> [f64; 3] {
            x_factor(x)
        }
        fn xl(x: f64, r: f64) -> [f64; 3] {
            with_layer(x_factor(x), x, r)
        }
        fn ys(y: f64, _r: f64) -> [f64; 3] {
            y_factor(y)
        }
        fn yl(y: f64, r: f64) -> [f64; 3] {
            with_layer(y_factor(y), y, r)
        }
        let decomposition = SolutionDecomposition {
            smooth: separable(xs, ys, 1.0),
            layer_x: separable(xl, ys, -1.0),
            layer_y: separable(xs, yl, -1.0),
            corner: separable(xl, yl, 1.0),
        };

        let (beta1, _) = b1.min_on_unit_square();
        let (beta2, _) = b2.min_on_unit_square();
        let div = b1.cx + b2.cy;
        let problem = Problem {
            name: self.name.clone(),
            epsilon,
            b1: Arc::new(move |x, y| b1.eval(x, y)),
            b2: Arc::new(move |x, y| b2.eval(x, y)),
            c: Arc::new(move |_, _| c),
            f,
            div_b: Arc::new(move |_, _| div),
            beta1,
            beta2,
            gamma: c + 0.5 * div,
        };
        let exact = ExactSolution {
            u: SmoothField {
                value: u_value,
                grad: u_grad,
            },
            decomposition: Some(decomposition),
        };
        Ok((problem, exact))
    }
}

/// The experiment problem at a given `ε`.
pub fn paper_problem(epsilon: f64) -> Result<(Problem, ExactSolution), ProblemError> {
    ProblemSpec::paper_example().build(epsilon)
}

/// `S = 2 sin(πx)(1−y)²`, `E1 = −S e^{−2x/ε}`, `E2 = −S e^{−y/ε}`,
/// `E12 = S e^{−(2x+y)/ε}`.
pub fn paper_decomposition(epsilon: f64) -> Result<SolutionDecomposition, ProblemError> {
    let (_, exact) = paper_problem(epsilon)?;
    Ok(exact.decomposition.expect("built-in problems carry a decomposition"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub min_b1: f64,
    pub argmin_b1: (f64, f64),
    pub min_b2: f64,
    pub argmin_b2: (f64, f64),
    /// Minimum of `c + ½∇·b`.
    pub min_coercivity: f64,
    /// Sampled minima respect the problem's stated bounds, all positive.
    pub satisfied: bool,
}

/// Samples `b1`, `b2` and `c + ½∇·b` on a `(grid+1)²` lattice.
pub fn verify_assumptions(p: &Problem, grid: usize) -> AssumptionReport {
    let g = grid.max(1);
    let mut min_b1 = (f64::INFINITY, (0.0, 0.0));
    let mut min_b2 = (f64::INFINITY, (0.0, 0.0));
    let mut min_coer = f64::INFINITY;
    for j in 0..=g {
        for i in 0..=g {
            let x = i as f64 / g as f64;
            let y = j as f64 / g as f64;
            let v1 = (p.b1)(x, y);
            let v2 = (p.b2)(x, y);
            if v1 < min_b1.0 {
                min_b1 = (v1, (x, y));
            }
            if v2 < min_b2.0 {
                min_b2 = (v2, (x, y));
            }
            min_coer = min_coer.min((p.c)(x, y) + 0.5 * (p.div_b)(x, y));
        }
    }
    let tol = 1e-12;
    let satisfied = p.beta1 > 0.0
        && p.beta2 > 0.0
        && p.gamma > 0.0
        && min_b1.0 >= p.beta1 - tol
        && min_b2.0 >= p.beta2 - tol
        && min_coer >= p.gamma - tol;
    AssumptionReport {
        min_b1: min_b1.0,
        argmin_b1: min_b1.1,
        min_b2: min_b2.0,
        argmin_b2: min_b2.1,
        min_coercivity: min_coer,
        satisfied,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u_closed(x: f64, y: f64, eps: f64) -> f64 {
        2.0 * (PI * x).sin()
            * (1.0 - (-2.0 * x / eps).exp())
            * (1.0 - y).powi(2)
            * (1.0 - (-y / eps).exp())
    }

    #[test]
    fn sin_pi_zeros() {
        assert_eq!(sin_pi(0.0), 0.0);
        assert_eq!(sin_pi(1.0), 0.0);
        assert_eq!(sin_pi(0.5), 1.0);
        assert!((sin_pi(0.3) - (0.3 * PI).sin()).abs() < 1e-15);
        assert!((sin_pi(0.8) - (0.8 * PI).sin()).abs() < 1e-15);
        assert!((sin_pi(1.25) - (1.25 * PI).sin()).abs() < 1e-15);
    }

    #[test]
    fn interior_value_with_underflowing_layers() {
        let (_, u) = paper_problem(1e-8).unwrap();
        assert_eq!(u.value(0.5, 0.5), 0.5);
    }

    #[test]
    fn matches_closed_form() {
        for &eps in &[0.1, 1e-2, 1e-4] {
            let (_, u) = paper_problem(eps).unwrap();
            for &(x, y) in &[(0.3, 0.7), (1e-3, 0.2), (0.9, 1e-4)] {
                let a = u.value(x, y);
                let b = u_closed(x, y, eps);
                assert!((a - b).abs() <= 1e-14 * b.abs().max(1e-300), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn boundary_vanishes() {
        let (_, u) = paper_problem(1e-3).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            for (x, y) in [(t, 0.0), (t, 1.0), (0.0, t), (1.0, t)] {
                assert_eq!(u.value(x, y), 0.0);
            }
        }
    }

    #[test]
    fn source_matches_finite_differences() {
        let eps = 1e-8;
        let (p, u) = paper_problem(eps).unwrap();
        let h = 1e-5;
        let (x, y) = (0.5, 0.5);
        let v = |x, y| u.value(x, y);
        let uxx = (v(x + h, y) - 2.0 * v(x, y) + v(x - h, y)) / (h * h);
        let uyy = (v(x, y + h) - 2.0 * v(x, y) + v(x, y - h)) / (h * h);
        let ux = (v(x + h, y) - v(x - h, y)) / (2.0 * h);
        let uy = (v(x, y + h) - v(x, y - h)) / (2.0 * h);
        let fd = -eps * (uxx + uyy) - 3.0 * ux - 2.0 * uy + 2.0 * v(x, y);
        let f = (p.f)(x, y);
        assert!((f - fd).abs() <= 1e-5 * f.abs(), "{f} vs {fd}");
    }

    #[test]
    fn gradient_matches_finite_differences_inside_layer() {
        let eps = 1e-2;
        let (_, u) = paper_problem(eps).unwrap();
        let h = 1e-7;
        for &(x, y) in &[(0.005, 0.3), (0.4, 0.01), (0.01, 0.02)] {
            let g = u.gradient(x, y);
            let gx = (u.value(x + h, y) - u.value(x - h, y)) / (2.0 * h);
            let gy = (u.value(x, y + h) - u.value(x, y - h)) / (2.0 * h);
            assert!((g[0] - gx).abs() <= 1e-6 * g[0].abs().max(1.0));
            assert!((g[1] - gy).abs() <= 1e-6 * g[1].abs().max(1.0));
        }
    }

    #[test]
    fn decomposition_sums_to_u() {
        let eps = 1e-2;
        let (_, u) = paper_problem(eps).unwrap();
        let d = paper_decomposition(eps).unwrap();
        for &(x, y) in &[(0.01, 0.02), (0.5, 0.5), (0.9, 0.003)] {
            let a = d.sum(x, y);
            let b = u.value(x, y);
            assert!((a - b).abs() <= 1e-13 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn decomposition_boundary_identity() {
        let d = paper_decomposition(0.05).unwrap();
        let (x, y) = (0.0, 0.3);
        assert_eq!(d.smooth.eval(x, y) + d.layer_x.eval(x, y), 0.0);
        assert_eq!(d.layer_y.eval(x, y) + d.corner.eval(x, y), 0.0);
    }

    #[test]
    fn layer_component_value() {
        let d = paper_decomposition(0.1).unwrap();
        let e1 = d.layer_x.eval(0.05, 0.5);
        let expected = -2.0 * (0.05 * PI).sin() * 0.25 * (-1.0f64).exp();
        assert!((e1 - expected).abs() < 1e-16);
        assert!((e1 + 0.028_774_511_789_476_834).abs() < 1e-16);
    }

    #[test]
    fn layer_decays_along_x() {
        let d = paper_decomposition(1e-2).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..50 {
            let x = 0.02 + i as f64 * 2e-3;
            let v = d.layer_x.eval(x, 0.4).abs();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn model_problem_assumptions() {
        let (p, _) = paper_problem(1e-4).unwrap();
        let r = verify_assumptions(&p, 20);
        assert_eq!(r.min_b1, 1.0);
        assert_eq!(r.argmin_b1, (0.0, 1.0));
        assert_eq!(r.min_b2, 1.0);
        assert_eq!(r.argmin_b2, (1.0, 0.0));
        assert_eq!(r.min_coercivity, 3.0);
        assert_eq!((p.beta1, p.beta2, p.gamma), (1.0, 1.0, 3.0));
        assert!(r.satisfied);
    }

    #[test]
    fn constant_problem_assumptions() {
        let (p, _) = ProblemSpec::constant_coefficients().build(1e-3).unwrap();
        let r = verify_assumptions(&p, 8);
        assert_eq!((p.div_b)(0.3, 0.3), 0.0);
        assert_eq!(r.min_coercivity, 1.0);
        assert!(r.satisfied);
    }

    #[test]
    fn registry_and_custom_entries() {
        assert!(ProblemSpec::by_name("nope").is_err());
        for name in REGISTRY {
            assert_eq!(ProblemSpec::by_name(name).unwrap().name, name);
        }
        let mut e = BTreeMap::new();
        e.insert("convection".to_string(), "constant-coefficients".to_string());
        e.insert("reaction".to_string(), "4".to_string());
        let s = ProblemSpec::from_entries(&e).unwrap();
        assert_eq!(s.reaction, 4.0);
        assert_eq!(s.b1, LinearField::new(1.0, 0.0, 0.0));
        e.insert("bogus".to_string(), "1".to_string());
        assert!(ProblemSpec::from_entries(&e).is_err());
    }
}
