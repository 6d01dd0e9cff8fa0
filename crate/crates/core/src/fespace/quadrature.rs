use std::f64::consts::PI;
use thiserror::Error;

pub const MAX_POINTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("Gauss rule with {0} points not supported (1..={MAX_POINTS})")]
    PointCount(usize),
}

/// Quadrature rule on the reference interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Legendre polynomial `P_q(x)` and its derivative by the three-term recurrence.
fn legendre(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for m in 2..=q {
        let mf = m as f64;
        let p2 = ((2.0 * mf - 1.0) * x * p1 - (mf - 1.0) * p0) / mf;
        p0 = p1;
        p1 = p2;
    }
    let qf = q as f64;
    let dp = qf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `q`-point Gauss-Legendre rule mapped to `[0, 1]`, exact through degree `2q − 1`.
pub fn gauss_rule(q: usize) -> Result<QuadRule, QuadError> {
    if q == 0 || q > MAX_POINTS {
        return Err(QuadError::PointCount(q));
    }
    if q == 1 {
        return Ok(QuadRule {
            points: vec![0.5],
            weights: vec![1.0],
        });
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        // Newton from the Chebyshev-like initial guess
        let mut x = (PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(q, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    Ok(QuadRule {
        points: nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: weights.iter().map(|w| 0.5 * w).collect(),
    })
}

/// Growth factor of consecutive subintervals in [`graded_rule`].
pub const GRADING_RATIO: f64 = 1.5;

/// Composite rule on `[0, 1]` built from copies of `base` on subintervals
/// with breakpoints `0, s, rs, r²s, …, 1` where `r = GRADING_RATIO`.
/// Suited to integrands that vary on the scale `s` near `t = 0`.
pub fn graded_rule(base: &QuadRule, s: f64) -> QuadRule {
    let mut breaks = vec![0.0];
    let mut t = s;
    while t < 1.0 && s > 0.0 {
        breaks.push(t);
        t *= GRADING_RATIO;
    }
    breaks.push(1.0);
    let mut points = Vec::with_capacity(base.len() * (breaks.len() - 1));
    let mut weights = Vec::with_capacity(points.capacity());
    for w in breaks.windows(2) {
        let h = w[1] - w[0];
        for (&p, &bw) in base.points.iter().zip(&base.weights) {
            points.push(w[0] + h * p);
            weights.push(h * bw);
        }
    }
    QuadRule { points, weights }
}

/// Cells wider than this many layer scales get the graded rule.
pub const LAYER_CELL_RATIO: f64 = 8.0;

/// One rule per cell of a layer-adapted 1D mesh with points `pts`.
///
/// With `layer_scale = Some(ε)`, fine-region cells (index below `N/2`)
/// wider than `LAYER_CELL_RATIO·ε` use [`graded_rule`] anchored at their
/// left end. All other cells use the plain `q`-point rule.
pub fn cell_rules(pts: &[f64], q: usize, layer_scale: Option<f64>) -> Result<Vec<QuadRule>, QuadError> {
    let base = gauss_rule(q)?;
    let n = pts.len().saturating_sub(1);
    Ok((0..n)
        .map(|i| {
            let h = pts[i + 1] - pts[i];
            match layer_scale {
                Some(e) if i < n / 2 && h > LAYER_CELL_RATIO * e => graded_rule(&base, 0.25 * e / h),
                _ => base.clone(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint() {
        let r = gauss_rule(1).unwrap();
        assert_eq!(r.points, vec![0.5]);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn closed_form_integrals() {
        let r2 = gauss_rule(2).unwrap();
        assert!((r2.integrate(|t| t.powi(3)) - 0.25).abs() < 1e-15);
        let r5 = gauss_rule(5).unwrap();
        assert!((r5.integrate(|t| t.powi(9)) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn weights_positive_and_sum_to_one() {
        for q in 1..=MAX_POINTS {
            let r = gauss_rule(q).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(r.points.windows(2).all(|w| w[1] > w[0]));
            assert!(r.points.iter().all(|&t| t > 0.0 && t < 1.0));
        }
    }

    #[test]
    fn exact_through_top_degree() {
        for q in 1..=8 {
            let r = gauss_rule(q).unwrap();
            let d = 2 * q - 1;
            let exact = 1.0 / (d as f64 + 1.0);
            assert!((r.integrate(|t| t.powi(d as i32)) - exact).abs() < 1e-14, "q={q}");
        }
    }

    #[test]
    fn graded_rule_integrates_layer_exponential() {
        let base = gauss_rule(4).unwrap();
        let s = 1e-6;
        let r = graded_rule(&base, s);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // ∫₀¹ e^{−t/(4s)} dt
        let lam = 0.25 / s;
        let exact = (1.0 - (-lam).exp()) / lam;
        let got = r.integrate(|t| (-lam * t).exp());
        assert!((got - exact).abs() < 1e-7 * exact, "{got} vs {exact}");
        let plain = base.integrate(|t| (-lam * t).exp());
        assert!((plain - exact).abs() > 1e-2 * exact);
    }

    #[test]
    fn cell_rules_pick_out_wide_fine_cells() {
        let pts = [0.0, 1e-6, 0.3, 0.6, 1.0];
        let r = cell_rules(&pts, 3, Some(1e-6)).unwrap();
        assert_eq!(r[0].len(), 3);
        assert!(r[1].len() > 3);
        assert_eq!(r[2].len(), 3);
        assert!(cell_rules(&pts, 3, None).unwrap().iter().all(|q| q.len() == 3));
    }

    #[test]
    fn out_of_range() {
        assert_eq!(gauss_rule(0), Err(QuadError::PointCount(0)));
        assert_eq!(gauss_rule(17), Err(QuadError::PointCount(17)));
    }
}
