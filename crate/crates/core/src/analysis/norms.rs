use crate::fespace::{cell_rules, QuadError};
use crate::interpolant::FemFunction;
use crate::problems::SmoothField;

/// Errors of a discrete function against a reference field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `‖u − u_h‖_{L²}`
    pub l2: f64,
    /// `|u − u_h|_{H¹}`
    pub h1_semi: f64,
    /// `(ε|u − u_h|₁² + ‖u − u_h‖²)^{1/2}`
    pub energy: f64,
    /// Max of `|u − u_h|` over the quadrature points.
    pub linf_quad: f64,
}

impl ErrorNorms {
    pub fn from_parts(l2: f64, h1_semi: f64, epsilon: f64, linf_quad: f64) -> Self {
        Self {
            l2,
            h1_semi,
            energy: (epsilon * h1_semi * h1_semi + l2 * l2).sqrt(),
            linf_quad,
        }
    }
}

/// Cellwise `q × q` Gauss accumulation of `(u − u_h)²` and `|∇(u − u_h)|²`.
pub fn error_norms(
    uh: &FemFunction,
    exact: &SmoothField,
    epsilon: f64,
    q_err: usize,
) -> Result<ErrorNorms, QuadError> {
    accumulate(uh, exact, epsilon, q_err, None)
}

/// As [`error_norms`], with graded composite rules in the wide cells
/// adjoining the layer transition.
pub fn error_norms_layered(
    uh: &FemFunction,
    exact: &SmoothField,
    epsilon: f64,
    q_err: usize,
) -> Result<ErrorNorms, QuadError> {
    accumulate(uh, exact, epsilon, q_err, Some(epsilon))
}

fn accumulate(
    uh: &FemFunction,
    exact: &SmoothField,
    epsilon: f64,
    q_err: usize,
    layer_scale: Option<f64>,
) -> Result<ErrorNorms, QuadError> {
    let mesh = uh.mesh();
    let rules_x = cell_rules(mesh.mesh_x.points(), q_err, layer_scale)?;
    let rules_y = cell_rules(mesh.mesh_y.points(), q_err, layer_scale)?;
    let k = uh.degree();
    let nb = k + 1;
    let basis = crate::fespace::BasisSet::new(k).expect("degree >= 1");
    let tables_x: Vec<_> = rules_x.iter().map(|r| basis.tabulate(&r.points)).collect();
    let tables_y: Vec<_> = rules_y.iter().map(|r| basis.tabulate(&r.points)).collect();
    let n = mesh.n();

    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    let mut linf: f64 = 0.0;
    let mut local = Vec::with_capacity(nb * nb);
    for j in 0..n {
        for i in 0..n {
            let (x0, x1, y0, y1) = mesh.cell(i, j);
            let (hx, hy) = (x1 - x0, y1 - y0);
            let (rx, ry) = (&rules_x[i], &rules_y[j]);
            let (tx, ty) = (&tables_x[i], &tables_y[j]);
            uh.cell_coefficients(i, j, &mut local);
            let mut cell_l2 = 0.0;
            let mut cell_h1 = 0.0;
            for qy in 0..ry.len() {
                let y = y0 + hy * ry.points[qy];
                for qx in 0..rx.len() {
                    let x = x0 + hx * rx.points[qx];
                    let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
                    for b in 0..nb {
                        for a in 0..nb {
                            let c = local[a + nb * b];
                            v += c * tx.value(qx, a) * ty.value(qy, b);
                            gx += c * tx.deriv(qx, a) * ty.value(qy, b);
                            gy += c * tx.value(qx, a) * ty.deriv(qy, b);
                        }
                    }
                    gx /= hx;
                    gy /= hy;
                    let u = exact.eval(x, y);
                    let g = exact.gradient(x, y);
                    let w = rx.weights[qx] * ry.weights[qy];
                    let e = u - v;
                    linf = linf.max(e.abs());
                    cell_l2 += w * e * e;
                    cell_h1 += w * ((g[0] - gx).powi(2) + (g[1] - gy).powi(2));
                }
            }
            l2_sq += cell_l2 * hx * hy;
            h1_sq += cell_h1 * hx * hy;
        }
    }
    Ok(ErrorNorms::from_parts(l2_sq.sqrt(), h1_sq.sqrt(), epsilon, linf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolant::interpolate_standard;
    use crate::mesh::TensorMesh2D;
    use std::sync::Arc;

    fn bubble() -> SmoothField {
        SmoothField {
            value: Arc::new(|x, y| x * (1.0 - x) * y * (1.0 - y)),
            grad: Arc::new(|x, y| {
                [
                    (1.0 - 2.0 * x) * y * (1.0 - y),
                    x * (1.0 - x) * (1.0 - 2.0 * y),
                ]
            }),
        }
    }

    #[test]
    fn closed_form_bubble() {
        // ∫(x(1−x))² = 1/30, ∫(1−2x)² = 1/3
        let mesh = TensorMesh2D::uniform(4);
        let zero = FemFunction::zeros(&mesh, 1);
        let e = error_norms(&zero, &bubble(), 1.0, 4).unwrap();
        let l2_sq: f64 = 1.0 / 900.0;
        let h1_sq = 2.0 * (1.0 / 3.0) * (1.0 / 30.0);
        assert!((e.l2 - l2_sq.sqrt()).abs() < 1e-15);
        assert!((e.l2 * e.l2 - l2_sq).abs() < 1e-16);
        assert!((e.h1_semi * e.h1_semi - h1_sq).abs() < 1e-15);
        assert!((e.energy - (l2_sq + h1_sq).sqrt()).abs() < 1e-15);
        assert!((e.linf_quad - 1.0 / 16.0).abs() < 0.01);
    }

    #[test]
    fn reproduced_field_has_zero_error() {
        let mesh = TensorMesh2D::uniform(4);
        let uh = interpolate_standard(|x, y| x * (1.0 - x) * y * (1.0 - y), &mesh, 2);
        let e = error_norms(&uh, &bubble(), 1e-3, 5).unwrap();
        assert!(e.l2 < 1e-12 && e.h1_semi < 1e-12 && e.energy < 1e-12);
    }

    #[test]
    fn energy_dominates_parts() {
        let mesh = TensorMesh2D::uniform(4);
        let uh = interpolate_standard(|x, y| x * y, &mesh, 1);
        let eps = 1e-2;
        let e = error_norms(&uh, &bubble(), eps, 3).unwrap();
        assert!(e.energy >= e.l2);
        assert!(e.energy >= eps.sqrt() * e.h1_semi);
    }
}
