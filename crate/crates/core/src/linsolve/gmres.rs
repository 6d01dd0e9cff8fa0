//! Restarted GMRES with right preconditioning.
//!
//! Right preconditioning keeps the Arnoldi residual estimate equal to the
//! unpreconditioned residual, so the stopping test is on `‖b − Ax‖/‖b‖`.
//! Every restart and the final exit recompute the true residual. A run
//! whose true residual drops by less than `STALL_FACTOR` over
//! `STALL_CYCLES` consecutive restarts is reported as stagnated.

use crate::assembly::CsrMatrix;

use super::Preconditioner;

pub(crate) const STALL_CYCLES: usize = 10;
pub(crate) const STALL_FACTOR: f64 = 0.1;

pub(crate) struct GmresOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.mul_vec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

pub(crate) fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    precond: &Preconditioner,
    restart: usize,
    rel_tol: f64,
    max_iters: usize,
) -> GmresOutcome {
    let n = b.len();
    let m = restart.max(1).min(n.max(1));
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return GmresOutcome {
            iterations: 0,
            converged: true,
            stagnated: false,
        };
    }
    let target = rel_tol * b_norm;

    let mut basis: Vec<Vec<f64>> = (0..=m).map(|_| vec![0.0; n]).collect();
    // Hessenberg columns, h[j] has j + 2 entries
    let mut h: Vec<Vec<f64>> = (0..m).map(|j| vec![0.0; j + 2]).collect();
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut r = vec![0.0; n];

    let mut iterations = 0;
    residual(a, x, b, &mut r);
    let mut r_norm = norm(&r);
    let mut history = vec![r_norm];

    loop {
        if r_norm <= target {
            return GmresOutcome {
                iterations,
                converged: true,
                stagnated: false,
            };
        }
        let cycles = history.len() - 1;
        let stagnated =
            cycles >= STALL_CYCLES && r_norm > STALL_FACTOR * history[cycles - STALL_CYCLES];
        if iterations >= max_iters || stagnated || !r_norm.is_finite() {
            return GmresOutcome {
                iterations,
                converged: false,
                stagnated,
            };
        }

        for (vi, ri) in basis[0].iter_mut().zip(&r) {
            *vi = ri / r_norm;
        }
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = r_norm;

        let mut steps = 0;
        for j in 0..m {
            precond.apply(&basis[j], &mut z);
            a.mul_vec_into(&z, &mut w);
            // modified Gram-Schmidt
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                h[j][i] = hij;
                for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                    *wk -= hij * vk;
                }
            }
            let h_next = norm(&w);
            h[j][j + 1] = h_next;

            for i in 0..j {
                let t = cs[i] * h[j][i] + sn[i] * h[j][i + 1];
                h[j][i + 1] = -sn[i] * h[j][i] + cs[i] * h[j][i + 1];
                h[j][i] = t;
            }
            let denom = h[j][j].hypot(h[j][j + 1]);
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / denom;
                sn[j] = h[j][j + 1] / denom;
            }
            h[j][j] = cs[j] * h[j][j] + sn[j] * h[j][j + 1];
            h[j][j + 1] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];

            iterations += 1;
            steps = j + 1;
            if g[j + 1].abs() <= target || h_next == 0.0 || iterations >= max_iters {
                break;
            }
            for (vk, wk) in basis[j + 1].iter_mut().zip(&w) {
                *vk = wk / h_next;
            }
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for l in i + 1..steps {
                s -= h[l][i] * y[l];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        w.iter_mut().for_each(|v| *v = 0.0);
        for (i, yi) in y.iter().enumerate() {
            for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                *wk += yi * vk;
            }
        }
        precond.apply(&w, &mut z);
        for (xk, zk) in x.iter_mut().zip(&z) {
            *xk += zk;
        }

        residual(a, x, b, &mut r);
        r_norm = norm(&r);
        history.push(r_norm);
    }
}
