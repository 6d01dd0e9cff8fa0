use crate::assembly::CsrMatrix;

use super::SolveError;

/// Banded LU factorization with partial pivoting.
///
/// Row `i` of `upper` holds `U[i][i..i + width]` after factorization;
/// `lower[i]` the multipliers of elimination step `i`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    upper: Vec<f64>,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self, SolveError> {
        let n = a.dim();
        let (kl, ku) = a.bandwidths();
        let width = kl + ku + 1;
        // Compact storage: row i, slot j holds A[i][i − kl + j].
        let mut upper = vec![0.0; n * width];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                upper[i * width + (c + kl - i)] = v;
            }
        }
        // Left-justify the first kl rows so that slot 0 is the diagonal-most
        // leading entry of every row.
        let mut shift = kl;
        for i in 0..kl.min(n) {
            let row = &mut upper[i * width..(i + 1) * width];
            row.copy_within(shift.., 0);
            shift -= 1;
            for v in row[width - shift - 1..].iter_mut() {
                *v = 0.0;
            }
        }

        let mut lower = vec![0.0; n * kl.max(1)];
        let mut pivots = vec![0; n];
        let mut l = kl;
        for k in 0..n {
            if l < n {
                l += 1;
            }
            let mut piv = k;
            let mut best = upper[k * width];
            for j in k + 1..l {
                if upper[j * width].abs() > best.abs() {
                    best = upper[j * width];
                    piv = j;
                }
            }
            pivots[k] = piv;
            if best == 0.0 {
                return Err(SolveError::SingularPivot { row: k });
            }
            if piv != k {
                for j in 0..width {
                    upper.swap(k * width + j, piv * width + j);
                }
            }
            for i in k + 1..l {
                let d = upper[i * width] / upper[k * width];
                lower[k * kl + (i - k - 1)] = d;
                for j in 1..width {
                    upper[i * width + j - 1] = upper[i * width + j] - d * upper[k * width + j];
                }
                upper[i * width + width - 1] = 0.0;
            }
        }
        Ok(Self {
            n,
            kl,
            width,
            upper,
            lower,
            pivots,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, width) = (self.n, self.kl, self.width);
        let mut x = b.to_vec();
        let mut l = kl;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            if l < n {
                l += 1;
            }
            for i in k + 1..l {
                x[i] -= self.lower[k * kl + (i - k - 1)] * x[k];
            }
        }
        let mut span = 1;
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in 1..span {
                s -= self.upper[i * width + j] * x[i + j];
            }
            x[i] = s / self.upper[i * width];
            if span < width {
                span += 1;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let lu = BandedLu::factor(&a).unwrap();
        let x = lu.solve(&[3.0, 4.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pivoting_is_required() {
        // zero leading diagonal
        let a = CsrMatrix::from_triplets(
            3,
            &[(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0), (1, 2, 2.0), (2, 1, 3.0), (2, 2, 1.0)],
        );
        let lu = BandedLu::factor(&a).unwrap();
        let xs = [1.0, 2.0, -1.0];
        let b = a.mul_vec(&xs);
        let x = lu.solve(&b);
        for i in 0..3 {
            assert!((x[i] - xs[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn random_banded_against_known_solution() {
        let n: usize = 40;
        let (kl, ku) = (3usize, 5usize);
        let mut t = Vec::new();
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                t.push((i, j, rnd()));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let b = a.mul_vec(&xs);
        let x = BandedLu::factor(&a).unwrap().solve(&b);
        for i in 0..n {
            assert!((x[i] - xs[i]).abs() < 1e-9, "{i}: {} vs {}", x[i], xs[i]);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)]);
        assert!(matches!(BandedLu::factor(&a), Err(SolveError::SingularPivot { .. })));
    }
}
