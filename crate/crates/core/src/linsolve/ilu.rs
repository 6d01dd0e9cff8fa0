use crate::assembly::CsrMatrix;

use super::SolveError;

/// Incomplete LU factorization with the sparsity pattern of `A` (no fill).
///
/// `L` (unit lower) and `U` share the CSR storage of the input.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    factors: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &CsrMatrix) -> Result<Self, SolveError> {
        let n = a.dim();
        let mut lu = a.clone();
        let row_ptr = lu.row_ptr().to_vec();
        let col_idx = lu.col_idx().to_vec();
        let mut diag = vec![usize::MAX; n];
        for r in 0..n {
            for p in row_ptr[r]..row_ptr[r + 1] {
                if col_idx[p] == r {
                    diag[r] = p;
                }
            }
            if diag[r] == usize::MAX || lu.values()[diag[r]] == 0.0 {
                return Err(SolveError::ZeroPivot { row: r });
            }
        }

        // position of column c in the current row, usize::MAX if absent
        let mut work = vec![usize::MAX; n];
        let vals = lu.values_mut();
        for i in 0..n {
            for p in row_ptr[i]..row_ptr[i + 1] {
                work[col_idx[p]] = p;
            }
            for p in row_ptr[i]..diag[i] {
                let k = col_idx[p];
                let lik = vals[p] / vals[diag[k]];
                vals[p] = lik;
                for q in diag[k] + 1..row_ptr[k + 1] {
                    let w = work[col_idx[q]];
                    if w != usize::MAX {
                        vals[w] -= lik * vals[q];
                    }
                }
            }
            for p in row_ptr[i]..row_ptr[i + 1] {
                work[col_idx[p]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 || !vals[diag[i]].is_finite() {
                return Err(SolveError::ZeroPivot { row: i });
            }
        }
        Ok(Self { factors: lu, diag })
    }

    /// `z = (LU)⁻¹ r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.diag.len();
        let rp = self.factors.row_ptr();
        let ci = self.factors.col_idx();
        let v = self.factors.values();
        for i in 0..n {
            let mut s = r[i];
            for p in rp[i]..self.diag[i] {
                s -= v[p] * z[ci[p]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..rp[i + 1] {
                s -= v[p] * z[ci[p]];
            }
            z[i] = s / v[self.diag[i]];
        }
    }

    pub fn factors(&self) -> &CsrMatrix {
        &self.factors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Doolittle LU without pivoting on a dense copy.
    fn dense_lu(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let n = a.len();
        for k in 0..n {
            for i in k + 1..n {
                a[i][k] /= a[k][k];
                for j in k + 1..n {
                    a[i][j] -= a[i][k] * a[k][j];
                }
            }
        }
        a
    }

    #[test]
    fn diagonal_is_exact() {
        let a = CsrMatrix::from_triplets(3, &[(0, 0, 2.0), (1, 1, 4.0), (2, 2, -0.5)]);
        let ilu = Ilu0::factor(&a).unwrap();
        let mut z = vec![0.0; 3];
        ilu.apply(&[2.0, 4.0, 1.0], &mut z);
        assert_eq!(z, vec![1.0, 1.0, -2.0]);
    }

    #[test]
    fn tridiagonal_equals_full_lu() {
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0 - 0.1 * i as f64));
                t.push((i + 1, i, -2.0 + 0.3 * i as f64));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let ilu = Ilu0::factor(&a).unwrap();
        let dense = dense_lu(a.to_dense());
        let f = ilu.factors().to_dense();
        for i in 0..n {
            for j in 0..n {
                if (i as isize - j as isize).abs() <= 1 {
                    assert!((f[i][j] - dense[i][j]).abs() < 1e-15, "({i},{j})");
                }
            }
        }
        // exact solve
        let x = [1.0, -2.0, 0.5, 3.0, 1.5];
        let b = a.mul_vec(&x);
        let mut z = vec![0.0; n];
        ilu.apply(&b, &mut z);
        for i in 0..n {
            assert!((z[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(Ilu0::factor(&a), Err(SolveError::ZeroPivot { row: 1 })));
        let b = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(Ilu0::factor(&b), Err(SolveError::ZeroPivot { row: 1 })));
    }
}
