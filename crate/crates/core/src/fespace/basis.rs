use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("polynomial degree must be at least 1")]
    ZeroDegree,
    #[error("reference coordinate {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// Degree-`k` Lagrange cardinal functions on the equispaced nodes
/// `{0, 1/k, …, 1}` of the reference interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    degree: usize,
    nodes: Vec<f64>,
    /// `1 / Π_{m≠a} (t_a − t_m)`
    denominators: Vec<f64>,
}

impl BasisSet {
    pub fn new(degree: usize) -> Result<Self, BasisError> {
        if degree == 0 {
            return Err(BasisError::ZeroDegree);
        }
        let nodes: Vec<f64> = (0..=degree).map(|s| s as f64 / degree as f64).collect();
        let denominators = (0..=degree)
            .map(|a| {
                let prod: f64 = (0..=degree)
                    .filter(|&m| m != a)
                    .map(|m| nodes[a] - nodes[m])
                    .product();
                1.0 / prod
            })
            .collect();
        Ok(Self {
            degree,
            nodes,
            denominators,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ref_nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values and first derivatives of all cardinal functions at `t`.
    pub fn eval(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>), BasisError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(BasisError::OutOfRange(t));
        }
        let mut values = vec![0.0; self.len()];
        let mut derivs = vec![0.0; self.len()];
        self.eval_into(t, &mut values, &mut derivs);
        Ok((values, derivs))
    }

    /// Unchecked evaluation into caller buffers, any real `t`.
    pub fn eval_into(&self, t: f64, values: &mut [f64], derivs: &mut [f64]) {
        let nodes = &self.nodes;
        let n = self.len();
        for a in 0..n {
            let mut v = 1.0;
            let mut d = 0.0;
            for m in 0..n {
                if m == a {
                    continue;
                }
                let f = t - nodes[m];
                d = d * f + v;
                v *= f;
            }
            values[a] = v * self.denominators[a];
            derivs[a] = d * self.denominators[a];
        }
    }

    /// Values only.
    pub fn values(&self, t: f64, out: &mut [f64]) {
        let n = self.len();
        for a in 0..n {
            let mut v = 1.0;
            for m in 0..n {
                if m != a {
                    v *= t - self.nodes[m];
                }
            }
            out[a] = v * self.denominators[a];
        }
    }

    /// Tabulates values and derivatives at a fixed set of reference points.
    pub fn tabulate(&self, points: &[f64]) -> BasisTable {
        let n = self.len();
        let mut values = vec![0.0; n * points.len()];
        let mut derivs = vec![0.0; n * points.len()];
        for (q, &t) in points.iter().enumerate() {
            self.eval_into(t, &mut values[q * n..(q + 1) * n], &mut derivs[q * n..(q + 1) * n]);
        }
        BasisTable {
            n_basis: n,
            n_points: points.len(),
            values,
            derivs,
        }
    }
}

/// Basis values and derivatives at reference points, point-major.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub n_basis: usize,
    pub n_points: usize,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl BasisTable {
    #[inline]
    pub fn value(&self, point: usize, basis: usize) -> f64 {
        self.values[point * self.n_basis + basis]
    }

    #[inline]
    pub fn deriv(&self, point: usize, basis: usize) -> f64 {
        self.derivs[point * self.n_basis + basis]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_at_left_node() {
        let b = BasisSet::new(1).unwrap();
        let (v, d) = b.eval(0.0).unwrap();
        assert_eq!(v, vec![1.0, 0.0]);
        assert_eq!(d, vec![-1.0, 1.0]);
    }

    #[test]
    fn quadratic_at_quarter() {
        let b = BasisSet::new(2).unwrap();
        let (v, _) = b.eval(0.25).unwrap();
        let expected = [0.375, 0.75, -0.125];
        for (a, e) in v.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn cardinality() {
        for k in 1..=4 {
            let b = BasisSet::new(k).unwrap();
            for (m, &t) in b.ref_nodes().iter().enumerate() {
                let (v, _) = b.eval(t).unwrap();
                for (a, va) in v.iter().enumerate() {
                    let e = if a == m { 1.0 } else { 0.0 };
                    assert!((va - e).abs() < 1e-14, "k={k} node {m} basis {a}: {va}");
                }
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = BasisSet::new(3).unwrap();
        let t = 0.37;
        let h = 1e-6;
        let (_, d) = b.eval(t).unwrap();
        let (vp, _) = b.eval(t + h).unwrap();
        let (vm, _) = b.eval(t - h).unwrap();
        for a in 0..4 {
            let fd = (vp[a] - vm[a]) / (2.0 * h);
            assert!((fd - d[a]).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let b = BasisSet::new(2).unwrap();
        assert_eq!(b.eval(1.5), Err(BasisError::OutOfRange(1.5)));
        assert_eq!(b.eval(-0.1), Err(BasisError::OutOfRange(-0.1)));
        assert_eq!(BasisSet::new(0), Err(BasisError::ZeroDegree));
    }
}
