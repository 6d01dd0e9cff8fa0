use crate::mesh::{Mesh1D, TensorMesh2D};

/// Global node numbering for continuous `Q_k` on a tensor mesh.
///
/// Nodes form a `(kN+1) × (kN+1)` lattice indexed by `(ix, iy)` with
/// `ix = k·i + s` for the node `x_i + (s/k) h_{x,i}`. Interior nodes (those
/// off `∂Ω`) are numbered lexicographically, `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    degree: usize,
    n: usize,
    x_nodes: Vec<f64>,
    y_nodes: Vec<f64>,
}

fn node_coordinates(mesh: &Mesh1D, k: usize) -> Vec<f64> {
    let n = mesh.n_cells();
    let pts = mesh.points();
    let mut out = Vec::with_capacity(k * n + 1);
    for i in 0..n {
        let h = mesh.step(i);
        for s in 0..k {
            out.push(pts[i] + (s as f64 / k as f64) * h);
        }
    }
    out.push(pts[n]);
    out
}

impl DofMap {
    pub fn new(mesh: &TensorMesh2D, k: usize) -> Self {
        assert!(k >= 1, "degree must be at least 1");
        Self {
            degree: k,
            n: mesh.n(),
            x_nodes: node_coordinates(&mesh.mesh_x, k),
            y_nodes: node_coordinates(&mesh.mesh_y, k),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    /// Nodes per direction, `kN + 1`.
    pub fn nodes_per_dir(&self) -> usize {
        self.degree * self.n + 1
    }

    /// Interior nodes per direction, `kN − 1`.
    pub fn interior_per_dir(&self) -> usize {
        self.degree * self.n - 1
    }

    pub fn n_interior(&self) -> usize {
        self.interior_per_dir().pow(2)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes_per_dir().pow(2)
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn y_nodes(&self) -> &[f64] {
        &self.y_nodes
    }

    #[inline]
    pub fn node_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nodes_per_dir() + ix
    }

    #[inline]
    pub fn is_boundary(&self, ix: usize, iy: usize) -> bool {
        let last = self.nodes_per_dir() - 1;
        ix == 0 || iy == 0 || ix == last || iy == last
    }

    /// Interior index of lattice node `(ix, iy)`, `None` on the boundary.
    #[inline]
    pub fn interior_index(&self, ix: usize, iy: usize) -> Option<usize> {
        if self.is_boundary(ix, iy) {
            None
        } else {
            Some((iy - 1) * self.interior_per_dir() + (ix - 1))
        }
    }

    /// Lattice position of interior dof `r`.
    pub fn interior_position(&self, r: usize) -> (usize, usize) {
        let m = self.interior_per_dir();
        (r % m + 1, r / m + 1)
    }

    pub fn coordinates(&self, ix: usize, iy: usize) -> (f64, f64) {
        (self.x_nodes[ix], self.y_nodes[iy])
    }

    /// Interior indices of the `(k+1)²` local nodes of cell `(i, j)`,
    /// local order `a + (k+1)·b`.
    pub fn cell_dofs(&self, i: usize, j: usize, out: &mut Vec<Option<usize>>) {
        out.clear();
        let k = self.degree;
        for b in 0..=k {
            for a in 0..=k {
                out.push(self.interior_index(k * i + a, k * j + b));
            }
        }
    }

    /// Upper bound on `|r − c|` for coupled interior dofs.
    pub fn bandwidth(&self) -> usize {
        self.degree * self.interior_per_dir() + self.degree
    }

    /// `index x y` per interior dof.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n_interior() {
            let (ix, iy) = self.interior_position(r);
            let (x, y) = self.coordinates(ix, iy);
            out.push_str(&format!("{r} {x:.16e} {y:.16e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{bakhvalov_points, MeshConfig};

    #[test]
    fn single_interior_node() {
        let m = TensorMesh2D::uniform(2);
        let d = DofMap::new(&m, 1);
        assert_eq!(d.n_interior(), 1);
        assert_eq!(d.interior_index(1, 1), Some(0));
        assert_eq!(d.coordinates(1, 1), (0.5, 0.5));
    }

    #[test]
    fn quadratic_count() {
        let d = DofMap::new(&TensorMesh2D::uniform(4), 2);
        assert_eq!(d.n_interior(), 49);
        assert_eq!(d.x_nodes().len(), 9);
    }

    #[test]
    fn linear_nodes_are_mesh_points() {
        let c = MeshConfig::new(8, 0.01, 2.0, 1.0);
        let mx = bakhvalov_points(&c).unwrap();
        let m = TensorMesh2D::new(mx.clone(), mx.clone()).unwrap();
        let d = DofMap::new(&m, 1);
        for ix in 1..8 {
            assert_eq!(d.x_nodes()[ix], mx.points()[ix]);
        }
    }

    #[test]
    fn interior_indices_are_a_bijection() {
        let d = DofMap::new(&TensorMesh2D::uniform(4), 3);
        let mut seen = vec![false; d.n_interior()];
        let last = d.nodes_per_dir() - 1;
        for iy in 0..=last {
            for ix in 0..=last {
                match d.interior_index(ix, iy) {
                    Some(r) => {
                        assert!(!seen[r]);
                        seen[r] = true;
                        assert_eq!(d.interior_position(r), (ix, iy));
                    }
                    None => assert!(d.is_boundary(ix, iy)),
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
