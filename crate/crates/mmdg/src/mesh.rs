//! Physical and computational meshes for the 1D domain.

use crate::error::{Error, Result};

/// Fraction of the mean element size below which a mesh counts as tangled.
pub const SIZE_FLOOR_FRACTION: f64 = 1e-3;

/// Partition of `[x_l, x_r]` into strictly increasing nodes.
///
/// Element `n` spans `[nodes[n], nodes[n+1]]` for `n` in `0..n_elements()`.
/// Invariants, enforced at construction: nodes strictly increasing, at
/// least two of them, and every element size above the tangling floor
/// `SIZE_FLOOR_FRACTION * (x_r - x_l) / n_elements`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalMesh {
    nodes: Vec<f64>,
}

impl PhysicalMesh {
    /// Uniform partition of `[x_l, x_r]` into `n_elements` elements.
    pub fn uniform(x_l: f64, x_r: f64, n_elements: usize) -> Result<Self> {
        if !(x_l.is_finite() && x_r.is_finite()) || x_l >= x_r {
            return Err(Error::InvalidMesh(format!(
                "domain [{x_l}, {x_r}] is not a proper interval"
            )));
        }
        if n_elements < 2 {
            return Err(Error::InvalidMesh(format!(
                "need at least two elements, got {n_elements}"
            )));
        }
        let h = (x_r - x_l) / n_elements as f64;
        let mut nodes: Vec<f64> = (0..=n_elements).map(|n| x_l + n as f64 * h).collect();
        // Pin the right boundary exactly; accumulated round-off must not leak
        // into the domain endpoints.
        nodes[n_elements] = x_r;
        Self::from_nodes(nodes)
    }

    /// Wraps an explicit node vector, validating all mesh invariants.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidMesh("need at least two nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh("non-finite node coordinate".into()));
        }
        let n = nodes.len() - 1;
        let floor = SIZE_FLOOR_FRACTION * (nodes[n] - nodes[0]) / n as f64;
        for i in 0..n {
            let h = nodes[i + 1] - nodes[i];
            if h <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "nodes not strictly increasing at index {i}"
                )));
            }
            if h < floor {
                return Err(Error::InvalidMesh(format!(
                    "element {i} has size {h:.3e}, below the floor {floor:.3e}"
                )));
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn x_l(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_r(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.x_r() - self.x_l()
    }

    /// Endpoints `(a, b)` of element `n`.
    pub fn element(&self, n: usize) -> (f64, f64) {
        (self.nodes[n], self.nodes[n + 1])
    }

    /// Size of element `n`.
    pub fn size(&self, n: usize) -> f64 {
        self.nodes[n + 1] - self.nodes[n]
    }

    pub fn element_sizes(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Smallest admissible element size for this mesh.
    pub fn size_floor(&self) -> f64 {
        SIZE_FLOOR_FRACTION * self.length() / self.n_elements() as f64
    }

    /// Index of the element containing `x`, with the left-element convention
    /// at interior nodes: `x == nodes[m]` for interior `m` belongs to element
    /// `m - 1`. Points within `1e-12 * length` of the domain are clamped;
    /// anything further out is an error.
    pub fn locate(&self, x: f64) -> Result<usize> {
        let slack = 1e-12 * self.length();
        if x < self.x_l() - slack || x > self.x_r() + slack {
            return Err(Error::OutsideDomain {
                x,
                x_l: self.x_l(),
                x_r: self.x_r(),
            });
        }
        if x <= self.x_l() {
            return Ok(0);
        }
        if x >= self.x_r() {
            return Ok(self.n_elements() - 1);
        }
        // First index with nodes[idx] >= x; x in (x_l, x_r) gives idx >= 1.
        let idx = self.nodes.partition_point(|&v| v < x);
        Ok(idx - 1)
    }
}

/// Fixed reference grid `xi_n = n / n_elements` on `[0, 1]`. The moving-mesh
/// equation is posed in this coordinate; only the spacing ever enters.
#[derive(Clone, Copy, Debug)]
pub struct ComputationalMesh {
    n_elements: usize,
}

impl ComputationalMesh {
    pub fn new(n_elements: usize) -> Self {
        assert!(n_elements >= 1);
        Self { n_elements }
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn xi(&self, n: usize) -> f64 {
        n as f64 / self.n_elements as f64
    }

    pub fn delta_xi(&self) -> f64 {
        1.0 / self.n_elements as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mesh_basic() {
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(mesh.n_elements(), 4);
        assert_eq!(mesh.nodes().len(), 5);
        assert_eq!(mesh.x_l(), 0.0);
        assert_eq!(mesh.x_r(), 1.0);
        for h in mesh.element_sizes() {
            assert!((h - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_mesh_negative_domain() {
        let mesh = PhysicalMesh::uniform(-1.0, 0.0, 40).unwrap();
        assert_eq!(mesh.nodes().len(), 41);
        assert!((mesh.size(17) - 0.025).abs() < 1e-15);
        assert_eq!(mesh.x_r(), 0.0);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(PhysicalMesh::uniform(1.0, 0.0, 4).is_err());
        assert!(PhysicalMesh::uniform(0.0, 0.0, 4).is_err());
        assert!(PhysicalMesh::uniform(0.0, f64::NAN, 4).is_err());
    }

    #[test]
    fn rejects_non_monotone_nodes() {
        assert!(PhysicalMesh::from_nodes(vec![0.0, 0.5, 0.4, 1.0]).is_err());
        assert!(PhysicalMesh::from_nodes(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(PhysicalMesh::from_nodes(vec![0.0]).is_err());
    }

    #[test]
    fn rejects_collapsed_element() {
        // Floor for 4 elements on [0,1] is 2.5e-4.
        let nodes = vec![0.0, 1e-5, 0.5, 0.75, 1.0];
        assert!(PhysicalMesh::from_nodes(nodes).is_err());
        let nodes = vec![0.0, 1e-3, 0.5, 0.75, 1.0];
        assert!(PhysicalMesh::from_nodes(nodes).is_ok());
    }

    #[test]
    fn locate_uses_left_element_at_interior_nodes() {
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(mesh.locate(0.3).unwrap(), 1); // inside [0.25, 0.5]
        assert_eq!(mesh.locate(0.25).unwrap(), 0); // left element owns the node
        assert_eq!(mesh.locate(0.0).unwrap(), 0);
        assert_eq!(mesh.locate(1.0).unwrap(), 3);
        assert!(mesh.locate(1.5).is_err());
        assert!(mesh.locate(-0.1).is_err());
    }

    #[test]
    fn element_sizes_sum_to_length() {
        let nodes = vec![-1.0, -0.3, 0.11, 0.12, 0.7, 2.0];
        let mesh = PhysicalMesh::from_nodes(nodes).unwrap();
        let total: f64 = mesh.element_sizes().iter().sum();
        assert!((total - mesh.length()).abs() < 1e-14);
    }

    #[test]
    fn computational_mesh_spacing() {
        let cm = ComputationalMesh::new(40);
        assert!((cm.delta_xi() - 0.025).abs() < 1e-16);
        assert_eq!(cm.xi(0), 0.0);
        assert_eq!(cm.xi(40), 1.0);
    }
}
