//! Discontinuous piecewise-polynomial solutions and their trace operators.

use crate::basis::{eval_basis, lagrange_nodes};
use crate::error::{Error, Result};
use crate::mesh::PhysicalMesh;
use crate::quadrature::QuadratureRule;

/// Element-wise Lagrange expansion of degree `k` on a mesh, stored as a flat
/// coefficient vector: element `n` owns `coeffs[n*(k+1) .. (n+1)*(k+1)]`,
/// ordered left node to right node. Because the basis is nodal with endpoint
/// nodes, `block(n)[0]` and `block(n)[k]` are the element's boundary traces.
#[derive(Clone, Debug)]
pub struct DgSolution {
    degree: usize,
    mesh: PhysicalMesh,
    coeffs: Vec<f64>,
}

impl DgSolution {
    pub fn zeros(mesh: PhysicalMesh, degree: usize) -> Self {
        assert!(degree >= 1);
        let n = mesh.n_elements() * (degree + 1);
        Self {
            degree,
            mesh,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(mesh: PhysicalMesh, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.n_elements() * (degree + 1) {
            return Err(Error::InvalidConfig(format!(
                "coefficient vector has length {}, expected {}",
                coeffs.len(),
                mesh.n_elements() * (degree + 1)
            )));
        }
        Ok(Self {
            degree,
            mesh,
            coeffs,
        })
    }

    /// Nodal interpolant of `f`: samples `f` at every element's Lagrange
    /// nodes. Used for initial guesses and in tests; the projection in the
    /// assembly module is the L2-orthogonal alternative.
    pub fn interpolate(mesh: PhysicalMesh, degree: usize, mut f: impl FnMut(f64) -> f64) -> Self {
        let mut coeffs = Vec::with_capacity(mesh.n_elements() * (degree + 1));
        for n in 0..mesh.n_elements() {
            let (a, b) = mesh.element(n);
            for x in lagrange_nodes(degree, a, b).expect("valid element") {
                coeffs.push(f(x));
            }
        }
        Self {
            degree,
            mesh,
            coeffs,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mesh(&self) -> &PhysicalMesh {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficients per element.
    pub fn n_local(&self) -> usize {
        self.degree + 1
    }

    pub fn block(&self, n: usize) -> &[f64] {
        let m = self.n_local();
        &self.coeffs[n * m..(n + 1) * m]
    }

    /// Left and right traces `(u(x_n^-), u(x_n^+))` at interior node `n`.
    pub fn trace_values(&self, n: usize) -> Result<(f64, f64)> {
        let ne = self.mesh.n_elements();
        if n == 0 || n >= ne {
            return Err(Error::InvalidConfig(format!(
                "node {n} is not interior (1..{ne})"
            )));
        }
        let k = self.degree;
        Ok((self.block(n - 1)[k], self.block(n)[0]))
    }

    /// Jump at mesh node `n`: `u^- - u^+` at interior nodes, `-u^+` at the
    /// left boundary, `u^-` at the right boundary.
    pub fn jump(&self, n: usize) -> f64 {
        let ne = self.mesh.n_elements();
        let k = self.degree;
        if n == 0 {
            -self.block(0)[0]
        } else if n == ne {
            self.block(ne - 1)[k]
        } else {
            self.block(n - 1)[k] - self.block(n)[0]
        }
    }

    /// Average at mesh node `n`: the mean of the two traces at interior
    /// nodes, the single trace at a boundary.
    pub fn average(&self, n: usize) -> f64 {
        let ne = self.mesh.n_elements();
        let k = self.degree;
        if n == 0 {
            self.block(0)[0]
        } else if n == ne {
            self.block(ne - 1)[k]
        } else {
            0.5 * (self.block(n - 1)[k] + self.block(n)[0])
        }
    }

    /// Single representative value at mesh node `n` (trace average); this is
    /// what the monitor sees.
    pub fn nodal_value(&self, n: usize) -> f64 {
        self.average(n)
    }

    /// Representative values at all mesh nodes.
    pub fn nodal_values(&self) -> Vec<f64> {
        (0..=self.mesh.n_elements())
            .map(|n| self.nodal_value(n))
            .collect()
    }

    /// Local polynomial of element `n` at reference coordinate `t`.
    pub fn eval_local(&self, n: usize, t: f64) -> f64 {
        let (v, _) = eval_basis(self.degree, t);
        self.block(n).iter().zip(&v).map(|(c, b)| c * b).sum()
    }

    /// Local derivative (with respect to `x`) of element `n` at reference
    /// coordinate `t`.
    pub fn eval_local_deriv(&self, n: usize, t: f64) -> f64 {
        let (_, d) = eval_basis(self.degree, t);
        let h = self.mesh.size(n);
        self.block(n).iter().zip(&d).map(|(c, b)| c * b).sum::<f64>() / h
    }

    /// Point value at `x`: the local polynomial inside an element, the trace
    /// average exactly at an interior node (left-element convention decides
    /// ties, the average makes the choice irrelevant).
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let n = self.mesh.locate(x)?;
        let nodes = self.mesh.nodes();
        if n + 1 < self.mesh.n_elements() && x == nodes[n + 1] {
            return Ok(self.nodal_value(n + 1));
        }
        let (a, b) = self.mesh.element(n);
        let t = ((x - a) / (b - a)).clamp(0.0, 1.0);
        Ok(self.eval_local(n, t))
    }

    /// Integral of the solution over the domain, element-wise quadrature.
    pub fn integral(&self, rule: &QuadratureRule) -> f64 {
        let mut total = 0.0;
        for n in 0..self.mesh.n_elements() {
            let h = self.mesh.size(n);
            total += h * rule.integrate(|t| self.eval_local(n, t));
        }
        total
    }

    /// Smallest and largest coefficient. For a nodal basis these bound the
    /// plotted solution values at the element nodes, which is the quantity
    /// the overshoot diagnostics track.
    pub fn coeff_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &c in &self.coeffs {
            lo = lo.min(c);
            hi = hi.max(c);
        }
        (lo, hi)
    }
}
