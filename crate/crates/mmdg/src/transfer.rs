//! Solution transfer between meshes by nodal interpolation.
//!
//! The new coefficients are point values of the old solution at the new
//! elements' Lagrange nodes. Where a new node lands exactly on an old
//! interior mesh node the two-sided trace average is used; everywhere else
//! the containing element's polynomial is evaluated (left element at
//! coincident nodes, though the average makes that choice moot). Nodal
//! transfer does not conserve mass exactly; the driver logs the drift.

use crate::basis::lagrange_nodes;
use crate::error::{Error, Result};
use crate::mesh::PhysicalMesh;
use crate::solution::DgSolution;

/// Element of `mesh` containing `x`, left-element convention at shared
/// nodes.
pub fn locate_element(mesh: &PhysicalMesh, x: f64) -> Result<usize> {
    mesh.locate(x)
}

/// Re-expresses `u_old` on `new_mesh` (same polynomial degree, same domain).
pub fn interpolate_solution(u_old: &DgSolution, new_mesh: &PhysicalMesh) -> Result<DgSolution> {
    let old_mesh = u_old.mesh();
    if old_mesh.x_l() != new_mesh.x_l() || old_mesh.x_r() != new_mesh.x_r() {
        return Err(Error::InvalidMesh(format!(
            "transfer between different domains: [{}, {}] vs [{}, {}]",
            old_mesh.x_l(),
            old_mesh.x_r(),
            new_mesh.x_l(),
            new_mesh.x_r()
        )));
    }
    let k = u_old.degree();
    let mut coeffs = Vec::with_capacity(new_mesh.n_elements() * (k + 1));
    for n in 0..new_mesh.n_elements() {
        let (a, b) = new_mesh.element(n);
        for x in lagrange_nodes(k, a, b)? {
            coeffs.push(u_old.evaluate(x)?);
        }
    }
    DgSolution::from_coeffs(new_mesh.clone(), k, coeffs)
}
