//! Node relocation by an implicitly discretized moving-mesh PDE.
//!
//! With computational coordinate `xi_n = n/N` and density `rho`, nodes obey
//!
//! ```text
//!   dx_n/dt = [ a_n (x_{n+1} - x_n) - b_n (x_n - x_{n-1}) ]
//!             / (tau rho_n dxi^2),
//! ```
//!
//! `a_n = (rho_{n+1} + rho_n)/2`, `b_n = (rho_n + rho_{n-1})/2`. Steady
//! states equidistribute the trapezoid cell masses `(rho_n + rho_{n+1}) h/2`.
//! Each call advances one flow step with `rho` frozen, using backward Euler
//! on the linear system (boundary nodes pinned), which is unconditionally
//! stable and tridiagonal.

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::mesh::{ComputationalMesh, PhysicalMesh};
use crate::monitor::{smooth_density, NodalDensity};
use std::str::FromStr;

/// Spatial coupling used by the mesh equation. `Difference` is the
/// equidistributing form; `Sum` replaces the node gaps by node sums, which
/// is *not* stationary on equidistributed meshes and exists only as a
/// diagnostic for comparing against the misprinted variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmpdeStencil {
    Difference,
    Sum,
}

impl MmpdeStencil {
    pub fn as_str(&self) -> &'static str {
        match self {
            MmpdeStencil::Difference => "difference",
            MmpdeStencil::Sum => "sum",
        }
    }
}

impl FromStr for MmpdeStencil {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "difference" => Ok(MmpdeStencil::Difference),
            "sum" => Ok(MmpdeStencil::Sum),
            other => Err(Error::InvalidConfig(format!("unknown mmpde stencil '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MmpdeConfig {
    /// Relaxation time scale; smaller means faster node movement.
    pub tau: f64,
    /// Flow time advanced per call (the solver couples this to its own dt).
    pub dt: f64,
    /// Backward Euler sub-steps per call, density frozen throughout.
    pub sub_steps: usize,
    pub stencil: MmpdeStencil,
}

/// One mesh-motion step. On a tangled result (an element below the size
/// floor) the step is retried once from the original mesh with an extra
/// smoothing sweep applied to the density; a second failure is an error.
pub fn mmpde_step(mesh: &PhysicalMesh, rho: &NodalDensity, cfg: &MmpdeConfig) -> Result<PhysicalMesh> {
    assert!(cfg.tau > 0.0 && cfg.dt > 0.0 && cfg.sub_steps >= 1);
    if rho.values().len() != mesh.nodes().len() {
        return Err(Error::InvalidConfig(format!(
            "density has {} values for {} nodes",
            rho.values().len(),
            mesh.nodes().len()
        )));
    }
    match attempt(mesh, rho.values(), cfg) {
        Ok(new_mesh) => Ok(new_mesh),
        Err(Error::InvalidMesh(_)) => {
            let smoother = smooth_density(rho, 1);
            attempt(mesh, smoother.values(), cfg).map_err(|e| match e {
                Error::InvalidMesh(msg) => {
                    Error::InvalidMesh(format!("{msg} (after smoothing retry)"))
                }
                other => other,
            })
        }
        Err(e) => Err(e),
    }
}

fn attempt(mesh: &PhysicalMesh, rho: &[f64], cfg: &MmpdeConfig) -> Result<PhysicalMesh> {
    let n = mesh.n_elements();
    if n < 2 {
        // No interior nodes to move.
        return Ok(mesh.clone());
    }
    let dxi = ComputationalMesh::new(n).delta_xi();
    let dt_sub = cfg.dt / cfg.sub_steps as f64;
    let mut x = mesh.nodes().to_vec();
    let (x_l, x_r) = (x[0], x[n]);

    for _ in 0..cfg.sub_steps {
        // Interior unknowns x_1..x_{n-1}.
        let m = n - 1;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let node = i + 1;
            let c = dt_sub / (cfg.tau * rho[node] * dxi * dxi);
            let a = 0.5 * (rho[node + 1] + rho[node]);
            let b = 0.5 * (rho[node] + rho[node - 1]);
            match cfg.stencil {
                MmpdeStencil::Difference => {
                    diag[i] = 1.0 + c * (a + b);
                    upper[i] = -c * a;
                    lower[i] = -c * b;
                    rhs[i] = x[node];
                    if node == 1 {
                        rhs[i] += c * b * x_l;
                    }
                    if node == n - 1 {
                        rhs[i] += c * a * x_r;
                    }
                }
                MmpdeStencil::Sum => {
                    diag[i] = 1.0 - c * (a - b);
                    upper[i] = -c * a;
                    lower[i] = c * b;
                    rhs[i] = x[node];
                    if node == 1 {
                        rhs[i] -= c * b * x_l;
                    }
                    if node == n - 1 {
                        rhs[i] += c * a * x_r;
                    }
                }
            }
        }
        let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        x[1..n].copy_from_slice(&interior);
    }
    PhysicalMesh::from_nodes(x)
}

/// Deviation from perfect equidistribution of the trapezoid cell masses
/// `m_e = (rho_e + rho_{e+1}) h_e / 2`: `max_e |m_e - mean| / mean`. Zero
/// exactly at the steady state of the difference stencil.
pub fn equidistribution_residual(mesh: &PhysicalMesh, rho: &[f64]) -> f64 {
    let n = mesh.n_elements();
    assert!(rho.len() == n + 1);
    let masses: Vec<f64> = (0..n)
        .map(|e| 0.5 * (rho[e] + rho[e + 1]) * mesh.size(e))
        .collect();
    let mean = masses.iter().sum::<f64>() / n as f64;
    masses
        .iter()
        .fold(0.0f64, |m, v| m.max((v - mean).abs()))
        / mean
}
