//! Monitor functions: nodal mesh densities derived from the solution.
//!
//! The moving mesh equidistributes a density `rho >= 1` computed from
//! divided-difference estimates of `u_x` and `u_xx` at the mesh nodes. The
//! optimal-order monitor additionally normalizes the curvature term by a
//! global intensity `alpha` so the density is scale-aware.

use crate::error::{Error, Result};
use crate::mesh::PhysicalMesh;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonitorKind {
    /// `rho = (1 + (1/alpha) |u_xx|^2)^(1/3)` with the intensity clamp.
    Optimal,
    /// `rho = (1 + |u_x|^2)^(1/2)`.
    ArcLength,
    /// `rho = (1 + |u_xx|^2)^(1/4)`.
    Curvature,
}

impl MonitorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MonitorKind::Optimal => "optimal",
            MonitorKind::ArcLength => "arc-length",
            MonitorKind::Curvature => "curvature",
        }
    }

    pub fn all() -> [MonitorKind; 3] {
        [
            MonitorKind::Optimal,
            MonitorKind::ArcLength,
            MonitorKind::Curvature,
        ]
    }
}

impl fmt::Display for MonitorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MonitorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(MonitorKind::Optimal),
            "arc-length" | "arclength" => Ok(MonitorKind::ArcLength),
            "curvature" => Ok(MonitorKind::Curvature),
            other => Err(Error::UnknownMonitor(other.to_string())),
        }
    }
}

/// Nodal density values bound to the mesh they were computed on.
#[derive(Clone, Debug)]
pub struct NodalDensity {
    mesh: PhysicalMesh,
    values: Vec<f64>,
}

impl NodalDensity {
    pub fn new(mesh: PhysicalMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.nodes().len() {
            return Err(Error::InvalidConfig(format!(
                "density has {} values for {} nodes",
                values.len(),
                mesh.nodes().len()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &PhysicalMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// First and second solution derivatives at every node by non-uniform
/// three-point differences; boundary nodes copy their interior neighbor.
/// The second-difference formula is exact for quadratics on any spacing.
pub fn nodal_derivatives(values: &[f64], mesh: &PhysicalMesh) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.n_elements();
    assert!(values.len() == n + 1, "one value per node");
    assert!(n >= 2, "derivative stencil needs at least two elements");
    let sizes = mesh.element_sizes();
    let mut ux = vec![0.0; n + 1];
    let mut uxx = vec![0.0; n + 1];
    for m in 1..n {
        let hl = sizes[m - 1];
        let hr = sizes[m];
        ux[m] = (values[m + 1] - values[m - 1]) / (hl + hr);
        uxx[m] = 2.0 * (hl * values[m + 1] - (hl + hr) * values[m] + hr * values[m - 1])
            / (hl * hr * (hl + hr));
    }
    ux[0] = ux[1];
    ux[n] = ux[n - 1];
    uxx[0] = uxx[1];
    uxx[n] = uxx[n - 1];
    (ux, uxx)
}

/// Intensity normalization for the optimal monitor:
/// `alpha = max(1, ((1/L) int |u_xx|^(2/3))^3)`, trapezoid rule on the mesh.
pub fn intensity_scale(uxx: &[f64], mesh: &PhysicalMesh) -> f64 {
    let sizes = mesh.element_sizes();
    let g: Vec<f64> = uxx.iter().map(|v| v.abs().powf(2.0 / 3.0)).collect();
    let mut integral = 0.0;
    for (e, h) in sizes.iter().enumerate() {
        integral += 0.5 * (g[e] + g[e + 1]) * h;
    }
    let mean = integral / mesh.length();
    (mean * mean * mean).max(1.0)
}

/// Nodal density for the chosen monitor. All three formulas give values in
/// `[1, inf)`; non-finite input surfaces as an error.
pub fn density(kind: MonitorKind, values: &[f64], mesh: &PhysicalMesh) -> Result<NodalDensity> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solution values fed to monitor".into()));
    }
    let (ux, uxx) = nodal_derivatives(values, mesh);
    let rho: Vec<f64> = match kind {
        MonitorKind::Optimal => {
            let alpha = intensity_scale(&uxx, mesh);
            uxx.iter()
                .map(|&d| (1.0 + d * d / alpha).cbrt())
                .collect()
        }
        MonitorKind::ArcLength => ux.iter().map(|&d| (1.0 + d * d).sqrt()).collect(),
        MonitorKind::Curvature => uxx.iter().map(|&d| (1.0 + d * d).powf(0.25)).collect(),
    };
    if rho.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("monitor density".into()));
    }
    NodalDensity::new(mesh.clone(), rho)
}

/// Weighted-average smoothing sweeps (Jacobi style: each sweep reads the
/// previous values only). Interior weights 1-2-1, boundary weights 3-1.
pub fn smooth_density(rho: &NodalDensity, sweeps: usize) -> NodalDensity {
    let mut v = rho.values().to_vec();
    let n = v.len();
    for _ in 0..sweeps {
        let old = v.clone();
        if n >= 2 {
            v[0] = (3.0 * old[0] + old[1]) / 4.0;
            v[n - 1] = (old[n - 2] + 3.0 * old[n - 1]) / 4.0;
        }
        for i in 1..n - 1 {
            v[i] = (old[i - 1] + 2.0 * old[i] + old[i + 1]) / 4.0;
        }
    }
    NodalDensity {
        mesh: rho.mesh.clone(),
        values: v,
    }
}
