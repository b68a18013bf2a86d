//! Run driver: advances a problem from `t0` to `tf` on a fixed or moving
//! mesh and records everything the output writers and experiments need.
//!
//! A moving-mesh step solves on the current mesh first, uses that tentative
//! solution to build the monitor density, moves the mesh one MMPDE step,
//! interpolates the *previous* accepted solution onto the new mesh and
//! re-solves there. The initial mesh is pre-adapted to the initial data so
//! the first step already resolves the layer.

use std::fmt;
use std::str::FromStr;

use crate::assembly::{assemble_system, project_initial};
use crate::error::{Error, Result};
use crate::mesh::PhysicalMesh;
use crate::mmpde::{equidistribution_residual, mmpde_step, MmpdeConfig, MmpdeStencil};
use crate::monitor::{density, smooth_density, MonitorKind};
use crate::problems::{by_id, ProblemSpec};
use crate::quadrature::QuadratureRule;
use crate::solution::DgSolution;
use crate::stepping::{backward_euler_step, NewtonConfig, StepReport};
use crate::transfer::interpolate_solution;

/// Relative tolerance for matching snapshot times to the step grid.
const TIME_MATCH_TOL: f64 = 1e-9;

/// Iteration cap for the initial-mesh relaxation loop.
const ADAPT_MAX_ITERATIONS: usize = 400;

/// Samples per element when tracking the solution's value range.
const RANGE_SAMPLES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshMode {
    Fixed,
    Moving,
}

impl MeshMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeshMode::Fixed => "fixed",
            MeshMode::Moving => "moving",
        }
    }
}

impl fmt::Display for MeshMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeshMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(MeshMode::Fixed),
            "moving" => Ok(MeshMode::Moving),
            other => Err(Error::InvalidConfig(format!(
                "unknown mesh mode '{other}' (expected 'fixed' or 'moving')"
            ))),
        }
    }
}

/// Everything that defines one run. Field meanings match the CLI flags.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: String,
    pub monitor: MonitorKind,
    pub mesh_mode: MeshMode,
    pub degree: usize,
    pub elements: usize,
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
    pub tau: f64,
    pub sigma_scale: f64,
    pub smooth_sweeps: usize,
    pub mmpde_sub_steps: usize,
    pub mmpde_stencil: MmpdeStencil,
    pub newton: NewtonConfig,
    /// Times at which the full solution is recorded; must lie on the grid.
    pub snapshots: Vec<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 || self.degree > 4 {
            return Err(Error::InvalidConfig(format!(
                "degree must be between 1 and 4, got {}",
                self.degree
            )));
        }
        if self.elements < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 elements, got {}",
                self.elements
            )));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tf > self.t0) {
            return Err(Error::InvalidConfig(format!(
                "tf ({}) must exceed t0 ({})",
                self.tf, self.t0
            )));
        }
        let span = self.tf - self.t0;
        let steps = (span / self.dt).round();
        if steps < 1.0 || (steps * self.dt - span).abs() > TIME_MATCH_TOL * span.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "dt {} does not divide the interval [{}, {}]",
                self.dt, self.t0, self.tf
            )));
        }
        if self.mesh_mode == MeshMode::Moving {
            if !self.tau.is_finite() || self.tau <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "tau must be positive, got {}",
                    self.tau
                )));
            }
            if self.mmpde_sub_steps < 1 {
                return Err(Error::InvalidConfig("mmpde_sub_steps must be at least 1".into()));
            }
        }
        if !self.sigma_scale.is_finite() || self.sigma_scale <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "sigma_scale must be positive, got {}",
                self.sigma_scale
            )));
        }
        let tol = TIME_MATCH_TOL * span.max(1.0);
        for pair in self.snapshots.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidConfig(format!(
                    "snapshot times must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        for &s in &self.snapshots {
            if s < self.t0 - tol || s > self.tf + tol {
                return Err(Error::InvalidConfig(format!(
                    "snapshot time {s} lies outside [{}, {}]",
                    self.t0, self.tf
                )));
            }
            let m = ((s - self.t0) / self.dt).round();
            if (self.t0 + m * self.dt - s).abs() > tol {
                return Err(Error::InvalidConfig(format!(
                    "snapshot time {s} is not a multiple of dt {}",
                    self.dt
                )));
            }
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        ((self.tf - self.t0) / self.dt).round() as usize
    }
}

/// Full solution stored at one requested time.
pub struct Snapshot {
    pub t: f64,
    pub solution: DgSolution,
    /// L2 error against the exact solution, when the problem has one.
    pub l2_error: Option<f64>,
}

/// Per-step scalars; the mesh-motion fields stay zero on fixed runs.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics {
    pub t: f64,
    pub newton_iterations_first: usize,
    /// Iterations of the re-solve on the moved mesh; `None` on fixed runs.
    pub newton_iterations_second: Option<usize>,
    pub equidistribution_residual: f64,
    /// |∫u after transfer − ∫u before| over one step's mesh update.
    pub mass_drift: f64,
}

/// How a run ended. An aborted run still carries everything accumulated up
/// to the failing step, so partial results stay inspectable.
#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Completed,
    Aborted { step: usize, t: f64, reason: String },
}

impl RunOutcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunOutcome::Completed)
    }
}

pub struct RunRecord {
    pub config: RunConfig,
    pub outcome: RunOutcome,
    /// `t0` followed by every accepted step time.
    pub times: Vec<f64>,
    /// Mesh nodes at each entry of `times`; row 0 is the starting mesh
    /// (pre-adapted on moving runs, uniform on fixed ones).
    pub trajectory: Vec<Vec<f64>>,
    pub steps: Vec<StepDiagnostics>,
    pub snapshots: Vec<Snapshot>,
    /// (t, E) at `t0` and after every step; empty without a potential.
    pub energy: Vec<(f64, f64)>,
    /// Densely sampled range of the initial solution.
    pub ic_range: (f64, f64),
    /// Densely sampled range of the solution over the accepted steps.
    pub value_range: (f64, f64),
}

/// Runs the configured experiment. Setup problems (bad config, unknown
/// problem, failed initial adaptation) are `Err`; a solver failure mid-run
/// returns `Ok` with [`RunOutcome::Aborted`] and the data accepted so far,
/// never a silently patched-over continuation.
pub fn run(config: &RunConfig) -> Result<RunRecord> {
    let problem = by_id(&config.problem)?;
    run_with_problem(config, &problem)
}

/// Like [`run`] but with a caller-supplied problem (convergence studies use
/// parameter variants that are not in the catalog).
pub fn run_with_problem(config: &RunConfig, problem: &ProblemSpec) -> Result<RunRecord> {
    config.validate()?;

    let mmpde_cfg = MmpdeConfig {
        tau: config.tau,
        dt: config.dt,
        sub_steps: config.mmpde_sub_steps,
        stencil: config.mmpde_stencil,
    };
    let mesh = match config.mesh_mode {
        MeshMode::Fixed => PhysicalMesh::uniform(problem.x_l(), problem.x_r(), config.elements)?,
        MeshMode::Moving => adapt_initial_mesh(problem, config, &mmpde_cfg)?,
    };
    let mut u = project_initial(problem, &mesh, config.degree, config.t0)?;
    let mut mesh = mesh;

    let quad = QuadratureRule::for_degree(config.degree);
    let span = (config.tf - config.t0).max(1.0);
    let time_tol = TIME_MATCH_TOL * span;
    let steps = config.step_count();

    let ic_range = sampled_range(&u, (f64::INFINITY, f64::NEG_INFINITY));
    let mut value_range = ic_range;
    let mut times = Vec::with_capacity(steps + 1);
    let mut trajectory = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps);
    let mut snapshots = Vec::new();
    let mut energies = Vec::new();

    times.push(config.t0);
    trajectory.push(mesh.nodes().to_vec());
    if let Some(e) = energy(&u, problem) {
        energies.push((config.t0, e));
    }
    let mut next_snapshot = 0;
    record_snapshot(
        &mut snapshots,
        &mut next_snapshot,
        config,
        problem,
        &u,
        config.t0,
        time_tol,
    );

    let mut abort: Option<(usize, f64, String)> = None;

    'steps: for j in 1..=steps {
        let t_new = config.t0 + j as f64 * config.dt;
        let sys = assemble_system(&mesh, config.degree, problem, config.sigma_scale, t_new);
        let (u_tilde, first) =
            backward_euler_step(&u, problem, config.dt, &sys, &config.newton)?;
        if !first.converged {
            abort = Some((j, t_new, newton_reason(&first)));
            break 'steps;
        }

        let (u_new, diag) = match config.mesh_mode {
            MeshMode::Fixed => (
                u_tilde,
                StepDiagnostics {
                    t: t_new,
                    newton_iterations_first: first.iterations,
                    newton_iterations_second: None,
                    equidistribution_residual: 0.0,
                    mass_drift: 0.0,
                },
            ),
            MeshMode::Moving => {
                let nodal = u_tilde.nodal_values();
                let rho = density(config.monitor, &nodal, &mesh)?;
                let rho = smooth_density(&rho, config.smooth_sweeps);
                let new_mesh = match mmpde_step(&mesh, &rho, &mmpde_cfg) {
                    Ok(m) => m,
                    Err(e) => {
                        abort = Some((j, t_new, format!("mesh update: {e}")));
                        break 'steps;
                    }
                };
                let equi = equidistribution_residual(&new_mesh, rho.values());
                let u_interp = interpolate_solution(&u, &new_mesh)?;
                let mass_drift = (u_interp.integral(&quad) - u.integral(&quad)).abs();
                let sys_new =
                    assemble_system(&new_mesh, config.degree, problem, config.sigma_scale, t_new);
                let (u_new, second) =
                    backward_euler_step(&u_interp, problem, config.dt, &sys_new, &config.newton)?;
                if !second.converged {
                    abort = Some((j, t_new, newton_reason(&second)));
                    break 'steps;
                }
                mesh = new_mesh;
                (
                    u_new,
                    StepDiagnostics {
                        t: t_new,
                        newton_iterations_first: first.iterations,
                        newton_iterations_second: Some(second.iterations),
                        equidistribution_residual: equi,
                        mass_drift,
                    },
                )
            }
        };

        u = u_new;
        value_range = sampled_range(&u, value_range);
        times.push(t_new);
        trajectory.push(mesh.nodes().to_vec());
        diagnostics.push(diag);
        if let Some(e) = energy(&u, problem) {
            energies.push((t_new, e));
        }
        record_snapshot(
            &mut snapshots,
            &mut next_snapshot,
            config,
            problem,
            &u,
            t_new,
            time_tol,
        );
    }

    let outcome = match abort {
        None => RunOutcome::Completed,
        Some((step, t, reason)) => RunOutcome::Aborted { step, t, reason },
    };
    Ok(RunRecord {
        config: config.clone(),
        outcome,
        times,
        trajectory,
        steps: diagnostics,
        snapshots,
        energy: energies,
        ic_range,
        value_range,
    })
}

fn newton_reason(report: &StepReport) -> String {
    format!(
        "Newton residual {:.3e} after {} iterations",
        report.final_residual, report.iterations
    )
}

fn record_snapshot(
    snapshots: &mut Vec<Snapshot>,
    next: &mut usize,
    config: &RunConfig,
    problem: &ProblemSpec,
    u: &DgSolution,
    t: f64,
    tol: f64,
) {
    while *next < config.snapshots.len() && config.snapshots[*next] <= t + tol {
        if (config.snapshots[*next] - t).abs() <= tol {
            snapshots.push(Snapshot {
                t,
                solution: u.clone(),
                l2_error: l2_error(u, problem, t),
            });
        }
        *next += 1;
    }
}

/// Relax a uniform mesh against the initial data until the node positions
/// stop changing, so the first time step starts from an adapted mesh.
fn adapt_initial_mesh(
    problem: &ProblemSpec,
    config: &RunConfig,
    mmpde_cfg: &MmpdeConfig,
) -> Result<PhysicalMesh> {
    let mut mesh = PhysicalMesh::uniform(problem.x_l(), problem.x_r(), config.elements)?;
    let tol = 1e-12 * mesh.length();
    for _ in 0..ADAPT_MAX_ITERATIONS {
        let nodal: Vec<f64> = mesh
            .nodes()
            .iter()
            .map(|&x| problem.initial(x, config.t0))
            .collect();
        let rho = density(config.monitor, &nodal, &mesh)?;
        let rho = smooth_density(&rho, config.smooth_sweeps);
        let new_mesh = mmpde_step(&mesh, &rho, mmpde_cfg).map_err(|e| Error::MeshUpdateFailed {
            step: 0,
            t: config.t0,
            reason: format!("initial adaptation: {e}"),
        })?;
        let moved = mesh
            .nodes()
            .iter()
            .zip(new_mesh.nodes())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        mesh = new_mesh;
        if moved <= tol {
            break;
        }
    }
    Ok(mesh)
}

/// L2 norm of u − u_exact over the mesh, when an exact solution exists.
pub fn l2_error(u: &DgSolution, problem: &ProblemSpec, t: f64) -> Option<f64> {
    if !problem.has_exact() {
        return None;
    }
    let rule = QuadratureRule::gauss_legendre(QuadratureRule::for_degree(u.degree()).len() + 3);
    let mesh = u.mesh();
    let mut total = 0.0;
    for n in 0..mesh.n_elements() {
        let (a, _) = mesh.element(n);
        let h = mesh.size(n);
        for (&p, &w) in rule.points().iter().zip(rule.weights()) {
            let x = a + p * h;
            let diff = u.eval_local(n, p) - problem.exact(x, t).unwrap();
            total += w * h * diff * diff;
        }
    }
    Some(total.sqrt())
}

/// Broken energy Σ ∫ (ε/2)u_x² + F(u), when the problem has a potential F.
pub fn energy(u: &DgSolution, problem: &ProblemSpec) -> Option<f64> {
    if !problem.has_potential() {
        return None;
    }
    let rule = QuadratureRule::gauss_legendre(QuadratureRule::for_degree(u.degree()).len() + 3);
    let eps = problem.epsilon();
    let mesh = u.mesh();
    let mut total = 0.0;
    for n in 0..mesh.n_elements() {
        let h = mesh.size(n);
        for (&p, &w) in rule.points().iter().zip(rule.weights()) {
            let ux = u.eval_local_deriv(n, p);
            let val = u.eval_local(n, p);
            total += w * h * (0.5 * eps * ux * ux + problem.potential(val).unwrap());
        }
    }
    Some(total)
}

/// Leftmost x where the solution crosses `level`. Within an element the
/// crossing is found by sampling and bisection; a sign change across an
/// element interface locates the crossing at the shared node.
pub fn front_location(u: &DgSolution, level: f64) -> Option<f64> {
    const SAMPLES: usize = 16;
    let mesh = u.mesh();
    for n in 0..mesh.n_elements() {
        let (a, b) = mesh.element(n);
        let h = mesh.size(n);
        let mut t_prev = 0.0;
        let mut g_prev = u.eval_local(n, 0.0) - level;
        if g_prev == 0.0 {
            return Some(a);
        }
        for s in 1..=SAMPLES {
            let t = s as f64 / SAMPLES as f64;
            let g = u.eval_local(n, t) - level;
            if g == 0.0 {
                return Some(a + t * h);
            }
            if g_prev * g < 0.0 {
                let t_root = bisect(|t| u.eval_local(n, t) - level, t_prev, t, 1e-10 / h.max(1e-300));
                return Some(a + t_root * h);
            }
            t_prev = t;
            g_prev = g;
        }
        // Jump crossing at the interface with the next element.
        if n + 1 < mesh.n_elements() {
            let right = u.eval_local(n + 1, 0.0) - level;
            if g_prev * right < 0.0 {
                return Some(b);
            }
        }
    }
    None
}

/// Bisection on [lo, hi] assuming a sign change; `tol` is in reference
/// coordinates so the physical crossing is resolved to about 1e-10.
fn bisect(mut g: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut g_lo = g(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if g_lo * g_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    0.5 * (lo + hi)
}

fn sampled_range(u: &DgSolution, seed: (f64, f64)) -> (f64, f64) {
    let (mut lo, mut hi) = seed;
    for n in 0..u.mesh().n_elements() {
        for s in 0..=RANGE_SAMPLES {
            let v = u.eval_local(n, s as f64 / RANGE_SAMPLES as f64);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}
