//! Backward Euler time stepping with a damped Newton solve.
//!
//! One step solves `M (v - v_prev)/dt + S v + h(v) - d = 0` for the new
//! coefficients `v`. Newton works on the residual scaled by `dt`,
//!
//! ```text
//!   R(v) = M (v - v_prev) + dt (S v + h(v) - d),
//! ```
//!
//! so the convergence tolerance has the same meaning at every step size.
//! Updates are damped by backtracking. Damping can sink into a local
//! minimum of `|R|` with the root on the far side (under-resolved
//! convection fronts make these real), so a failed damped solve is retried
//! once from the initial guess with undamped iterations, which cross over
//! where every shortened step is rejected.

use crate::assembly::{assemble_nonlinear, assemble_nonlinear_jacobian, SystemMatrices};
use crate::error::Result;
use crate::linalg::Banded;
use crate::problems::ProblemSpec;
use crate::solution::DgSolution;

#[derive(Clone, Copy, Debug)]
pub struct NewtonConfig {
    /// Convergence threshold on the max-norm of the scaled residual.
    pub tol_residual: f64,
    pub max_iterations: usize,
    /// Step-halving attempts per iteration before the damped solve fails
    /// and the undamped retry takes over.
    pub max_halvings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_iterations: 25,
            max_halvings: 8,
        }
    }
}

/// What one implicit solve did. `iterations == 0` means the initial guess
/// already satisfied the tolerance.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// Max-norm residual before each update, then after the last one.
    /// Decreasing except at full-step escapes, where it may jump up.
    pub residual_history: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Scaled backward Euler residual at `v`.
fn residual(
    v: &DgSolution,
    v_prev: &[f64],
    dt: f64,
    sys: &SystemMatrices,
    problem: &ProblemSpec,
) -> Result<Vec<f64>> {
    let h = assemble_nonlinear(v, problem)?;
    let sv = sys.stiffness.matvec(v.coeffs());
    let dv: Vec<f64> = v.coeffs().iter().zip(v_prev).map(|(a, b)| a - b).collect();
    let mdv = sys.mass.matvec(&dv);
    Ok((0..v.coeffs().len())
        .map(|i| mdv[i] + dt * (sv[i] + h[i] - sys.load[i]))
        .collect())
}

/// Damped Newton: each update is backtracked until the residual norm
/// strictly drops. Fails when no halving helps or the budget runs out.
fn damped_solve(
    u_prev: &DgSolution,
    problem: &ProblemSpec,
    dt: f64,
    sys: &SystemMatrices,
    base: &Banded,
    cfg: &NewtonConfig,
) -> Result<(DgSolution, StepReport)> {
    let prev = u_prev.coeffs().to_vec();
    let mut v = u_prev.clone();
    let mut r = residual(&v, &prev, dt, sys, problem)?;
    let mut rnorm = inf_norm(&r);
    let mut history = vec![rnorm];

    for iter in 0..cfg.max_iterations {
        if rnorm <= cfg.tol_residual {
            return Ok((
                v,
                StepReport {
                    iterations: iter,
                    final_residual: rnorm,
                    converged: true,
                    residual_history: history,
                },
            ));
        }

        let jac = assemble_nonlinear_jacobian(&v, problem)?;
        let mut a: Banded = base.clone();
        a.add_scaled(&jac, dt);
        let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = a.factor()?.solve(&neg_r);

        // Backtracking: halve until the residual norm actually drops.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=cfg.max_halvings {
            let mut trial = v.clone();
            for (t, d) in trial.coeffs_mut().iter_mut().zip(&delta) {
                *t += lambda * d;
            }
            let r_trial = residual(&trial, &prev, dt, sys, problem)?;
            let n_trial = inf_norm(&r_trial);
            if n_trial < rnorm {
                v = trial;
                r = r_trial;
                rnorm = n_trial;
                history.push(rnorm);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Ok((
                v,
                StepReport {
                    iterations: iter + 1,
                    final_residual: rnorm,
                    converged: false,
                    residual_history: history,
                },
            ));
        }
    }

    let converged = rnorm <= cfg.tol_residual;
    Ok((
        v,
        StepReport {
            iterations: cfg.max_iterations,
            final_residual: rnorm,
            converged,
            residual_history: history,
        },
    ))
}

/// Undamped Newton retry: full steps only, abandoned if the residual stops
/// being finite. Reaches roots whose basin the damped iteration walls off.
fn undamped_solve(
    u_prev: &DgSolution,
    problem: &ProblemSpec,
    dt: f64,
    sys: &SystemMatrices,
    base: &Banded,
    cfg: &NewtonConfig,
) -> Result<(DgSolution, StepReport)> {
    let prev = u_prev.coeffs().to_vec();
    let mut v = u_prev.clone();
    let mut r = residual(&v, &prev, dt, sys, problem)?;
    let mut rnorm = inf_norm(&r);
    let mut history = vec![rnorm];

    for iter in 0..cfg.max_iterations {
        if rnorm <= cfg.tol_residual {
            return Ok((
                v,
                StepReport {
                    iterations: iter,
                    final_residual: rnorm,
                    converged: true,
                    residual_history: history,
                },
            ));
        }

        let jac = assemble_nonlinear_jacobian(&v, problem)?;
        let mut a: Banded = base.clone();
        a.add_scaled(&jac, dt);
        let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = a.factor()?.solve(&neg_r);
        let mut trial = v.clone();
        for (t, d) in trial.coeffs_mut().iter_mut().zip(&delta) {
            *t += d;
        }
        let r_trial = residual(&trial, &prev, dt, sys, problem)?;
        let n_trial = inf_norm(&r_trial);
        if !n_trial.is_finite() {
            return Ok((
                v,
                StepReport {
                    iterations: iter + 1,
                    final_residual: rnorm,
                    converged: false,
                    residual_history: history,
                },
            ));
        }
        v = trial;
        r = r_trial;
        rnorm = n_trial;
        history.push(rnorm);
    }

    let converged = rnorm <= cfg.tol_residual;
    Ok((
        v,
        StepReport {
            iterations: cfg.max_iterations,
            final_residual: rnorm,
            converged,
            residual_history: history,
        },
    ))
}

/// Advances `u_prev` by one backward Euler step on its own mesh. `sys` must
/// be assembled on the same mesh, with the load vector already sampled at
/// the target time. Damped Newton runs first; if it fails, the step is
/// retried once with undamped iterations and the two residual histories
/// are concatenated. The returned report says whether Newton converged;
/// the caller decides whether that aborts the run.
pub fn backward_euler_step(
    u_prev: &DgSolution,
    problem: &ProblemSpec,
    dt: f64,
    sys: &SystemMatrices,
    cfg: &NewtonConfig,
) -> Result<(DgSolution, StepReport)> {
    assert!(dt > 0.0, "step size must be positive");
    assert_eq!(sys.mass.n(), u_prev.coeffs().len(), "mesh/system mismatch");

    // M + dt S is fixed across iterations; only the Jacobian of h moves.
    let mut base = sys.mass.clone();
    base.add_scaled(&sys.stiffness, dt);

    let (v, report) = damped_solve(u_prev, problem, dt, sys, &base, cfg)?;
    if report.converged {
        return Ok((v, report));
    }

    let (v2, retry) = undamped_solve(u_prev, problem, dt, sys, &base, cfg)?;
    let mut history = report.residual_history;
    history.extend(retry.residual_history);
    let merged = StepReport {
        iterations: report.iterations + retry.iterations,
        final_residual: retry.final_residual,
        converged: retry.converged,
        residual_history: history,
    };
    if merged.converged {
        Ok((v2, merged))
    } else {
        // Neither strategy converged: hand back the damped iterate, whose
        // residual is at least finite and small.
        Ok((
            v,
            StepReport {
                final_residual: report.final_residual,
                ..merged
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_system, dof_count, project_function};
    use crate::linalg::solve_banded;
    use crate::mesh::PhysicalMesh;
    use crate::problems::{self, ProblemSpec};

    fn diffusion_only(name: &'static str, epsilon: f64, u_l: f64, u_r: f64) -> ProblemSpec {
        ProblemSpec {
            name,
            x_l: 0.0,
            x_r: 1.0,
            epsilon,
            f: Box::new(|_, _| 0.0),
            df_du: Box::new(|_, _| 0.0),
            df_dux: Box::new(|_, _| 0.0),
            boundary: Box::new(move |_| (u_l, u_r)),
            u0: Box::new(|_| 0.0),
            exact: None,
            potential: None,
        }
    }

    #[test]
    fn discrete_steady_state_is_a_fixed_point() {
        // With f = 0 and v_prev solving S v = d, the step must return the
        // same state after zero iterations.
        let p = diffusion_only("steady", 0.5, 1.0, 3.0);
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 5).unwrap();
        let sys = assemble_system(&mesh, 2, &p, 10.0, 0.0);
        let steady = solve_banded(&sys.stiffness, &sys.load).unwrap();
        let u_prev = DgSolution::from_coeffs(mesh, 2, steady).unwrap();
        let (u_next, report) = backward_euler_step(
            &u_prev,
            &p,
            0.05,
            &sys,
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        for (a, b) in u_next.coeffs().iter().zip(u_prev.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_state_with_matching_data_is_a_fixed_point() {
        let p = diffusion_only("flat", 0.8, 2.0, 2.0);
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 4).unwrap();
        let sys = assemble_system(&mesh, 1, &p, 10.0, 0.0);
        let u_prev = DgSolution::interpolate(mesh, 1, |_| 2.0);
        let (u_next, report) =
            backward_euler_step(&u_prev, &p, 0.1, &sys, &NewtonConfig::default()).unwrap();
        assert!(report.converged && report.iterations <= 1);
        for &c in u_next.coeffs() {
            assert!((c - 2.0).abs() < 1e-11);
        }
    }

    #[test]
    fn linear_f_converges_in_one_iteration() {
        // With f linear in u the scaled residual is affine, so a single full
        // Newton update lands on the solution.
        let p = ProblemSpec {
            name: "linear-f",
            x_l: 0.0,
            x_r: 1.0,
            epsilon: 0.3,
            f: Box::new(|u, _| 2.0 * u),
            df_du: Box::new(|_, _| 2.0),
            df_dux: Box::new(|_, _| 0.0),
            boundary: Box::new(|_| (1.0, 1.0)),
            u0: Box::new(|_| 0.0),
            exact: None,
            potential: None,
        };
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 6).unwrap();
        let sys = assemble_system(&mesh, 2, &p, 10.0, 0.0);
        let u_prev = project_function(&mesh, 2, |x| 1.0 + 0.2 * (3.0 * x).sin()).unwrap();
        let (_, report) =
            backward_euler_step(&u_prev, &p, 0.01, &sys, &NewtonConfig::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn residual_history_decreases_monotonically() {
        let p = problems::schlogl_with(0.1, 0.1, 0.0).unwrap();
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 16).unwrap();
        let sys = assemble_system(&mesh, 2, &p, 10.0, 0.01);
        let u_prev = project_function(&mesh, 2, |x| p.initial(x, 0.0)).unwrap();
        let (_, report) =
            backward_euler_step(&u_prev, &p, 0.01, &sys, &NewtonConfig::default()).unwrap();
        assert!(report.converged);
        assert!(report.iterations >= 1);
        for w in report.residual_history.windows(2) {
            assert!(w[1] < w[0], "residual went up: {:?}", report.residual_history);
        }
    }

    #[test]
    fn stiff_nonlinearity_converges_within_budget() {
        let p = problems::schlogl();
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 40).unwrap();
        let sys = assemble_system(&mesh, 2, &p, 10.0, 1e-3);
        let u_prev = project_function(&mesh, 2, |x| p.initial(x, 0.0)).unwrap();
        let (u, report) =
            backward_euler_step(&u_prev, &p, 1e-3, &sys, &NewtonConfig::default()).unwrap();
        assert!(report.converged, "residual {:?}", report.final_residual);
        assert!(report.iterations <= 6, "took {}", report.iterations);
        assert!(u.coeffs().iter().all(|c| c.is_finite()));
    }

    #[test]
    fn sharp_front_convection_survives_by_retry_then_fails_honestly() {
        // Under-resolved convection (120 uniform cells against a diffusion
        // width of a few 1e-4) first traps damped Newton in a local minimum
        // of the residual norm; the undamped retry recovers the root there.
        // Two steps later the front steepens past 1/dt and the implicit
        // system stops having a reachable root at all, which must surface
        // as a non-converged report, not hang or panic.
        let p = problems::by_id("burgers").unwrap();
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 120).unwrap();
        let mut u = project_function(&mesh, 1, |x| p.initial(x, 0.0)).unwrap();
        let dt = 5e-3;
        let mut retried = false;
        for step in 1..=32 {
            let sys = assemble_system(u.mesh(), 1, &p, 10.0, dt * step as f64);
            let (next, report) =
                backward_euler_step(&u, &p, dt, &sys, &NewtonConfig::default()).unwrap();
            assert!(
                report.converged,
                "step {step} stalled at residual {:.3e}",
                report.final_residual
            );
            retried |= report.residual_history.windows(2).any(|w| w[1] >= w[0]);
            u = next;
        }
        assert!(retried, "expected at least one non-monotone recovery");

        let sys = assemble_system(u.mesh(), 1, &p, 10.0, dt * 33.0);
        let (_, report) =
            backward_euler_step(&u, &p, dt, &sys, &NewtonConfig::default()).unwrap();
        assert!(!report.converged, "the fold at t = 0.165 should be reported");
        assert!(report.final_residual.is_finite());
    }

    #[test]
    fn unsolvable_step_reports_failure() {
        // An absurdly large step with a hostile nonlinearity: Newton must
        // give up via the no-decrease exit rather than looping or panicking.
        let p = ProblemSpec {
            name: "hostile",
            x_l: 0.0,
            x_r: 1.0,
            epsilon: 1.0,
            f: Box::new(|u, _| (u * 50.0).exp()),
            df_du: Box::new(|u, _| 50.0 * (u * 50.0).exp()),
            df_dux: Box::new(|_, _| 0.0),
            boundary: Box::new(|_| (0.0, 0.0)),
            u0: Box::new(|_| 0.0),
            exact: None,
            potential: None,
        };
        let mesh = PhysicalMesh::uniform(0.0, 1.0, 4).unwrap();
        let sys = assemble_system(&mesh, 1, &p, 10.0, 0.0);
        let u_prev = DgSolution::interpolate(mesh, 1, |_| 1.0);
        let (_, report) =
            backward_euler_step(&u_prev, &p, 1e6, &sys, &NewtonConfig::default()).unwrap();
        assert!(!report.converged);
        assert!(dof_count(u_prev.mesh(), 1) == 8);
    }
}
