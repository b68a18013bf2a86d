//! Problem definitions: the PDE right-hand side, boundary and initial data,
//! and (when available) the exact traveling-wave solution.
//!
//! All problems share the form `u_t = eps * u_xx - f(u, u_x)` on an interval
//! with Dirichlet data at both ends.

use crate::error::{Error, Result};

type Fn2 = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Fn1 = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A concrete PDE instance. The nonlinear term `f` is queried pointwise with
/// `(u, u_x)`; its partial derivatives feed the Newton Jacobian. Boundary
/// data may depend on time (traveling waves enter through a boundary).
pub struct ProblemSpec {
    pub(crate) name: &'static str,
    pub(crate) x_l: f64,
    pub(crate) x_r: f64,
    pub(crate) epsilon: f64,
    pub(crate) f: Fn2,
    pub(crate) df_du: Fn2,
    pub(crate) df_dux: Fn2,
    pub(crate) boundary: Fn1e2,
    pub(crate) u0: Fn1,
    pub(crate) exact: Option<Fn2>,
    pub(crate) potential: Option<Fn1>,
}

type Fn1e2 = Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn x_l(&self) -> f64 {
        self.x_l
    }

    pub fn x_r(&self) -> f64 {
        self.x_r
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn f(&self, u: f64, ux: f64) -> f64 {
        (self.f)(u, ux)
    }

    pub fn df_du(&self, u: f64, ux: f64) -> f64 {
        (self.df_du)(u, ux)
    }

    pub fn df_dux(&self, u: f64, ux: f64) -> f64 {
        (self.df_dux)(u, ux)
    }

    /// Dirichlet values `(u_L, u_R)` at time `t`.
    pub fn boundary_values(&self, t: f64) -> (f64, f64) {
        (self.boundary)(t)
    }

    /// Initial profile at the run's start time: the exact solution sampled
    /// at `t0` when one exists, otherwise the fixed initial condition.
    pub fn initial(&self, x: f64, t0: f64) -> f64 {
        match &self.exact {
            Some(e) => e(x, t0),
            None => (self.u0)(x),
        }
    }

    pub fn exact(&self, x: f64, t: f64) -> Option<f64> {
        self.exact.as_ref().map(|e| e(x, t))
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Free-energy density `F` with `F' = f(., 0)`, when defined.
    pub fn potential(&self, u: f64) -> Option<f64> {
        self.potential.as_ref().map(|p| p(u))
    }

    pub fn has_potential(&self) -> bool {
        self.potential.is_some()
    }

    /// Finite-difference check that `df_du`/`df_dux` really are the partial
    /// derivatives of `f`, over a fixed sample grid. Guards against sign
    /// slips in hand-coded Jacobian terms.
    pub fn check_derivative_consistency(&self) -> Result<()> {
        let us = [-0.8, -0.3, 0.0, 0.2, 0.5, 0.9, 1.1];
        let uxs = [-2.0, -0.5, 0.0, 1.0, 3.0];
        let d = 1e-6;
        for &u in &us {
            for &ux in &uxs {
                let fd_u = (self.f(u + d, ux) - self.f(u - d, ux)) / (2.0 * d);
                let fd_ux = (self.f(u, ux + d) - self.f(u, ux - d)) / (2.0 * d);
                let au = self.df_du(u, ux);
                let aux = self.df_dux(u, ux);
                if (fd_u - au).abs() > 1e-4 * (1.0 + au.abs())
                    || (fd_ux - aux).abs() > 1e-4 * (1.0 + aux.abs())
                {
                    return Err(Error::InvalidConfig(format!(
                        "problem '{}': derivative mismatch at (u, u_x) = ({u}, {ux})",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Finite-difference check that the stored potential satisfies
    /// `F'(u) = f(u, 0)`.
    pub fn check_potential_consistency(&self) -> Result<()> {
        let p = match &self.potential {
            Some(p) => p,
            None => return Ok(()),
        };
        let d = 1e-6;
        for i in 0..=20 {
            let u = -0.5 + i as f64 * 0.1;
            let fd = (p(u + d) - p(u - d)) / (2.0 * d);
            let want = self.f(u, 0.0);
            if (fd - want).abs() > 1e-4 * (1.0 + want.abs()) {
                return Err(Error::InvalidConfig(format!(
                    "problem '{}': potential is not an antiderivative of f at u = {u}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Viscous Burgers' equation on `[0, 1]`: `f = u u_x`, `eps = 1e-4`,
/// homogeneous boundary data, steepening sine initial profile. No exact
/// solution is tracked.
pub fn burgers() -> ProblemSpec {
    use std::f64::consts::PI;
    let spec = ProblemSpec {
        name: "burgers",
        x_l: 0.0,
        x_r: 1.0,
        epsilon: 1e-4,
        f: Box::new(|u, ux| u * ux),
        df_du: Box::new(|_, ux| ux),
        df_dux: Box::new(|u, _| u),
        boundary: Box::new(|_| (0.0, 0.0)),
        u0: Box::new(|x| (2.0 * PI * x).sin() + 0.5 * (PI * x).sin()),
        exact: None,
        potential: None,
    };
    spec.check_derivative_consistency()
        .expect("catalog constants");
    spec
}

/// Burgers'-Fisher equation on `[-1, 0]`: advection plus logistic reaction,
/// `f = a u u_x + b u (u - 1)` with `a = 24` and `b = (2 a c - a^2)/4 = -48`
/// for wave speed `c = 8`. The exact front
/// `u = (1 - tanh((a/4)(x - c t)))/2` enters through the left boundary on
/// the time window of interest.
pub fn burgers_fisher() -> ProblemSpec {
    let a = 24.0;
    let c = 8.0;
    let b = (2.0 * a * c - a * a) / 4.0;
    let exact = move |x: f64, t: f64| 0.5 * (1.0 - ((a / 4.0) * (x - c * t)).tanh());
    let spec = ProblemSpec {
        name: "burgers-fisher",
        x_l: -1.0,
        x_r: 0.0,
        epsilon: 1.0,
        f: Box::new(move |u, ux| a * u * ux + b * u * (u - 1.0)),
        df_du: Box::new(move |u, ux| a * ux + b * (2.0 * u - 1.0)),
        df_dux: Box::new(move |u, _| a * u),
        boundary: Box::new(move |t| (exact(-1.0, t), exact(0.0, t))),
        u0: Box::new(move |x| exact(x, -0.2)),
        exact: Some(Box::new(exact)),
        potential: None,
    };
    spec.check_derivative_consistency()
        .expect("catalog constants");
    spec
}

/// Bistable reaction-diffusion front with configurable stiffness:
/// `f = u (u - 1) (u - beta) / delta` on `[0, 1]`, diffusion `eps`. Carries
/// the exact front `u = (1 - tanh((x - c t)/q))/2` with `q = sqrt(8 eps
/// delta)` and speed `c = (1 - 2 beta) sqrt(eps / (2 delta))`, plus the
/// free-energy density `F(u) = u^2 (3 u^2 - 4 (1 + beta) u + 6 beta) /
/// (12 delta)`.
pub fn schlogl_with(epsilon: f64, delta: f64, beta: f64) -> Result<ProblemSpec> {
    if !(epsilon > 0.0 && delta > 0.0) {
        return Err(Error::InvalidConfig(
            "bistable problem needs positive epsilon and delta".into(),
        ));
    }
    let q = (8.0 * epsilon * delta).sqrt();
    let c = (1.0 - 2.0 * beta) * (epsilon / (2.0 * delta)).sqrt();
    let exact = move |x: f64, t: f64| 0.5 * (1.0 - ((x - c * t) / q).tanh());
    let spec = ProblemSpec {
        name: "schlogl",
        x_l: 0.0,
        x_r: 1.0,
        epsilon,
        f: Box::new(move |u, _| u * (u - 1.0) * (u - beta) / delta),
        df_du: Box::new(move |u, _| (3.0 * u * u - 2.0 * (1.0 + beta) * u + beta) / delta),
        df_dux: Box::new(|_, _| 0.0),
        boundary: Box::new(move |t| (exact(0.0, t), exact(1.0, t))),
        u0: Box::new(move |x| exact(x, 0.0)),
        exact: Some(Box::new(exact)),
        potential: Some(Box::new(move |u| {
            u * u * (3.0 * u * u - 4.0 * (1.0 + beta) * u + 6.0 * beta) / (12.0 * delta)
        })),
    };
    spec.check_derivative_consistency()?;
    spec.check_potential_consistency()?;
    Ok(spec)
}

/// The stiff bistable front used in the experiments:
/// `eps = delta = 1e-3`, `beta = 0`, wave speed `sqrt(1/2)`.
pub fn schlogl() -> ProblemSpec {
    schlogl_with(1e-3, 1e-3, 0.0).expect("catalog constants")
}

/// Catalog lookup by CLI identifier.
pub fn by_id(id: &str) -> Result<ProblemSpec> {
    match id {
        "burgers" => Ok(burgers()),
        "burgers-fisher" => Ok(burgers_fisher()),
        "schlogl" => Ok(schlogl()),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_pointwise() {
        let p = burgers();
        assert_eq!(p.f(2.0, 3.0), 6.0);
        assert_eq!(p.df_du(2.0, 3.0), 3.0);
        assert_eq!(p.df_dux(2.0, 3.0), 2.0);
        // u0 vanishes at both ends (up to sin(2*pi) round-off).
        assert!((p.initial(0.0, 0.0)).abs() < 1e-13);
        assert!((p.initial(1.0, 0.0)).abs() < 1e-13);
        let x = 0.25;
        let want = (2.0 * std::f64::consts::PI * x).sin() + 0.5 * (std::f64::consts::PI * x).sin();
        assert!((p.initial(x, 0.0) - want).abs() < 1e-15);
        assert_eq!(p.boundary_values(0.37), (0.0, 0.0));
        assert!(!p.has_exact());
        assert!(!p.has_potential());
    }

    #[test]
    fn burgers_fisher_wave_shape() {
        let p = burgers_fisher();
        // On the wave crest x = c t the profile is exactly 1/2.
        for &t in &[-0.2, -0.1, -0.05, 0.0] {
            let x = 8.0 * t;
            if x >= -1.0 && x <= 0.0 {
                assert!((p.exact(x, t).unwrap() - 0.5).abs() < 1e-14);
            }
        }
        // Far behind the front the state is 1, far ahead it is 0. At the
        // left wall the argument is only tanh(-6), hence the loose bound.
        assert!((p.exact(-1.0, 0.0).unwrap() - 1.0).abs() < 1e-5);
        assert!(p.exact(0.0, -0.2).unwrap() < 1e-8);
    }

    #[test]
    fn burgers_fisher_satisfies_its_pde() {
        // Independent residual oracle with closed-form tanh derivatives:
        // u = (1 - tanh(s))/2, s = (a/4)(x - c t) gives
        // u_x = -(a/8) sech^2, u_t = (a c / 8) sech^2,
        // u_xx = (a^2/16) sech^2 tanh.
        let p = burgers_fisher();
        let (a, c) = (24.0, 8.0);
        let mut worst = 0.0f64;
        for i in 0..100 {
            let x = -1.0 + (i as f64 + 0.3) / 100.0;
            let t = -0.2 + 0.199 * ((i * 7 % 100) as f64) / 100.0;
            let s = (a / 4.0) * (x - c * t);
            let sech2 = 1.0 / s.cosh().powi(2);
            let u = 0.5 * (1.0 - s.tanh());
            let ux = -(a / 8.0) * sech2;
            let ut = (a * c / 8.0) * sech2;
            let uxx = (a * a / 16.0) * sech2 * s.tanh();
            let res = ut - p.epsilon() * uxx + p.f(u, ux);
            worst = worst.max(res.abs());
            assert!((p.exact(x, t).unwrap() - u).abs() < 1e-14);
        }
        assert!(worst < 1e-8, "worst residual {worst:.3e}");
    }

    #[test]
    fn burgers_fisher_residual_finite_differences() {
        // Secondary check without closed-form derivatives. The wave speed
        // amplifies the u_t truncation error by c^3, so the step must be
        // small; round-off in the second difference stays near 1e-7.
        let p = burgers_fisher();
        let h = 3e-5;
        let u = |x: f64, t: f64| p.exact(x, t).unwrap();
        for &(x, t) in &[(-0.45, -0.05), (-0.81, -0.1), (-0.2, -0.02)] {
            let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
            let ux = (u(x + h, t) - u(x - h, t)) / (2.0 * h);
            let uxx = (u(x + h, t) - 2.0 * u(x, t) + u(x - h, t)) / (h * h);
            let res = ut - p.epsilon() * uxx + p.f(u(x, t), ux);
            assert!(res.abs() < 1e-4, "residual {res:.3e} at ({x}, {t})");
        }
    }

    #[test]
    fn schlogl_front_and_speed() {
        let p = schlogl();
        let c = (0.5f64).sqrt();
        // Crest at x = c t.
        for &t in &[0.0, 0.4, 1.0] {
            let x = c * t;
            if x <= 1.0 {
                assert!((p.exact(x, t).unwrap() - 0.5).abs() < 1e-14);
            }
        }
        // f has roots at 0, beta = 0 and 1.
        assert_eq!(p.f(0.0, 0.0), 0.0);
        assert_eq!(p.f(1.0, 0.0), 0.0);
        // Stiffness scale: f(0.5) = 0.5 * (-0.5) * 0.5 * 1000 = -125.
        assert!((p.f(0.5, 0.0) + 125.0).abs() < 1e-10);
    }

    #[test]
    fn schlogl_satisfies_its_pde() {
        // u = (1 - tanh(s))/2 with s = (x - c t)/q:
        // u_t = (c/(2q)) sech^2, u_x = -1/(2q) sech^2,
        // u_xx = (1/q^2) sech^2 tanh. Closed forms keep the oracle sharp even
        // though individual terms are O(100).
        let p = schlogl();
        let q = (8.0 * 1e-3 * 1e-3f64).sqrt();
        let c = (0.5f64).sqrt();
        let mut worst = 0.0f64;
        for i in 0..200 {
            let t = (i as f64 + 0.5) / 200.0;
            // Sample near the front where the terms are largest.
            let x = (c * t + q * ((i % 13) as f64 - 6.0)).clamp(0.0, 1.0);
            let s = (x - c * t) / q;
            let sech2 = 1.0 / s.cosh().powi(2);
            let u = 0.5 * (1.0 - s.tanh());
            let ux = -sech2 / (2.0 * q);
            let ut = c * sech2 / (2.0 * q);
            let uxx = sech2 * s.tanh() / (q * q);
            let res = ut - p.epsilon() * uxx + p.f(u, ux);
            worst = worst.max(res.abs());
        }
        assert!(worst < 1e-8, "worst residual {worst:.3e}");
    }

    #[test]
    fn schlogl_potential_value_and_consistency() {
        let p = schlogl();
        // F(1) = (3 - 4)/(12 * 1e-3) = -1000/12.
        let f1 = p.potential(1.0).unwrap();
        assert!((f1 + 1000.0 / 12.0).abs() < 1e-9);
        assert_eq!(p.potential(0.0).unwrap(), 0.0);
        p.check_potential_consistency().unwrap();
    }

    #[test]
    fn schlogl_with_rejects_bad_parameters() {
        assert!(schlogl_with(0.0, 1e-3, 0.0).is_err());
        assert!(schlogl_with(1e-3, -1.0, 0.0).is_err());
    }

    #[test]
    fn smooth_variant_satisfies_its_pde() {
        // The eps = delta = 0.1 variant used by the convergence studies.
        let p = schlogl_with(0.1, 0.1, 0.0).unwrap();
        let q = (8.0 * 0.1 * 0.1f64).sqrt();
        let c = (0.5f64).sqrt();
        for i in 0..50 {
            let t = i as f64 / 50.0;
            let x = (c * t).clamp(0.0, 1.0) * 0.9;
            let s = (x - c * t) / q;
            let sech2 = 1.0 / s.cosh().powi(2);
            let u = 0.5 * (1.0 - s.tanh());
            let ux = -sech2 / (2.0 * q);
            let ut = c * sech2 / (2.0 * q);
            let uxx = sech2 * s.tanh() / (q * q);
            let res = ut - p.epsilon() * uxx + p.f(u, ux);
            assert!(res.abs() < 1e-10, "residual {res:.3e}");
        }
    }

    #[test]
    fn catalog_lookup() {
        assert_eq!(by_id("burgers").unwrap().name(), "burgers");
        assert_eq!(by_id("burgers-fisher").unwrap().name(), "burgers-fisher");
        assert_eq!(by_id("schlogl").unwrap().name(), "schlogl");
        assert!(matches!(by_id("kdv"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn all_catalog_derivatives_consistent() {
        for id in ["burgers", "burgers-fisher", "schlogl"] {
            by_id(id).unwrap().check_derivative_consistency().unwrap();
        }
    }
}
