//! Assembly of the interior-penalty dG operators.
//!
//! For the semi-linear problem `u_t = eps u_xx - f(u, u_x)` the spatial
//! bilinear form is
//!
//! ```text
//!   a(u, v) = sum_n int_n eps u_x v_x
//!           + sum_faces ( -{eps u_x}[v] - {eps v_x}[u] + (sigma/h)[u][v] )
//! ```
//!
//! over all faces including the two boundary nodes, where `[.]` and `{.}`
//! are the jump and average with the single-trace boundary convention.
//! Dirichlet data enters through the load vector
//!
//! ```text
//!   l(v) = u_L ( eps v_x(x_L) + (sigma/h_1) v(x_L) )
//!        + u_R ( (sigma/h_N) v(x_R) - eps v_x(x_R) ),
//! ```
//!
//! the unique sign choice for which a constant solution with matching
//! boundary data satisfies `S u = d` exactly (pinned by a test below).

use crate::basis::{eval_basis, tabulate};
use crate::error::{Error, Result};
use crate::linalg::{solve_banded, Banded};
use crate::mesh::PhysicalMesh;
use crate::problems::ProblemSpec;
use crate::quadrature::QuadratureRule;
use crate::solution::DgSolution;

/// Penalty parameter `sigma = scale * eps * (k + 1)^2`; `scale = 10` is the
/// default used throughout.
pub fn penalty(epsilon: f64, degree: usize, sigma_scale: f64) -> f64 {
    sigma_scale * epsilon * ((degree + 1) * (degree + 1)) as f64
}

/// Total scalar unknowns for `degree` on `mesh`.
pub fn dof_count(mesh: &PhysicalMesh, degree: usize) -> usize {
    mesh.n_elements() * (degree + 1)
}

/// Scalar band half-width of the stiffness and Jacobian matrices: endpoint
/// dofs of adjacent elements couple, nothing further.
pub fn bandwidth(degree: usize) -> usize {
    2 * degree + 1
}

/// Mass, stiffness and load for one mesh and boundary-data snapshot.
pub struct SystemMatrices {
    pub mass: Banded,
    pub stiffness: Banded,
    pub load: Vec<f64>,
}

/// Block-diagonal mass matrix; exact for the quadrature rule in use.
pub fn assemble_mass(mesh: &PhysicalMesh, degree: usize) -> Banded {
    let rule = QuadratureRule::for_degree(degree);
    let table = tabulate(degree, &rule);
    let m = degree + 1;
    let bw = bandwidth(degree);
    let mut mass = Banded::new(dof_count(mesh, degree), bw, bw);
    for n in 0..mesh.n_elements() {
        let h = mesh.size(n);
        for (q, &w) in rule.weights().iter().enumerate() {
            let v = &table.values[q];
            for i in 0..m {
                for j in 0..m {
                    mass.add(n * m + i, n * m + j, h * w * v[i] * v[j]);
                }
            }
        }
    }
    mass
}

/// One mesh node viewed as a dG face: the dofs whose traces touch it, their
/// jump and derivative-average weights, and the local length scale used by
/// the penalty.
struct Face {
    dofs: Vec<usize>,
    jump: Vec<f64>,
    avg_deriv: Vec<f64>,
    h_loc: f64,
}

fn build_faces(mesh: &PhysicalMesh, degree: usize) -> Vec<Face> {
    let m = degree + 1;
    let k = degree;
    let (_, d_left) = eval_basis(degree, 0.0);
    let (_, d_right) = eval_basis(degree, 1.0);
    let ne = mesh.n_elements();
    let mut faces = Vec::with_capacity(ne + 1);
    for node in 0..=ne {
        let mut dofs = Vec::new();
        let mut jump = Vec::new();
        let mut avg_deriv = Vec::new();
        let h_loc;
        if node == 0 {
            // Only the right trace exists: [v] = -v^+, {v_x} = v_x^+.
            let h = mesh.size(0);
            h_loc = h;
            for i in 0..m {
                dofs.push(i);
                jump.push(if i == 0 { -1.0 } else { 0.0 });
                avg_deriv.push(d_left[i] / h);
            }
        } else if node == ne {
            // Only the left trace exists: [v] = v^-, {v_x} = v_x^-.
            let h = mesh.size(ne - 1);
            h_loc = h;
            for i in 0..m {
                dofs.push((ne - 1) * m + i);
                jump.push(if i == k { 1.0 } else { 0.0 });
                avg_deriv.push(d_right[i] / h);
            }
        } else {
            let hl = mesh.size(node - 1);
            let hr = mesh.size(node);
            h_loc = 0.5 * (hl + hr);
            for i in 0..m {
                dofs.push((node - 1) * m + i);
                jump.push(if i == k { 1.0 } else { 0.0 });
                avg_deriv.push(0.5 * d_right[i] / hl);
            }
            for i in 0..m {
                dofs.push(node * m + i);
                jump.push(if i == 0 { -1.0 } else { 0.0 });
                avg_deriv.push(0.5 * d_left[i] / hr);
            }
        }
        faces.push(Face {
            dofs,
            jump,
            avg_deriv,
            h_loc,
        });
    }
    faces
}

/// Stiffness matrix of the penalized form `a(., .)`.
pub fn assemble_stiffness(mesh: &PhysicalMesh, degree: usize, epsilon: f64, sigma: f64) -> Banded {
    let rule = QuadratureRule::for_degree(degree);
    let table = tabulate(degree, &rule);
    let m = degree + 1;
    let bw = bandwidth(degree);
    let mut s = Banded::new(dof_count(mesh, degree), bw, bw);

    for n in 0..mesh.n_elements() {
        let h = mesh.size(n);
        for (q, &w) in rule.weights().iter().enumerate() {
            let d = &table.derivs[q];
            // Physical derivatives carry 1/h each; the volume element h
            // cancels one of them.
            for i in 0..m {
                for j in 0..m {
                    s.add(n * m + i, n * m + j, epsilon * w * d[i] * d[j] / h);
                }
            }
        }
    }

    for face in build_faces(mesh, degree) {
        let pen = sigma / face.h_loc;
        for (p, &dp) in face.dofs.iter().enumerate() {
            for (r, &dr) in face.dofs.iter().enumerate() {
                let v = -epsilon
                    * (face.avg_deriv[r] * face.jump[p] + face.avg_deriv[p] * face.jump[r])
                    + pen * face.jump[p] * face.jump[r];
                s.add(dp, dr, v);
            }
        }
    }
    s
}

/// Load vector carrying the Dirichlet data `(u_l, u_r)`.
pub fn assemble_load(
    mesh: &PhysicalMesh,
    degree: usize,
    epsilon: f64,
    sigma: f64,
    u_l: f64,
    u_r: f64,
) -> Vec<f64> {
    let m = degree + 1;
    let k = degree;
    let ne = mesh.n_elements();
    let (_, d_left) = eval_basis(degree, 0.0);
    let (_, d_right) = eval_basis(degree, 1.0);
    let mut d = vec![0.0; dof_count(mesh, degree)];
    let h0 = mesh.size(0);
    for i in 0..m {
        let v0 = if i == 0 { 1.0 } else { 0.0 };
        d[i] += u_l * (epsilon * d_left[i] / h0 + sigma / h0 * v0);
    }
    let hn = mesh.size(ne - 1);
    for i in 0..m {
        let vn = if i == k { 1.0 } else { 0.0 };
        d[(ne - 1) * m + i] += u_r * (sigma / hn * vn - epsilon * d_right[i] / hn);
    }
    d
}

/// Mass, stiffness and load for `problem` at time `t` (boundary data are
/// sampled there), with the default penalty scaling rule.
pub fn assemble_system(
    mesh: &PhysicalMesh,
    degree: usize,
    problem: &ProblemSpec,
    sigma_scale: f64,
    t: f64,
) -> SystemMatrices {
    let epsilon = problem.epsilon();
    let sigma = penalty(epsilon, degree, sigma_scale);
    let (u_l, u_r) = problem.boundary_values(t);
    SystemMatrices {
        mass: assemble_mass(mesh, degree),
        stiffness: assemble_stiffness(mesh, degree, epsilon, sigma),
        load: assemble_load(mesh, degree, epsilon, sigma, u_l, u_r),
    }
}

/// Nonlinear term `h(v)_i = int f(u_h, u_h') phi_i`, element-wise quadrature.
pub fn assemble_nonlinear(u: &DgSolution, problem: &ProblemSpec) -> Result<Vec<f64>> {
    let degree = u.degree();
    let rule = QuadratureRule::for_degree(degree);
    let table = tabulate(degree, &rule);
    let m = degree + 1;
    let mesh = u.mesh();
    let mut out = vec![0.0; dof_count(mesh, degree)];
    for n in 0..mesh.n_elements() {
        let h = mesh.size(n);
        let c = u.block(n);
        for (q, &w) in rule.weights().iter().enumerate() {
            let (uq, uxq) = value_and_slope(c, &table.values[q], &table.derivs[q], h);
            let fv = problem.f(uq, uxq);
            if !fv.is_finite() {
                return Err(Error::NonFinite(format!(
                    "f(u, u_x) at element {n}, u = {uq}, u_x = {uxq}"
                )));
            }
            for i in 0..m {
                out[n * m + i] += h * w * fv * table.values[q][i];
            }
        }
    }
    Ok(out)
}

/// Jacobian of [`assemble_nonlinear`] with respect to the coefficients,
/// shaped like the stiffness matrix so the two can be summed in place.
pub fn assemble_nonlinear_jacobian(u: &DgSolution, problem: &ProblemSpec) -> Result<Banded> {
    let degree = u.degree();
    let rule = QuadratureRule::for_degree(degree);
    let table = tabulate(degree, &rule);
    let m = degree + 1;
    let mesh = u.mesh();
    let bw = bandwidth(degree);
    let mut jac = Banded::new(dof_count(mesh, degree), bw, bw);
    for n in 0..mesh.n_elements() {
        let h = mesh.size(n);
        let c = u.block(n);
        for (q, &w) in rule.weights().iter().enumerate() {
            let v = &table.values[q];
            let d = &table.derivs[q];
            let (uq, uxq) = value_and_slope(c, v, d, h);
            let fu = problem.df_du(uq, uxq);
            let fux = problem.df_dux(uq, uxq);
            if !(fu.is_finite() && fux.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "df at element {n}, u = {uq}, u_x = {uxq}"
                )));
            }
            for i in 0..m {
                let wi = h * w * v[i];
                for j in 0..m {
                    jac.add(n * m + i, n * m + j, wi * (fu * v[j] + fux * d[j] / h));
                }
            }
        }
    }
    Ok(jac)
}

fn value_and_slope(c: &[f64], values: &[f64], derivs: &[f64], h: f64) -> (f64, f64) {
    let mut u = 0.0;
    let mut ux = 0.0;
    for ((&ci, &vi), &di) in c.iter().zip(values).zip(derivs) {
        u += ci * vi;
        ux += ci * di;
    }
    (u, ux / h)
}

/// L2-orthogonal projection of a function onto the dG space.
pub fn project_function(
    mesh: &PhysicalMesh,
    degree: usize,
    mut f: impl FnMut(f64) -> f64,
) -> Result<DgSolution> {
    let rule = QuadratureRule::for_degree(degree);
    let table = tabulate(degree, &rule);
    let m = degree + 1;
    let mut rhs = vec![0.0; dof_count(mesh, degree)];
    for n in 0..mesh.n_elements() {
        let (a, b) = mesh.element(n);
        let h = b - a;
        for (q, &w) in rule.weights().iter().enumerate() {
            let x = a + rule.points()[q] * h;
            let fx = f(x);
            for i in 0..m {
                rhs[n * m + i] += h * w * fx * table.values[q][i];
            }
        }
    }
    let mass = assemble_mass(mesh, degree);
    let coeffs = solve_banded(&mass, &rhs)?;
    DgSolution::from_coeffs(mesh.clone(), degree, coeffs)
}

/// Projection of the problem's initial profile at start time `t0`.
pub fn project_initial(
    problem: &ProblemSpec,
    mesh: &PhysicalMesh,
    degree: usize,
    t0: f64,
) -> Result<DgSolution> {
    project_function(mesh, degree, |x| problem.initial(x, t0))
}
