//! Moving-mesh discontinuous Galerkin solver for one-dimensional semi-linear
//! PDEs of the form
//!
//! ```text
//!     u_t = eps * u_xx - f(u, u_x)
//! ```
//!
//! with Dirichlet boundary data, aimed at traveling-wave solutions whose
//! fronts are orders of magnitude thinner than the domain.
//!
//! Space is discretized with a symmetric interior-penalty dG method on a
//! mesh that moves each time step: a monitor function turns the current
//! solution into a nodal mesh density, a discretized moving-mesh PDE relaxes
//! the nodes toward equidistribution, and the previous solution is carried
//! to the new mesh by nodal interpolation before the implicit step is
//! re-solved. Time stepping is backward Euler with a damped Newton solve.

pub mod assembly;
pub mod basis;
pub mod cli;
pub mod driver;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod mmpde;
pub mod monitor;
pub mod output;
pub mod problems;
pub mod quadrature;
pub mod solution;
pub mod stepping;
pub mod transfer;

pub use error::{Error, Result};
