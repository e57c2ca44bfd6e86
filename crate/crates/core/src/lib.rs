//! Numerical laboratory for the half-line drift-diffusion equation
//!
//! ```text
//! u_t = mu u_x + u_xx / 2,   u(0, x) = f(x),   u_t(t, 0) = nu u_x(t, 0)
//! ```
//!
//! whose boundary condition is not of Feller type when `nu < 0`. The
//! solution is evaluated three independent ways (closed-form kernels, exact
//! Monte Carlo of the reflecting-Brownian-motion representation, and a
//! finite-difference solver) so the routes can be checked against each other.

pub mod cli;
pub mod error;
pub mod field;
pub mod initialdata;
pub mod kernels;
pub mod montecarlo;
pub mod pdesolver;
pub mod quadrature;
pub mod specialfn;

pub use error::{Error, Result};
pub use field::{eval_field, Engine, EngineConfig, Field, McSettings, PdeSettings};
pub use initialdata::InitialDatum;
pub use kernels::{KernelPoint, Problem};
pub use montecarlo::McEstimate;
pub use pdesolver::PdeGrid;
pub use quadrature::QuadratureSpec;
