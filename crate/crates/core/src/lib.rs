//! Symmetric dual-wind discontinuous Galerkin (DWDG) discretization of the
//! box-constrained elliptic optimal control problem
//!
//! ```text
//! min 1/2 ||y - y_d||^2 + beta/2 ||u||^2   s.t.  -Lap y = u in (0,1)^2,  y = 0 on the boundary,
//!                                                u_a <= u <= u_b
//! ```
//!
//! on criss-cross meshes, with P1-DG state and adjoint and P0 or P1-DG
//! control, plus the refinement-study harness behind the `dwdg-ocp` CLI.

pub mod dg_calculus;
pub mod dg_space;
pub mod error;
pub mod field;
pub mod forms;
pub mod harness;
pub mod mesh;
pub mod ocp;
pub mod quadrature;
pub mod solve;
pub mod sparse;

pub use error::{DwdgError, Result};
pub use mesh::{build_crisscross, Mesh, Point};
