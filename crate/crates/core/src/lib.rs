//! Method of particular solutions for Laplace eigenvalues on smooth star-shaped
//! planar domains, with Dirichlet and (filtered) Neumann tensions.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod boundary_filter;
pub mod disc_oracle;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod scanner;
pub mod specfun;
pub mod tension;

pub use error::{MpsError, Result};
pub use exec::Exec;
