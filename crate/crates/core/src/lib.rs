//! Integral solvers for the normalized PKN hydraulic fracture model.
//!
//! The crate is organised around one spatial discretization ([`mesh::Mesh`], which
//! carries its tail-integral weights) shared by three solvers:
//!
//! * [`selfsimilar`]: the degenerate boundary value problem behind self-similar
//!   crack growth, solved by iterating the inverted lubrication operator;
//! * [`transient`]: two time-stepping schemes built on the same inversion, a
//!   relaxed first order one and a second order (trapezoidal) one;
//! * [`benchmarks`]: manufactured solutions used to measure both.
//!
//! [`harness`] turns runs into error reports, tables and files, and backs the `pkn`
//! command line tool.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected, and index loops
// mirror the nodal formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod benchmarks;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod normalize;
pub mod quadrature;
pub mod roots;
pub mod selfsimilar;
pub mod transient;

pub use error::{PknError, Result};
pub use mesh::Mesh;
