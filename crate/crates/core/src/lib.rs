//! Dunkl operator calculus for finite Coxeter groups, with exact rational
//! polynomial arithmetic, generalized Hermite bases, the Dunkl kernel, and
//! numerically certified heat-kernel / Segal-Bargmann identities.
//!
//! The crate is organized along the pipeline the verification suite runs:
//!
//! - [`coxeter`]: root systems, reflection groups, orbits, multiplicities,
//!   the invariant weight and its Macdonald–Mehta–Selberg constant;
//! - [`polyring`]: polynomials and the operator calculus on them (Dunkl
//!   operators, Laplacian, heat semigroup, Fischer pairing, exact
//!   Gaussian-moment functional);
//! - [`hermite`]: Fischer-orthogonal graded bases and generalized Hermite
//!   polynomials/functions;
//! - [`dunklkernel`]: degree-by-degree construction and evaluation of the
//!   Dunkl kernel, heat kernel, and the coherent-state kernels;
//! - [`transforms`]: the three integral transforms, ground-state transform,
//!   Dunkl transform, translation-of-Gaussian, convolution, and the
//!   holomorphic-space inner products;
//! - [`harness`]: configuration, the fixed check catalog, and report output.

pub mod coxeter;
pub mod dunklkernel;
pub mod error;
pub mod harness;
pub mod hermite;
pub mod polyring;
pub mod quadrature;
pub mod scalar;
pub mod transforms;

pub use error::{DunklError, Result};
