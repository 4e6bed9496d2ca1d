//! Partition functions `E e^{λf}` of multilinear polynomials on the Boolean
//! cube `{-1, 1}^n`, their Taylor approximation inside a zero-free disk, and
//! the rounding and Z₂ optimization layers built on top.
//!
//! - [`poly`]: sparse multilinear polynomials and cube points.
//! - [`oracle`]: exhaustive enumeration, the ground truth for small `n`.
//! - [`taylor`]: moments, cumulants and the truncated expansion of `ln E e^{λf}`.
//! - [`rounding`]: successive conditioning to a point `y` with
//!   `e^{λ f(y)} ≥ (1 - ε) E e^{λf}`.
//! - [`optimize`]: linear equations over Z₂ and lower bounds on `E e^{λf}`.

pub mod cli;
pub mod error;
pub mod instances;
pub mod optimize;
pub mod oracle;
pub mod poly;
pub mod rounding;
pub mod selftest;
pub mod taylor;

pub use error::{Error, Result};
pub use oracle::{exact_max, exact_partition};
pub use poly::{CubePoint, CubePolynomial, MonomialSupport};
pub use rounding::round_to_point;
pub use taylor::approx_partition;
