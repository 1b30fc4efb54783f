//! Two-derivative diagonally implicit Runge-Kutta (TDDIRK) integrators with
//! optimized phase errors.
//!
//! A TDDIRK method advances `y' = f(y)` using both `f` and the second
//! derivative `g(y) = f'(y) f(y)`:
//!
//! ```text
//! Y_i     = y_n + c_i h f(y_n) + h^2 sum_{j<=i} a_ij g(Y_j),   i = 1..s
//! y_{n+1} = y_n + h f(y_n)     + h^2 sum_i     b_i  g(Y_i)
//! ```
//!
//! with a lower-triangular coefficient matrix `A`, so each stage is an
//! implicit equation in `Y_i` alone, solved here by fixed-point iteration.
//!
//! The crate ships four built-in schemes with tuned dispersion/dissipation
//! behaviour (`OTDDIRK4s2a`, `OTDDIRK4s2b`, `TDDIRK5s2`, `OTDDIRK5s3`),
//! the parameterized families and optimization solves they come from, order
//! condition verification, linear stability and phase-error analysis, and a
//! small benchmark suite (harmonic oscillator, upwind advection with a
//! nonlinear source, a 2D advection-diffusion-reaction problem).
//!
//! Entry points:
//! - [`tableau`]: the [`tableau::ButcherTableau`] value type, the named
//!   scheme registry, and order-condition residuals.
//! - [`families`]: the two- and three-stage scheme families and the solves
//!   that produce the built-in schemes.
//! - [`stepper`]: fixed-step time integration with per-stage fixed-point
//!   iteration.
//! - [`analysis`]: stability function `R(z)`, stability region rasters,
//!   dispersion/dissipation curves and order/constant estimation.
//! - [`problems`]: benchmark problem constructors and reference-solution
//!   caching.
//! - [`cli`]: the command-line harness behind the `tddirk` binary.
//!
//! Each major capability also has a runnable demo under `examples/`.

// Numeric kernels index across several arrays at once, and `!(x > 0.0)`
// guards deliberately reject NaN alongside nonpositive values.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
mod error;
pub mod families;
pub mod plot;
pub mod problems;
pub mod stepper;
pub mod tableau;

pub use error::{Error, Result};
pub use tableau::{get_scheme, ButcherTableau, SchemeRegistry};
