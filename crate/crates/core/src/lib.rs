//! Numerical laboratory for mean-value functional equations whose mean
//! point is a fixed convex combination `alpha * a + (1 - alpha) * b` of the
//! interval ends.
//!
//! * [`expr`]: parse, evaluate and differentiate closed-form functions.
//! * [`calculus`]: quadrature, finite differences, zero-set localization.
//! * [`mvt`]: residuals of the Lagrange and Cauchy equations, the
//!   `f`-from-`g` constructor and the integral criterion.
//! * [`classify`]: sorting solution pairs into their families.
//! * [`sahoo`]: the four-function generalization.
//! * [`harness`]: seeded generators and batch experiments.
//! * [`cli`]: the `mvtlab` command-line surface.

pub mod calculus;
pub mod classify;
pub mod cli;
pub mod expr;
pub mod harness;
pub mod mvt;
pub mod sahoo;

pub use calculus::{integrate, zero_set, Interval, QuadratureSpec, ZeroSetDecomposition};
pub use expr::{parse, smooth, Expr, SmoothFn};
pub use mvt::{MeanSpec, Residual, ResidualReport, TAU};
