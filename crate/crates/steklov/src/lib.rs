//! Global minimization of univariate coercive functions by following the
//! minimizer trajectory of a regularized surface from a convexifying
//! parameter `t0` down to `t = 0`.
//!
//! Two regularizations are provided:
//!
//! * the Steklov (sliding-window mean) function
//!   `mu(x, t) = (1/2t) * integral of f over [x-t, x+t]`, which convexifies
//!   coercive functions already at small `t0`, and
//! * the classical quadratic regularization `phi(x, t) = f(x) + (t/2) x^2`,
//!   kept as the baseline it is usually compared against.
//!
//! The crate is organized along the pipeline:
//!
//! * [`polyalg`] — dense univariate polynomial arithmetic and real-root
//!   isolation,
//! * [`regularize`] — the regularization functions, their partials, quartic
//!   closed forms and the start-point solver,
//! * [`ivp`] — the adaptive, stiff-capable scalar initial-value integrator,
//! * [`trajectories`] — the three trajectory algorithms and outcome
//!   classification,
//! * [`oracle`] — brute-force ground truth for verification,
//! * [`bench`] — the seeded random-polynomial failure-rate harness,
//! * [`fixtures`] — the built-in example objectives.

// Comparisons written as !(x > 0.0) are deliberate: they reject NaN along
// with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod fixtures;
pub mod ivp;
pub mod oracle;
pub mod polyalg;
pub mod regularize;
pub mod trajectories;
