//! Approximate reduction of dynamical systems by projection.
//!
//! Given a vector field `X` on `R^n = R^m × R^k`, the reduced field
//! `Y(y) = π_m X(y, 0)` drops the trailing `k` coordinates. This crate
//! builds `Y`, tests whether the reduction is exact, measures how far
//! projected trajectories of `X` drift from trajectories of `Y`, and
//! searches for counterexamples to the Lyapunov-type certificates that
//! bound that drift.
//!
//! Modules, bottom up:
//!
//! - [`model`]: vector fields, control systems, decompositions, boxes,
//!   trajectories, comparison functions.
//! - [`integrate`]: RK4 and Dormand–Prince 5(4) with exact output grids.
//! - [`reduce`]: reduced fields, exactness checks, deviation and `δ`
//!   estimates.
//! - [`stability`]: sampling falsifiers for IISS, IUBIBSS and fiberwise
//!   certificates.
//! - [`systems`]: the ball-in-hoop and cart-pendulum examples plus
//!   user-defined systems from TOML.
//! - [`cli`]: the `approxred` command line.

pub mod cli;
pub mod error;
pub mod expr;
pub mod integrate;
pub mod model;
pub mod numdiff;
pub mod reduce;
pub mod sampling;
pub mod stability;
pub mod systems;

pub use error::{Error, Result};
