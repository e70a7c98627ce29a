//! Variational solver for forced second-order systems
//!
//! ```text
//! q''(t) - q(t) + a(t) grad G(q(t)) = f(t),   q, q' -> 0 as t -> +-inf
//! ```
//!
//! Solutions are approximated by `2k`-periodic solutions of the same system
//! on `[-k, k]`, found as mountain-pass critical points of the discrete
//! action, and continued in `k`.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below are what the command-line front end uses.

pub mod action;
pub mod continuation;
pub mod error;
pub mod grid;
pub mod integrate;
mod linalg;
pub mod mountain_pass;
pub mod problem;
mod scalar;

pub use action::{ActionEval, DiscreteAction};
pub use continuation::{SweepConfig, SweepReport};
pub use error::{Error, Result};
pub use grid::{PeriodicGrid, Trajectory, WindowSample};
pub use mountain_pass::{BumpDatum, CriticalPoint, PathState, SolverConfig};
pub use problem::{Builtin, ConditionReport, DerivedConstants, Problem, SamplingConfig, Status};
pub use scalar::Scalar;

pub type PeriodicGrid64 = PeriodicGrid<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type Problem64 = Problem<f64>;
pub type SamplingConfig64 = SamplingConfig<f64>;
pub type DerivedConstants64 = DerivedConstants<f64>;
pub type ConditionReport64 = ConditionReport<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type CriticalPoint64 = CriticalPoint<f64>;
pub type BumpDatum64 = BumpDatum<f64>;
pub type SweepConfig64 = SweepConfig<f64>;
pub type SweepReport64 = SweepReport<f64>;

pub type PeriodicGrid32 = PeriodicGrid<f32>;
pub type Trajectory32 = Trajectory<f32>;
pub type Problem32 = Problem<f32>;
