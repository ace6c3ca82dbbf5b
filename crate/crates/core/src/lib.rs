//! Deployment planning for RF power-beacon networks.
//!
//! A set of beacons inside a disk wirelessly charges a large, unknown
//! population of energy harvesters. This crate finds beacon positions that
//! maximize the mean incident power at the worst-served location, sizes the
//! fleet against an energy-outage constraint, and evaluates coverage and
//! multi-antenna trade-offs by Monte Carlo.
//!
//! The numeric core is generic over the scalar type (`f32` or `f64`) via
//! [`Scalar`]; the aliases below fix the default `f64` lane.

// `!(x > y)` is used on purpose throughout: it rejects NaN along with the
// out-of-range case, which `x <= y` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Solver entry points take the full problem description; bundling the
// arguments into one-shot structs would just move the noise.
#![allow(clippy::too_many_arguments)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod objective;
pub mod planner;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` lane aliases.
pub type Point2f64 = geometry::Point2<f64>;
pub type DiskGridf64 = geometry::DiskGrid<f64>;
pub type PathLossf64 = channel::PathLoss<f64>;
pub type Deploymentf64 = channel::Deployment<f64>;
pub type PowerFieldf64 = objective::PowerField<f64>;
pub type AreaSpecf64 = planner::AreaSpec<f64>;
pub type SolverReportf64 = solver::SolverReport<f64>;

/// `f32` lane aliases.
pub type Point2f32 = geometry::Point2<f32>;
pub type DiskGridf32 = geometry::DiskGrid<f32>;
pub type PathLossf32 = channel::PathLoss<f32>;
pub type Deploymentf32 = channel::Deployment<f32>;
