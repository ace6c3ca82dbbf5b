//! Placement solvers and their common report type.
//!
//! Three routes to a deployment: the closed-form ring sweep ([`ec`]), a
//! log-barrier interior-point method on the smoothed objective ([`ipm`]),
//! and particle swarm optimization with a barrier fitness ([`pso`]). All
//! report the same [`SolverReport`].

pub mod ec;
pub mod ipm;
mod linalg;
pub mod pso;

use serde::{Deserialize, Serialize};

use crate::channel::PathLoss;
use crate::error::Result;
use crate::geometry::{DiskGrid, Point2};
use crate::scalar::Scalar;

/// Which placement algorithm produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    OdePobes,
    Ipm,
    Pso,
    CenteredBenchmark,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::OdePobes => "ode-pobes",
            SolverKind::Ipm => "ipm",
            SolverKind::Pso => "pso",
            SolverKind::CenteredBenchmark => "centered-benchmark",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ode-pobes" => Ok(SolverKind::OdePobes),
            "ipm" => Ok(SolverKind::Ipm),
            "pso" => Ok(SolverKind::Pso),
            "centered-benchmark" => Ok(SolverKind::CenteredBenchmark),
            other => Err(format!(
                "unknown solver `{other}` (expected ode-pobes, ipm, pso or centered-benchmark)"
            )),
        }
    }
}

/// One convergence-trace sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T = f64> {
    pub iter: usize,
    /// Objective as seen by the solver (surrogate value or best fitness).
    pub objective: T,
    /// Stationarity residual (gradient methods) or best-so-far worst power
    /// (population methods).
    pub residual_or_gbest: T,
    pub wall_ms: f64,
}

/// Outcome of one placement solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport<T = f64> {
    pub solver: SolverKind,
    pub positions: Vec<Point2<T>>,
    pub per_beacon_power: T,
    /// True worst-point mean power of the returned deployment (watts); for
    /// grid-based solvers this is the grid minimum, for the ring sweep the
    /// closed-form candidate minimum.
    pub worst_power: T,
    /// Final surrogate value for solvers that optimize one.
    pub surrogate_value: Option<T>,
    pub iterations: usize,
    pub wall_ms: f64,
    pub converged: bool,
    pub seed: Option<u64>,
    pub trace: Vec<TracePoint<T>>,
}

impl<T: Scalar> SolverReport<T> {
    /// Every position inside the disk (tiny slack for boundary rounding).
    pub fn feasible(&self, disk_radius: T) -> bool {
        let limit = disk_radius * (T::one() + T::of(1e-12));
        self.positions.iter().all(|p| p.radius() <= limit)
    }
}

/// Solver selection plus its knobs, as used by the planner and the CLI.
#[derive(Debug, Clone)]
pub enum SolverChoice<T: Scalar = f64> {
    OdePobes {
        /// Sweep step; `None` means `R/1000`.
        delta_r: Option<T>,
    },
    Ipm(ipm::IpmConfig<T>),
    Pso(pso::PsoConfig<T>),
    CenteredBenchmark,
}

impl<T: Scalar> SolverChoice<T> {
    pub fn kind(&self) -> SolverKind {
        match self {
            SolverChoice::OdePobes { .. } => SolverKind::OdePobes,
            SolverChoice::Ipm(_) => SolverKind::Ipm,
            SolverChoice::Pso(_) => SolverKind::Pso,
            SolverChoice::CenteredBenchmark => SolverKind::CenteredBenchmark,
        }
    }

    /// Solve the placement problem for `beacon_count` beacons of per-beacon
    /// power `power` on a disk of radius `disk_radius`.
    pub fn solve(
        &self,
        beacon_count: usize,
        grid: &DiskGrid<T>,
        pl: &PathLoss<T>,
        power: T,
        disk_radius: T,
        seed: u64,
    ) -> Result<SolverReport<T>> {
        match self {
            SolverChoice::OdePobes { delta_r } => {
                let dr = delta_r.unwrap_or(disk_radius / T::of(1000.0));
                let started = std::time::Instant::now();
                let sol = ec::ode_pobes(beacon_count, disk_radius, pl, power, dr)?;
                Ok(SolverReport {
                    solver: SolverKind::OdePobes,
                    positions: sol.positions(beacon_count, disk_radius),
                    per_beacon_power: power,
                    worst_power: sol.worst_power,
                    surrogate_value: None,
                    iterations: sol.steps,
                    wall_ms: started.elapsed().as_secs_f64() * 1e3,
                    converged: true,
                    seed: None,
                    trace: Vec::new(),
                })
            }
            SolverChoice::Ipm(config) => {
                let mut config = config.clone();
                config.seed = seed;
                ipm::ipm_solve(beacon_count, grid, pl, power, disk_radius, &config, None)
            }
            SolverChoice::Pso(config) => {
                pso::pso_solve(beacon_count, grid, pl, power, disk_radius, config, seed)
            }
            SolverChoice::CenteredBenchmark => {
                let started = std::time::Instant::now();
                let worst = T::of(beacon_count as f64)
                    * power
                    * pl.k()
                    * disk_radius.powf(-pl.gamma());
                Ok(SolverReport {
                    solver: SolverKind::CenteredBenchmark,
                    positions: vec![Point2::origin(); beacon_count],
                    per_beacon_power: power,
                    worst_power: worst,
                    surrogate_value: None,
                    iterations: 0,
                    wall_ms: started.elapsed().as_secs_f64() * 1e3,
                    converged: true,
                    seed: None,
                    trace: Vec::new(),
                })
            }
        }
    }
}
