//! Particle swarm optimization over free beacon positions.
//!
//! Each particle carries a whole candidate deployment. Fitness is the true
//! grid minimum of the mean field minus a barrier term that blows up as a
//! beacon approaches the disk edge; the barrier weight is small enough that
//! feasible interior solutions are ranked purely by worst-point power.
//! Position updates are the classic inertia + cognitive + social rule with
//! a velocity clamp; escapees are reflected back inside the rim.

use rayon::prelude::*;

use crate::channel::{stream_rng, BeaconRadio, Deployment, PathLoss};
use crate::error::{Error, Result};
use crate::geometry::{DiskGrid, Point2};
use crate::objective::worst_mean_power;
use crate::scalar::Scalar;
use crate::solver::{SolverKind, SolverReport, TracePoint};

/// Swarm parameters. The inertia/attraction defaults are the standard
/// constriction-factor values.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig<T = f64> {
    pub swarm_size: usize,
    pub inertia: T,
    pub cognitive: T,
    pub social: T,
    /// Barrier weight; `None` picks `1e-12·P·K·R^(−γ)`, far below any
    /// interior fitness difference that matters.
    pub epsilon: Option<T>,
    pub max_iters: usize,
    /// Stop after this many iterations without global-best improvement.
    pub stall_iters: usize,
    /// Velocity clamp as a fraction of the disk radius.
    pub velocity_clamp: T,
}

impl<T: Scalar> Default for PsoConfig<T> {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 50,
            inertia: T::of(0.729),
            cognitive: T::of(1.49445),
            social: T::of(1.49445),
            epsilon: None,
            max_iters: 500,
            stall_iters: 100,
            velocity_clamp: T::of(0.2),
        }
    }
}

impl<T: Scalar> PsoConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::invalid("swarm needs at least 2 particles"));
        }
        if !(self.inertia > T::zero() && self.cognitive > T::zero() && self.social > T::zero()) {
            return Err(Error::invalid("inertia and attraction weights must be positive"));
        }
        if let Some(e) = self.epsilon {
            if !(e > T::zero()) {
                return Err(Error::invalid("barrier weight must be positive"));
            }
        }
        if !(self.velocity_clamp > T::zero()) {
            return Err(Error::invalid("velocity clamp must be positive"));
        }
        Ok(())
    }
}

/// Fitness of one candidate deployment: worst-point mean power minus the
/// rim-proximity penalty `ε·Σ 1/(R − ‖z_b‖)`.
pub(crate) fn fitness<T: Scalar>(
    positions: &[Point2<T>],
    grid: &DiskGrid<T>,
    pl: &PathLoss<T>,
    power: T,
    disk_radius: T,
    epsilon: T,
) -> Result<T> {
    let deployment = Deployment::new(positions.to_vec(), BeaconRadio::new(power, 1)?)?;
    let (_, min_power) = worst_mean_power(&deployment, grid, pl)?;
    let mut barrier = T::zero();
    for p in positions {
        let margin = disk_radius - p.radius();
        let margin = margin.max(T::of(1e-300));
        barrier += margin.recip();
    }
    Ok(min_power - epsilon * barrier)
}

/// Reflect a position back inside the rim; the barrier keeps particles off
/// the singular boundary afterwards.
fn reflect_inside<T: Scalar>(p: Point2<T>, disk_radius: T) -> Point2<T> {
    let r = p.radius();
    if r < disk_radius {
        return p;
    }
    let two = T::of(2.0);
    let mut target = two * disk_radius - r;
    if target < T::zero() {
        target = T::zero();
    }
    let cap = disk_radius * (T::one() - T::of(1e-9));
    let target = target.min(cap);
    if r == T::zero() {
        return p;
    }
    p.scaled(target / r)
}

/// Run the swarm. Deterministic for a fixed seed and config: random numbers
/// are drawn in a fixed order and fitness reductions preserve particle
/// order.
pub fn pso_solve<T: Scalar>(
    beacon_count: usize,
    grid: &DiskGrid<T>,
    pl: &PathLoss<T>,
    power: T,
    disk_radius: T,
    config: &PsoConfig<T>,
    seed: u64,
) -> Result<SolverReport<T>> {
    config.validate()?;
    if beacon_count == 0 {
        return Err(Error::invalid("beacon count must be at least 1"));
    }
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    let started = std::time::Instant::now();
    let epsilon = config
        .epsilon
        .unwrap_or_else(|| T::of(1e-12) * power * pl.k() * disk_radius.powf(-pl.gamma()));
    let v_max = config.velocity_clamp * disk_radius;
    let q = config.swarm_size;

    let mut rng = stream_rng(seed, 0x9507);

    // area-uniform initial positions, zero initial velocity
    let mut pos: Vec<Vec<Point2<T>>> = (0..q)
        .map(|_| {
            (0..beacon_count)
                .map(|_| {
                    let r = disk_radius
                        * T::unit_uniform(&mut rng).sqrt()
                        * (T::one() - T::of(1e-9));
                    let phi = T::TAU() * T::unit_uniform(&mut rng);
                    Point2::from_polar(r, phi)
                })
                .collect()
        })
        .collect();
    let mut vel: Vec<Vec<Point2<T>>> = vec![vec![Point2::origin(); beacon_count]; q];

    let eval = |swarm: &[Vec<Point2<T>>]| -> Result<Vec<T>> {
        swarm
            .par_iter()
            .map(|p| fitness(p, grid, pl, power, disk_radius, epsilon))
            .collect()
    };

    let mut fit = eval(&pos)?;
    let mut pbest = pos.clone();
    let mut pbest_fit = fit.clone();
    let mut gbest_idx = argmax(&pbest_fit);
    let mut gbest = pbest[gbest_idx].clone();
    let mut gbest_fit = pbest_fit[gbest_idx];

    let mut trace = Vec::new();
    let mut stall = 0usize;
    let mut iterations = 0usize;

    for iter in 0..config.max_iters {
        iterations = iter + 1;
        for qi in 0..q {
            for b in 0..beacon_count {
                let r1x = T::unit_uniform(&mut rng);
                let r1y = T::unit_uniform(&mut rng);
                let r2x = T::unit_uniform(&mut rng);
                let r2y = T::unit_uniform(&mut rng);
                let v = vel[qi][b];
                let p = pos[qi][b];
                let vx = config.inertia * v.x
                    + config.cognitive * r1x * (pbest[qi][b].x - p.x)
                    + config.social * r2x * (gbest[b].x - p.x);
                let vy = config.inertia * v.y
                    + config.cognitive * r1y * (pbest[qi][b].y - p.y)
                    + config.social * r2y * (gbest[b].y - p.y);
                let vx = vx.max(-v_max).min(v_max);
                let vy = vy.max(-v_max).min(v_max);
                vel[qi][b] = Point2::new(vx, vy);
                pos[qi][b] = reflect_inside(Point2::new(p.x + vx, p.y + vy), disk_radius);
            }
        }
        fit = eval(&pos)?;
        for qi in 0..q {
            if fit[qi] > pbest_fit[qi] {
                pbest_fit[qi] = fit[qi];
                pbest[qi] = pos[qi].clone();
            }
        }
        gbest_idx = argmax(&pbest_fit);
        if pbest_fit[gbest_idx] > gbest_fit {
            gbest_fit = pbest_fit[gbest_idx];
            gbest = pbest[gbest_idx].clone();
            stall = 0;
        } else {
            stall += 1;
        }
        trace.push(TracePoint {
            iter: iterations,
            objective: gbest_fit,
            residual_or_gbest: gbest_fit,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        if stall >= config.stall_iters {
            break;
        }
    }

    let deployment = Deployment::new(gbest.clone(), BeaconRadio::new(power, 1)?)?;
    let (_, worst) = worst_mean_power(&deployment, grid, pl)?;
    Ok(SolverReport {
        solver: SolverKind::Pso,
        positions: gbest,
        per_beacon_power: power,
        worst_power: worst,
        surrogate_value: None,
        iterations,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        converged: true,
        seed: Some(seed),
        trace,
    })
}

fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{density_for_target, make_disk_grid};
    use approx::assert_relative_eq;

    fn grid1000() -> DiskGrid<f64> {
        let d = density_for_target(100.0, 12, 1000);
        make_disk_grid(100.0, 12, d).unwrap()
    }

    #[test]
    fn barrier_vanishes_away_from_the_rim() {
        let grid = grid1000();
        let pl = PathLoss::new(1.0, 3.0).unwrap();
        let positions = vec![Point2::new(10.0, 5.0)];
        let dep = Deployment::new(positions.clone(), BeaconRadio::new(10.0, 1).unwrap()).unwrap();
        let (_, min_power) = worst_mean_power(&dep, &grid, &pl).unwrap();
        let f = fitness(&positions, &grid, &pl, 10.0, 100.0, 1e-12 * 1e-5).unwrap();
        assert_relative_eq!(f, min_power, max_relative = 1e-9);
    }

    #[test]
    fn reflection_pulls_escapees_inside() {
        let p = reflect_inside(Point2::new(110.0, 0.0), 100.0);
        assert_relative_eq!(p.x, 90.0, max_relative = 1e-12);
        let q = reflect_inside(Point2::new(0.0, 100.0), 100.0);
        assert!(q.radius() < 100.0);
        let far = reflect_inside(Point2::new(250.0, 0.0), 100.0);
        assert!(far.radius() <= 100.0);
    }

    #[test]
    fn single_beacon_finds_the_center() {
        let grid = grid1000();
        let pl = PathLoss::new(1.0, 3.0).unwrap();
        let cfg = PsoConfig::default();
        let report = pso_solve(1, &grid, &pl, 10.0, 100.0, &cfg, 42).unwrap();
        assert!(
            report.positions[0].radius() < 2.0,
            "position {:?}",
            report.positions[0]
        );
        assert_relative_eq!(report.worst_power, 1e-5, max_relative = 2e-2);
    }

    #[test]
    fn same_seed_reproduces_the_report() {
        let grid = grid1000();
        let pl = PathLoss::new(1.0, 3.0).unwrap();
        let cfg = PsoConfig {
            max_iters: 60,
            stall_iters: 30,
            ..PsoConfig::default()
        };
        let a = pso_solve(3, &grid, &pl, 10.0 / 3.0, 100.0, &cfg, 9).unwrap();
        let b = pso_solve(3, &grid, &pl, 10.0 / 3.0, 100.0, &cfg, 9).unwrap();
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.worst_power, b.worst_power);
        assert_eq!(a.iterations, b.iterations);
        let c = pso_solve(3, &grid, &pl, 10.0 / 3.0, 100.0, &cfg, 10).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn returned_positions_are_feasible() {
        let grid = grid1000();
        let pl = PathLoss::new(1.0, 3.0).unwrap();
        let cfg = PsoConfig {
            max_iters: 80,
            ..PsoConfig::default()
        };
        let report = pso_solve(4, &grid, &pl, 2.5, 100.0, &cfg, 3).unwrap();
        assert!(report.feasible(100.0));
    }
}
