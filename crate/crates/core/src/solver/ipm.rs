//! Log-barrier interior-point solver for free beacon positions.
//!
//! The placement problem is smoothed with the power-mean surrogate and the
//! disk constraints `‖n_b‖ ≤ R` enter through slacks and a log barrier:
//! minimize `−f_k(ξ) − µ·Σ ln(t_b)` subject to `‖n_b‖² − R² + t_b = 0`. The
//! equalities pin `t_b = R² − ‖n_b‖²` and the slack multipliers to
//! `λ_b = −µ/t_b`, so each barrier subproblem reduces to damped Newton in
//! the positions alone; the Newton matrix is the Schur complement of the
//! full KKT system and is factored densely. The barrier weight shrinks
//! geometrically until the stationarity residual is tight at the final µ.

use crate::channel::{stream_rng, BeaconRadio, Deployment, PathLoss};
use crate::error::{Error, Result};
use crate::geometry::{DiskGrid, Point2};
use crate::objective::{power_mean_diff, worst_mean_power};
use crate::scalar::Scalar;
use crate::solver::linalg::solve_regularized;
use crate::solver::{ec, SolverKind, SolverReport, TracePoint};

/// Interior-point solver knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct IpmConfig<T = f64> {
    /// Surrogate sharpness (negative).
    pub smoothing_k: T,
    /// Initial barrier weight as a fraction of the initial surrogate value,
    /// so watt scales from 1e-6 to 1e-10 need no retuning.
    pub mu0_factor: T,
    /// Multiplicative barrier decay per outer iteration, in (0, 1).
    pub mu_decay: T,
    /// Outer loop stops once µ falls below this fraction of the initial
    /// surrogate value.
    pub mu_stop_factor: T,
    /// Stationarity tolerance relative to the natural gradient scale
    /// `f_k(init)/R`.
    pub newton_tol: T,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Use a finite-difference Hessian (built from the analytic gradient)
    /// instead of the analytic one.
    pub fd_fallback: bool,
    /// Start from particles scattered uniformly in the disk instead of the
    /// ring-sweep warm start.
    pub random_init: bool,
    /// Warm-start jitter as a fraction of `R`.
    pub init_jitter: T,
    /// Seed for the initialization noise.
    pub seed: u64,
}

impl<T: Scalar> Default for IpmConfig<T> {
    fn default() -> Self {
        IpmConfig {
            smoothing_k: T::of(-25.0),
            mu0_factor: T::of(1e-2),
            mu_decay: T::of(0.2),
            mu_stop_factor: T::of(1e-8),
            newton_tol: T::of(1e-6),
            max_outer: 20,
            max_inner: 50,
            fd_fallback: false,
            random_init: false,
            init_jitter: T::of(0.01),
            seed: 0,
        }
    }
}

impl<T: Scalar> IpmConfig<T> {
    fn validate(&self) -> Result<()> {
        if !(self.smoothing_k < T::zero()) {
            return Err(Error::invalid("smoothing exponent must be negative"));
        }
        if !(self.mu0_factor > T::zero()) {
            return Err(Error::invalid("mu0 factor must be positive"));
        }
        if !(self.mu_decay > T::zero() && self.mu_decay < T::one()) {
            return Err(Error::invalid("mu decay must lie in (0, 1)"));
        }
        if !(self.newton_tol > T::zero()) {
            return Err(Error::invalid("newton tolerance must be positive"));
        }
        Ok(())
    }
}

/// Primal-dual state of the barrier problem.
#[derive(Debug, Clone, PartialEq)]
pub struct IpmState<T = f64> {
    pub positions: Vec<Point2<T>>,
    /// Slacks `t_b > 0` of the disk constraints.
    pub slacks: Vec<T>,
    /// Multipliers `λ_b` of the equality constraints.
    pub multipliers: Vec<T>,
}

impl<T: Scalar> IpmState<T> {
    /// State on the central path at barrier weight `mu`: slacks take up the
    /// constraint exactly and multipliers sit at `−µ/t_b`.
    pub fn on_central_path(positions: Vec<Point2<T>>, disk_radius: T, mu: T) -> Self {
        let slacks: Vec<T> = positions
            .iter()
            .map(|p| disk_radius * disk_radius - p.norm_sq())
            .collect();
        let multipliers = slacks.iter().map(|&t| -mu / t).collect();
        IpmState {
            positions,
            slacks,
            multipliers,
        }
    }
}

/// Euclidean norm of the stacked KKT residual of the barrier problem.
///
/// Blocks, for each beacon `b`:
/// position stationarity `−∂f_k/∂n_b − 2λ_b·n_b`, slack stationarity
/// `µ/t_b + λ_b`, and the constraint `‖n_b‖² − R² + t_b`. All three vanish
/// at a barrier-subproblem optimum with `λ_b = −µ/t_b`.
pub fn kkt_residual<T: Scalar>(
    state: &IpmState<T>,
    grid: &DiskGrid<T>,
    pl: &PathLoss<T>,
    power: T,
    k: T,
    mu: T,
    disk_radius: T,
) -> Result<T> {
    let b_count = state.positions.len();
    if state.slacks.len() != b_count || state.multipliers.len() != b_count {
        return Err(Error::invalid("state blocks disagree on beacon count"));
    }
    let diff = power_mean_diff(&state.positions, power, grid, pl, k, false)?;
    let mut sq = T::zero();
    for b in 0..b_count {
        let n = state.positions[b];
        let t = state.slacks[b];
        let lam = state.multipliers[b];
        let rx = -diff.grad[2 * b] - T::of(2.0) * lam * n.x;
        let ry = -diff.grad[2 * b + 1] - T::of(2.0) * lam * n.y;
        let rt = mu / t + lam;
        let rc = n.norm_sq() - disk_radius * disk_radius + t;
        sq += rx * rx + ry * ry + rt * rt + rc * rc;
    }
    Ok(sq.sqrt())
}

struct Merit<T> {
    value: T,
    f: T,
    grad: Vec<T>,
    slacks: Vec<T>,
}

/// Barrier merit `−f_k − µ·Σ ln(R² − ‖n_b‖²)`; `None` when infeasible or the
/// field evaluation is singular (the line search treats both as +∞).
fn merit_at<T: Scalar>(
    positions: &[Point2<T>],
    grid: &DiskGrid<T>,
    pl: &PathLoss<T>,
    power: T,
    k: T,
    mu: T,
    r_sq: T,
    want_grad: bool,
) -> Option<Merit<T>> {
    let mut slacks = Vec::with_capacity(positions.len());
    let mut barrier = T::zero();
    for p in positions {
        let t = r_sq - p.norm_sq();
        if !(t > T::zero()) {
            return None;
        }
        barrier += t.ln();
        slacks.push(t);
    }
    let diff = match power_mean_diff(positions, power, grid, pl, k, false) {
        Ok(d) => d,
        Err(Error::Singularity { .. }) => return None,
        Err(_) => return None,
    };
    let value = -diff.f - mu * barrier;
    if !value.is_finite() {
        return None;
    }
    let grad = if want_grad {
        let mut g = diff.grad.clone();
        for (b, p) in positions.iter().enumerate() {
            let c = T::of(2.0) * mu / slacks[b];
            g[2 * b] = -g[2 * b] + c * p.x;
            g[2 * b + 1] = -g[2 * b + 1] + c * p.y;
        }
        g
    } else {
        Vec::new()
    };
    Some(Merit {
        value,
        f: diff.f,
        grad,
        slacks,
    })
}

fn barrier_hessian<T: Scalar>(
    positions: &[Point2<T>],
    grid: &DiskGrid<T>,
    pl: &PathLoss<T>,
    power: T,
    k: T,
    mu: T,
    slacks: &[T],
    fd: bool,
) -> Result<Vec<T>> {
    let dim = 2 * positions.len();
    let mut h = if fd {
        fd_hessian(positions, grid, pl, power, k)?
    } else {
        let diff = power_mean_diff(positions, power, grid, pl, k, true)?;
        let mut h = diff.hess.expect("hessian requested");
        for v in &mut h {
            *v = -*v;
        }
        h
    };
    for (b, p) in positions.iter().enumerate() {
        let t = slacks[b];
        let c1 = T::of(2.0) * mu / t;
        let c2 = T::of(4.0) * mu / (t * t);
        let r0 = 2 * b;
        h[r0 * dim + r0] += c1 + c2 * p.x * p.x;
        h[r0 * dim + r0 + 1] += c2 * p.x * p.y;
        h[(r0 + 1) * dim + r0] += c2 * p.y * p.x;
        h[(r0 + 1) * dim + r0 + 1] += c1 + c2 * p.y * p.y;
    }
    Ok(h)
}

/// Central-difference Hessian of `−f_k` built from the analytic gradient.
fn fd_hessian<T: Scalar>(
    positions: &[Point2<T>],
    grid: &DiskGrid<T>,
    pl: &PathLoss<T>,
    power: T,
    k: T,
) -> Result<Vec<T>> {
    let dim = 2 * positions.len();
    let h_step = T::of(1e-4);
    let mut hess = vec![T::zero(); dim * dim];
    let mut pts = positions.to_vec();
    for i in 0..dim {
        let (b, is_y) = (i / 2, i % 2 == 1);
        let save = pts[b];
        let bump = |p: Point2<T>, s: T| {
            if is_y {
                Point2::new(p.x, p.y + s)
            } else {
                Point2::new(p.x + s, p.y)
            }
        };
        pts[b] = bump(save, h_step);
        let plus = power_mean_diff(&pts, power, grid, pl, k, false)?.grad;
        pts[b] = bump(save, -h_step);
        let minus = power_mean_diff(&pts, power, grid, pl, k, false)?.grad;
        pts[b] = save;
        for j in 0..dim {
            hess[i * dim + j] = -(plus[j] - minus[j]) / (T::of(2.0) * h_step);
        }
    }
    // symmetrize
    for i in 0..dim {
        for j in 0..i {
            let avg = (hess[i * dim + j] + hess[j * dim + i]) / T::of(2.0);
            hess[i * dim + j] = avg;
            hess[j * dim + i] = avg;
        }
    }
    Ok(hess)
}

/// Largest step fraction that keeps every position strictly inside the disk.
fn boundary_step<T: Scalar>(positions: &[Point2<T>], step: &[T], r_limit: T) -> T {
    let mut alpha = T::one();
    for (b, p) in positions.iter().enumerate() {
        let d = Point2::new(step[2 * b], step[2 * b + 1]);
        // ‖p + α·d‖² = r_limit² along the ray
        let a = d.norm_sq();
        if a == T::zero() {
            continue;
        }
        let bq = T::of(2.0) * (p.x * d.x + p.y * d.y);
        let c = p.norm_sq() - r_limit * r_limit;
        let disc = bq * bq - T::of(4.0) * a * c;
        if disc <= T::zero() {
            continue;
        }
        let root = (-bq + disc.sqrt()) / (T::of(2.0) * a);
        if root > T::zero() {
            alpha = alpha.min(T::of(0.995) * root);
        }
    }
    alpha
}

/// Warm start: ring-sweep constellation jittered by uniform noise, or
/// uniform-in-disk positions when `random_init` is set.
fn initial_positions<T: Scalar>(
    beacon_count: usize,
    disk_radius: T,
    pl: &PathLoss<T>,
    power: T,
    config: &IpmConfig<T>,
) -> Result<Vec<Point2<T>>> {
    let mut rng = stream_rng(config.seed, 0xB00);
    if config.random_init {
        return Ok((0..beacon_count)
            .map(|_| {
                let r = disk_radius * T::unit_uniform(&mut rng).sqrt() * T::of(0.98);
                let phi = T::TAU() * T::unit_uniform(&mut rng);
                Point2::from_polar(r, phi)
            })
            .collect());
    }
    let sweep = ec::ode_pobes(
        beacon_count,
        disk_radius,
        pl,
        power,
        disk_radius / T::of(1000.0),
    )?;
    let jitter = config.init_jitter * disk_radius;
    let mut pts = sweep.positions(beacon_count, disk_radius);
    for p in &mut pts {
        let two = T::of(2.0);
        let dx = (T::unit_uniform(&mut rng) * two - T::one()) * jitter;
        let dy = (T::unit_uniform(&mut rng) * two - T::one()) * jitter;
        *p = Point2::new(p.x + dx, p.y + dy);
        let r = p.radius();
        let limit = disk_radius * T::of(0.999);
        if r > limit {
            *p = p.scaled(limit / r);
        }
    }
    Ok(pts)
}

/// Solve the placement problem with the barrier method.
///
/// Returns the best positions found, the true worst-point power of that
/// deployment over the grid, iteration counts and a convergence trace. Runs
/// out of iterations return the best state flagged `converged = false`;
/// non-finite arithmetic surfaces as [`Error::SolverFailure`].
pub fn ipm_solve<T: Scalar>(
    beacon_count: usize,
    grid: &DiskGrid<T>,
    pl: &PathLoss<T>,
    power: T,
    disk_radius: T,
    config: &IpmConfig<T>,
    initial: Option<&[Point2<T>]>,
) -> Result<SolverReport<T>> {
    config.validate()?;
    if beacon_count == 0 {
        return Err(Error::invalid("beacon count must be at least 1"));
    }
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    let started = std::time::Instant::now();
    let r_sq = disk_radius * disk_radius;
    let k = config.smoothing_k;

    let mut positions = match initial {
        Some(p) => {
            if p.len() != beacon_count {
                return Err(Error::invalid("initial positions disagree with beacon count"));
            }
            p.to_vec()
        }
        None => initial_positions(beacon_count, disk_radius, pl, power, config)?,
    };

    let first = merit_at(&positions, grid, pl, power, k, T::zero(), r_sq, false)
        .ok_or_else(|| Error::SolverFailure("initial point infeasible or singular".into()))?;
    let f_ref = first.f;
    let grad_scale = f_ref / disk_radius;
    let tol = config.newton_tol * grad_scale * T::of((2 * beacon_count) as f64).sqrt();

    let mut mu = config.mu0_factor * f_ref;
    let mu_floor = config.mu_stop_factor * f_ref;
    let mut trace: Vec<TracePoint<T>> = Vec::new();
    let mut total_inner = 0usize;
    let mut converged_at_final_mu = false;

    for outer in 0..config.max_outer {
        let mut stationary = false;
        for _ in 0..config.max_inner {
            total_inner += 1;
            let cur = merit_at(&positions, grid, pl, power, k, mu, r_sq, true)
                .ok_or_else(|| Error::SolverFailure("iterate left the feasible set".into()))?;
            let grad_norm = cur
                .grad
                .iter()
                .map(|&g| g * g)
                .fold(T::zero(), |a, b| a + b)
                .sqrt();
            trace.push(TracePoint {
                iter: total_inner,
                objective: cur.f,
                residual_or_gbest: grad_norm,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
            });
            if !grad_norm.is_finite() {
                return Err(Error::SolverFailure(format!(
                    "non-finite gradient at outer iteration {outer}"
                )));
            }
            if grad_norm <= tol {
                stationary = true;
                break;
            }

            let hess = barrier_hessian(
                &positions,
                grid,
                pl,
                power,
                k,
                mu,
                &cur.slacks,
                config.fd_fallback,
            )?;
            let dim = 2 * beacon_count;
            let neg_grad: Vec<T> = cur.grad.iter().map(|&g| -g).collect();
            let (step, _shift) = solve_regularized(&hess, dim, &neg_grad);

            let slope: T = cur
                .grad
                .iter()
                .zip(&step)
                .map(|(&g, &s)| g * s)
                .fold(T::zero(), |a, b| a + b);
            let (dir, slope) = if slope < T::zero() {
                (step, slope)
            } else {
                // fall back to steepest descent if the modified system still
                // failed to produce a descent direction
                (neg_grad.clone(), -grad_norm * grad_norm)
            };

            let mut alpha = boundary_step(&positions, &dir, disk_radius);
            let mut moved = false;
            for _ in 0..60 {
                let candidate: Vec<Point2<T>> = positions
                    .iter()
                    .enumerate()
                    .map(|(b, p)| {
                        Point2::new(p.x + alpha * dir[2 * b], p.y + alpha * dir[2 * b + 1])
                    })
                    .collect();
                if let Some(next) =
                    merit_at(&candidate, grid, pl, power, k, mu, r_sq, false)
                {
                    if next.value <= cur.value + T::of(1e-4) * alpha * slope {
                        positions = candidate;
                        moved = true;
                        break;
                    }
                }
                alpha *= T::of(0.5);
            }
            if !moved {
                // no progress possible at this µ; accept the iterate
                stationary = grad_norm <= tol * T::of(100.0);
                break;
            }
        }
        let next_mu = mu * config.mu_decay;
        if mu <= mu_floor || outer + 1 == config.max_outer {
            converged_at_final_mu = stationary;
            break;
        }
        mu = next_mu;
    }

    let deployment = Deployment::new(
        positions.clone(),
        BeaconRadio::new(power, 1)?,
    )?;
    let (_, worst) = worst_mean_power(&deployment, grid, pl)?;
    let final_merit = merit_at(&positions, grid, pl, power, k, mu, r_sq, false)
        .ok_or_else(|| Error::SolverFailure("final iterate infeasible".into()))?;

    Ok(SolverReport {
        solver: SolverKind::Ipm,
        positions,
        per_beacon_power: power,
        worst_power: worst,
        surrogate_value: Some(final_merit.f),
        iterations: total_inner,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        converged: converged_at_final_mu,
        seed: Some(config.seed),
        trace,
    })
}
