//! The experiment commands. Each one writes its tables plus a run manifest
//! into the output directory and reports whether everything completed.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use wetplan_core::channel::{mix_seed, BeaconRadio, Deployment};
use wetplan_core::objective::evaluate_field;
use wetplan_core::planner::{
    antenna_study, max_coverage_radius, min_beacons, AreaSpec, CoverageOutcome,
};
use wetplan_core::solver::{SolverKind, SolverReport};

use crate::config::{watts_to_dbm, RunConfig};
use crate::output::{write_json, write_manifest, Csv};

#[derive(Serialize)]
struct PositionRow {
    b: usize,
    x_m: f64,
    y_m: f64,
}

#[derive(Serialize)]
struct ReportJson {
    solver: &'static str,
    beacons: usize,
    per_beacon_power_w: f64,
    total_power_w: f64,
    worst_power_w: f64,
    worst_power_dbm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    surrogate_value_w: Option<f64>,
    iterations: usize,
    wall_ms: f64,
    converged: bool,
    seed: Option<u64>,
    positions: Vec<PositionRow>,
}

impl ReportJson {
    fn new(report: &SolverReport<f64>, total_power: f64) -> Self {
        ReportJson {
            solver: report.solver.name(),
            beacons: report.positions.len(),
            per_beacon_power_w: report.per_beacon_power,
            total_power_w: total_power,
            worst_power_w: report.worst_power,
            worst_power_dbm: watts_to_dbm(report.worst_power),
            surrogate_value_w: report.surrogate_value,
            iterations: report.iterations,
            wall_ms: report.wall_ms,
            converged: report.converged,
            seed: report.seed,
            positions: report
                .positions
                .iter()
                .enumerate()
                .map(|(i, p)| PositionRow {
                    b: i + 1,
                    x_m: p.x,
                    y_m: p.y,
                })
                .collect(),
        }
    }
}

fn write_positions(dir: &Path, report: &SolverReport<f64>) -> anyhow::Result<()> {
    let mut csv = Csv::new("b,x,y");
    for (i, p) in report.positions.iter().enumerate() {
        let b = i + 1;
        csv.row(&[&b, &p.x, &p.y]);
    }
    csv.write(dir, "positions.csv")?;
    Ok(())
}

fn write_trace(dir: &Path, report: &SolverReport<f64>) -> anyhow::Result<()> {
    if report.trace.is_empty() {
        return Ok(());
    }
    let mut csv = Csv::new("iter,objective,residual_or_gbest,wall_ms");
    for t in &report.trace {
        csv.row(&[&t.iter, &t.objective, &t.residual_or_gbest, &t.wall_ms]);
    }
    csv.write(dir, "trace.csv")?;
    Ok(())
}

/// Solve one placement and write positions, report, optional heatmap and
/// convergence trace.
pub fn cmd_optimize(config: &RunConfig) -> anyhow::Result<bool> {
    let dir = Path::new(&config.out_dir);
    let kind = config.solver_kind();
    let seed = match kind {
        SolverKind::Ipm | SolverKind::Pso => {
            config.require_seed("the selected solver is stochastic")?
        }
        _ => config.seed.unwrap_or(0),
    };
    let beacons = config.beacons;
    let power = config.total_power_w / beacons as f64;
    let grid = Arc::new(config.grid_spec().build(config.radius_m)?);
    let report = config.solver_choice(kind).solve(
        beacons,
        &grid,
        &config.path_loss()?,
        power,
        config.radius_m,
        seed,
    )?;

    write_positions(dir, &report)?;
    write_trace(dir, &report)?;
    write_json(dir, "report.json", &ReportJson::new(&report, config.total_power_w))?;
    if config.heatmap {
        let deployment = Deployment::new(
            report.positions.clone(),
            BeaconRadio::new(power, config.antenna_count)?,
        )?;
        let field = evaluate_field(&deployment, grid, &config.path_loss()?)?;
        let mut buf = Vec::new();
        field.write_csv(&mut buf)?;
        crate::output::write_atomic(dir, "heatmap.csv", &buf)?;
    }
    write_manifest(dir, "optimize", config)?;
    if !report.converged {
        eprintln!("solver did not converge; best-effort result written");
    }
    println!(
        "{}: worst point {:.6e} W ({:.2} dBm) with {} beacons",
        report.solver.name(),
        report.worst_power,
        watts_to_dbm(report.worst_power),
        beacons
    );
    Ok(report.converged)
}

/// Worst-point power and wall time per beacon count and solver, with times
/// normalized to the ring sweep. Per-solver failures leave empty cells and
/// the run keeps going.
pub fn cmd_compare(config: &RunConfig) -> anyhow::Result<bool> {
    let dir = Path::new(&config.out_dir);
    let seed = config.require_seed("the comparison includes stochastic solvers")?;
    let grid = Arc::new(config.grid_spec().build(config.radius_m)?);
    let pl = config.path_loss()?;
    let kinds = [
        SolverKind::OdePobes,
        SolverKind::Ipm,
        SolverKind::Pso,
        SolverKind::CenteredBenchmark,
    ];
    let mut csv = Csv::new("beacons,solver,worst_power_w,worst_power_dbm,wall_ms,time_vs_sweep,converged");
    let mut all_ok = true;
    for b in config.beacon_range_min..=config.beacon_range_max {
        let power = config.total_power_w / b as f64;
        let mut sweep_ms = None;
        for kind in kinds {
            let result = config.solver_choice(kind).solve(
                b,
                &grid,
                &pl,
                power,
                config.radius_m,
                mix_seed(seed, b as u64),
            );
            match result {
                Ok(report) => {
                    if kind == SolverKind::OdePobes {
                        sweep_ms = Some(report.wall_ms);
                    }
                    let norm = sweep_ms.map(|s| report.wall_ms / s);
                    let norm_text =
                        norm.map_or(String::new(), |n| n.to_string());
                    let dbm = watts_to_dbm(report.worst_power);
                    csv.row(&[
                        &b,
                        &kind.name(),
                        &report.worst_power,
                        &dbm,
                        &report.wall_ms,
                        &norm_text,
                        &report.converged,
                    ]);
                    all_ok &= report.converged;
                }
                Err(e) => {
                    eprintln!("{} failed at {b} beacons: {e}", kind.name());
                    let empty = String::new();
                    csv.row(&[&b, &kind.name(), &empty, &empty, &empty, &empty, &false]);
                    all_ok = false;
                }
            }
        }
    }
    csv.write(dir, "compare.csv")?;
    write_manifest(dir, "compare", config)?;
    Ok(all_ok)
}

/// Minimum beacon count per (ζ, R) setting.
pub fn cmd_min_beacons(config: &RunConfig) -> anyhow::Result<bool> {
    let dir = Path::new(&config.out_dir);
    let seed = config.require_seed("outage estimation is stochastic")?;
    let kind = config.solver_kind();
    let solver = config.solver_choice(kind);
    let zetas = config.zeta_list.clone().unwrap_or_else(|| vec![config.zeta]);
    let radii = config
        .radius_list_m
        .clone()
        .unwrap_or_else(|| vec![config.radius_m]);
    let mut csv = Csv::new(
        "zeta,radius_m,solver,min_beacons,feasible,outage,ci_half_width_95,samples",
    );
    let mut all_ok = true;
    for (zi, &zeta) in zetas.iter().enumerate() {
        for (ri, &radius) in radii.iter().enumerate() {
            let area = AreaSpec::new(
                radius,
                config.path_loss()?,
                wetplan_core::channel::RicianFading::new(config.kappa)?,
                config.total_power_w,
                config.xi0_w(),
                zeta,
            )?;
            let grid = config.grid_spec().build(radius)?;
            let res = min_beacons(
                &area,
                &grid,
                &solver,
                config.antenna_count,
                config.samples,
                mix_seed(seed, (zi * 1000 + ri) as u64),
                config.min_beacons_cap,
            )?;
            all_ok &= res.report.converged;
            csv.row(&[
                &zeta,
                &radius,
                &kind.name(),
                &res.beacon_count,
                &res.feasible,
                &res.outage.probability,
                &res.outage.half_width_95,
                &res.outage.samples,
            ]);
            println!(
                "zeta {zeta}, R {radius} m: |B|min = {}{}",
                res.beacon_count,
                if res.feasible { "" } else { " (cap reached, infeasible)" }
            );
        }
    }
    csv.write(dir, "min_beacons.csv")?;
    write_manifest(dir, "min-beacons", config)?;
    Ok(all_ok)
}

/// Maximum coverage radius per beacon count, against the centered-budget
/// closed form.
pub fn cmd_coverage(config: &RunConfig) -> anyhow::Result<bool> {
    let dir = Path::new(&config.out_dir);
    let kind = config.solver_kind();
    let seed = match kind {
        SolverKind::Ipm | SolverKind::Pso => {
            config.require_seed("the selected solver is stochastic")?
        }
        _ => config.seed.unwrap_or(0),
    };
    let solver = config.solver_choice(kind);
    let pl = config.path_loss()?;
    let xi0 = config.xi0_w();
    let centered = (config.total_power_w * config.path_loss_k / xi0).powf(1.0 / config.gamma);
    let mut csv = Csv::new(
        "beacons,solver,r_max_m,worst_power_w_at_r_max,centered_r_max_m,area_ratio,feasible",
    );
    let mut all_ok = true;
    for &b in &config.coverage_beacon_list {
        let out = max_coverage_radius(
            b,
            &pl,
            config.total_power_w,
            xi0,
            &solver,
            &config.grid_spec(),
            config.coverage_tolerance_m,
            mix_seed(seed, b as u64),
        )?;
        match out {
            CoverageOutcome::Feasible { r_max, worst_power } => {
                let ratio = (r_max / centered).powi(2);
                csv.row(&[&b, &kind.name(), &r_max, &worst_power, &centered, &ratio, &true]);
                println!("B = {b}: R_max = {r_max:.2} m ({ratio:.3}x the centered area)");
            }
            CoverageOutcome::Infeasible { probed_r, worst_power } => {
                all_ok = false;
                let empty = String::new();
                csv.row(&[&b, &kind.name(), &empty, &worst_power, &centered, &empty, &false]);
                println!("B = {b}: infeasible down to R = {probed_r} m");
            }
        }
    }
    csv.write(dir, "coverage.csv")?;
    write_manifest(dir, "coverage", config)?;
    Ok(all_ok)
}

/// Outage matrix over beacon and antenna counts.
pub fn cmd_antennas(config: &RunConfig) -> anyhow::Result<bool> {
    let dir = Path::new(&config.out_dir);
    let seed = config.require_seed("outage estimation is stochastic")?;
    let area = config.area()?;
    let grid = config.grid_spec().build(config.radius_m)?;
    let cells = antenna_study(
        &area,
        &grid,
        &config.antenna_beacon_list,
        &config.antenna_list,
        config.samples,
        seed,
    )?;
    let mut csv = Csv::new("beacons,antennas,outage,ci_half_width_95,samples");
    for c in &cells {
        csv.row(&[
            &c.beacon_count,
            &c.antenna_count,
            &c.outage.probability,
            &c.outage.half_width_95,
            &c.outage.samples,
        ]);
    }
    csv.write(dir, "antennas.csv")?;
    write_manifest(dir, "antennas", config)?;
    Ok(true)
}

/// Export the evaluation grid.
pub fn cmd_grid_export(config: &RunConfig) -> anyhow::Result<bool> {
    let dir = Path::new(&config.out_dir);
    let grid = config.grid_spec().build(config.radius_m)?;
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)?;
    crate::output::write_atomic(dir, "grid.csv", &buf)?;
    write_manifest(dir, "grid-export", config)?;
    println!("wrote {} grid points", grid.len());
    Ok(true)
}
