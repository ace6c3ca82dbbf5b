//! Run configuration: a flat key/value JSON document with units embedded in
//! the key names. Unknown keys are rejected so typos cannot silently fall
//! back to defaults.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use wetplan_core::channel::{PathLoss, RicianFading};
use wetplan_core::planner::{AreaSpec, GridDensity, GridSpec};
use wetplan_core::solver::ipm::IpmConfig;
use wetplan_core::solver::pso::PsoConfig;
use wetplan_core::solver::{SolverChoice, SolverKind};

fn default_radius() -> f64 {
    100.0
}
fn default_power() -> f64 {
    10.0
}
fn default_xi0_dbm() -> f64 {
    -22.0
}
fn default_k() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    3.0
}
fn default_kappa() -> f64 {
    3.0
}
fn default_zeta() -> f64 {
    1e-3
}
fn default_grid_rings() -> usize {
    12
}
fn default_grid_target() -> usize {
    1000
}
fn default_solver() -> String {
    "ode-pobes".into()
}
fn default_samples() -> u64 {
    1_000_000
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_beacons() -> usize {
    3
}
fn default_beacon_range_min() -> usize {
    1
}
fn default_beacon_range_max() -> usize {
    6
}
fn default_smoothing_k() -> f64 {
    -25.0
}
fn default_mu0_factor() -> f64 {
    1e-2
}
fn default_mu_decay() -> f64 {
    0.2
}
fn default_mu_stop_factor() -> f64 {
    1e-8
}
fn default_newton_tol() -> f64 {
    1e-6
}
fn default_max_outer() -> usize {
    20
}
fn default_max_inner() -> usize {
    50
}
fn default_init_jitter() -> f64 {
    0.01
}
fn default_swarm_size() -> usize {
    50
}
fn default_inertia() -> f64 {
    0.729
}
fn default_attraction() -> f64 {
    1.49445
}
fn default_pso_max_iters() -> usize {
    500
}
fn default_pso_stall() -> usize {
    100
}
fn default_velocity_clamp() -> f64 {
    0.2
}
fn default_cap() -> usize {
    15
}
fn default_antenna_count() -> usize {
    1
}
fn default_coverage_beacons() -> Vec<usize> {
    vec![1, 3, 7, 10]
}
fn default_coverage_tolerance() -> f64 {
    0.1
}
fn default_antenna_beacons() -> Vec<usize> {
    vec![1, 2, 3, 4]
}
fn default_antennas() -> Vec<usize> {
    vec![1, 2, 4, 8]
}
/// Everything a run needs, fully resolved before any computation starts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // area
    #[serde(default = "default_radius")]
    pub radius_m: f64,
    #[serde(default = "default_power")]
    pub total_power_w: f64,
    #[serde(default = "default_xi0_dbm")]
    pub xi0_dbm: f64,
    #[serde(default = "default_k")]
    pub path_loss_k: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    // grid
    #[serde(default = "default_grid_rings")]
    pub grid_rings: usize,
    #[serde(default)]
    pub grid_points_per_m: Option<f64>,
    #[serde(default = "default_grid_target")]
    pub grid_target_points: usize,
    // run
    #[serde(default = "default_solver")]
    pub solver: String,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default = "default_beacons")]
    pub beacons: usize,
    #[serde(default = "default_beacon_range_min")]
    pub beacon_range_min: usize,
    #[serde(default = "default_beacon_range_max")]
    pub beacon_range_max: usize,
    #[serde(default)]
    pub heatmap: bool,
    #[serde(default)]
    pub delta_r_m: Option<f64>,
    // smoothed objective / interior point
    #[serde(default = "default_smoothing_k")]
    pub smoothing_k: f64,
    #[serde(default = "default_mu0_factor")]
    pub ipm_mu0_factor: f64,
    #[serde(default = "default_mu_decay")]
    pub ipm_mu_decay: f64,
    #[serde(default = "default_mu_stop_factor")]
    pub ipm_mu_stop_factor: f64,
    #[serde(default = "default_newton_tol")]
    pub ipm_newton_tol: f64,
    #[serde(default = "default_max_outer")]
    pub ipm_max_outer: usize,
    #[serde(default = "default_max_inner")]
    pub ipm_max_inner: usize,
    #[serde(default)]
    pub ipm_fd_fallback: bool,
    #[serde(default)]
    pub ipm_random_init: bool,
    #[serde(default = "default_init_jitter")]
    pub ipm_init_jitter: f64,
    // particle swarm
    #[serde(default = "default_swarm_size")]
    pub pso_swarm_size: usize,
    #[serde(default = "default_inertia")]
    pub pso_inertia: f64,
    #[serde(default = "default_attraction")]
    pub pso_cognitive: f64,
    #[serde(default = "default_attraction")]
    pub pso_social: f64,
    #[serde(default)]
    pub pso_epsilon_w: Option<f64>,
    #[serde(default = "default_pso_max_iters")]
    pub pso_max_iters: usize,
    #[serde(default = "default_pso_stall")]
    pub pso_stall_iters: usize,
    #[serde(default = "default_velocity_clamp")]
    pub pso_velocity_clamp: f64,
    // planning
    #[serde(default = "default_cap")]
    pub min_beacons_cap: usize,
    #[serde(default = "default_antenna_count")]
    pub antenna_count: usize,
    #[serde(default)]
    pub zeta_list: Option<Vec<f64>>,
    #[serde(default)]
    pub radius_list_m: Option<Vec<f64>>,
    #[serde(default = "default_coverage_beacons")]
    pub coverage_beacon_list: Vec<usize>,
    #[serde(default = "default_coverage_tolerance")]
    pub coverage_tolerance_m: f64,
    #[serde(default = "default_antenna_beacons")]
    pub antenna_beacon_list: Vec<usize>,
    #[serde(default = "default_antennas")]
    pub antenna_list: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults parse")
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.radius_m <= 0.0 {
            bail!("radius_m must be positive");
        }
        if self.total_power_w <= 0.0 {
            bail!("total_power_w must be positive");
        }
        if !(0.0 < self.zeta && self.zeta < 1.0) {
            bail!("zeta must lie in (0, 1)");
        }
        if self.beacons == 0 {
            bail!("beacons must be at least 1");
        }
        if self.beacon_range_min == 0
            || self.beacon_range_max > 15
            || self.beacon_range_min > self.beacon_range_max
        {
            bail!("beacon range must satisfy 1 <= min <= max <= 15");
        }
        self.solver
            .parse::<SolverKind>()
            .map_err(anyhow::Error::msg)?;
        Ok(())
    }

    /// Sensitivity in watts: `10^((dBm − 30)/10)`.
    pub fn xi0_w(&self) -> f64 {
        10f64.powf((self.xi0_dbm - 30.0) / 10.0)
    }

    pub fn path_loss(&self) -> anyhow::Result<PathLoss<f64>> {
        Ok(PathLoss::new(self.path_loss_k, self.gamma)?)
    }

    pub fn area(&self) -> anyhow::Result<AreaSpec<f64>> {
        Ok(AreaSpec::new(
            self.radius_m,
            self.path_loss()?,
            RicianFading::new(self.kappa)?,
            self.total_power_w,
            self.xi0_w(),
            self.zeta,
        )?)
    }

    pub fn grid_spec(&self) -> GridSpec<f64> {
        GridSpec {
            ring_count: self.grid_rings,
            density: match self.grid_points_per_m {
                Some(d) => GridDensity::PerMeter(d),
                None => GridDensity::TargetPoints(self.grid_target_points),
            },
        }
    }

    pub fn solver_kind(&self) -> SolverKind {
        self.solver.parse().expect("validated at load time")
    }

    pub fn solver_choice(&self, kind: SolverKind) -> SolverChoice<f64> {
        match kind {
            SolverKind::OdePobes => SolverChoice::OdePobes {
                delta_r: self.delta_r_m,
            },
            SolverKind::CenteredBenchmark => SolverChoice::CenteredBenchmark,
            SolverKind::Ipm => SolverChoice::Ipm(IpmConfig {
                smoothing_k: self.smoothing_k,
                mu0_factor: self.ipm_mu0_factor,
                mu_decay: self.ipm_mu_decay,
                mu_stop_factor: self.ipm_mu_stop_factor,
                newton_tol: self.ipm_newton_tol,
                max_outer: self.ipm_max_outer,
                max_inner: self.ipm_max_inner,
                fd_fallback: self.ipm_fd_fallback,
                random_init: self.ipm_random_init,
                init_jitter: self.ipm_init_jitter,
                seed: self.seed.unwrap_or(0),
            }),
            SolverKind::Pso => SolverChoice::Pso(PsoConfig {
                swarm_size: self.pso_swarm_size,
                inertia: self.pso_inertia,
                cognitive: self.pso_cognitive,
                social: self.pso_social,
                epsilon: self.pso_epsilon_w,
                max_iters: self.pso_max_iters,
                stall_iters: self.pso_stall_iters,
                velocity_clamp: self.pso_velocity_clamp,
            }),
        }
    }

    /// Commands that draw random numbers must be seeded explicitly so runs
    /// are reproducible.
    pub fn require_seed(&self, why: &str) -> anyhow::Result<u64> {
        self.seed
            .ok_or_else(|| anyhow::anyhow!("a --seed (or config `seed`) is required: {why}"))
    }

    /// FNV-1a hash of the canonical JSON form, for the run manifest.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in canonical.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}

/// Reporting-side conversion; planning math stays in watts.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}
