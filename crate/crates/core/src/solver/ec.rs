//! Equally-far-from-center constellations and the radial sweep that picks
//! the best one.
//!
//! Two candidate topologies are considered at each ring radius `r`: all
//! beacons on one ring with uniform spacing `2π/|B|`, and all-but-one on a
//! ring spaced `2π/(|B|−1)` plus one beacon at the center. For either, the
//! worst-served location is one of a couple of closed-form candidate points,
//! so the whole sweep costs `O(|B|)` per step and no grid is involved.

use serde::{Deserialize, Serialize};

use crate::channel::PathLoss;
use crate::error::{Error, Result};
use crate::geometry::{angular_positions, Point2};
use crate::scalar::Scalar;

/// Constellation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EcVariant {
    /// All beacons on one ring.
    Ring,
    /// One beacon at the center, the rest on one ring.
    Centered,
}

/// One equally-far-from-center constellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcTopology<T = f64> {
    beacon_count: usize,
    variant: EcVariant,
    ring_radius: T,
    disk_radius: T,
}

impl<T: Scalar> EcTopology<T> {
    pub fn new(
        beacon_count: usize,
        variant: EcVariant,
        ring_radius: T,
        disk_radius: T,
    ) -> Result<Self> {
        if beacon_count == 0 {
            return Err(Error::invalid("beacon count must be at least 1"));
        }
        if variant == EcVariant::Centered && beacon_count < 2 {
            return Err(Error::invalid(
                "centered variant needs at least 2 beacons",
            ));
        }
        if !(disk_radius > T::zero()) {
            return Err(Error::invalid("disk radius must be positive"));
        }
        if ring_radius < T::zero() || ring_radius > disk_radius {
            return Err(Error::invalid("ring radius must lie in [0, R]"));
        }
        Ok(EcTopology {
            beacon_count,
            variant,
            ring_radius,
            disk_radius,
        })
    }

    pub fn beacon_count(&self) -> usize {
        self.beacon_count
    }

    pub fn variant(&self) -> EcVariant {
        self.variant
    }

    pub fn ring_radius(&self) -> T {
        self.ring_radius
    }

    pub fn disk_radius(&self) -> T {
        self.disk_radius
    }

    /// Number of beacons on the ring (excludes the centered one).
    pub fn ring_beacons(&self) -> usize {
        match self.variant {
            EcVariant::Ring => self.beacon_count,
            EcVariant::Centered => self.beacon_count - 1,
        }
    }

    /// Angle between adjacent ring beacons.
    pub fn angular_step(&self) -> T {
        T::TAU() / T::of(self.ring_beacons() as f64)
    }

    /// Beacon coordinates; ring beacons first, centered beacon (if any) last.
    pub fn positions(&self) -> Vec<Point2<T>> {
        let mut pts =
            angular_positions(self.ring_beacons(), self.ring_radius, T::zero()).unwrap();
        if self.variant == EcVariant::Centered {
            pts.push(Point2::origin());
        }
        pts
    }
}

/// The two squared-distance terms that appear in the stationarity analysis
/// of the edge power for a pair of adjacent ring beacons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStationaryTerms<T = f64> {
    /// `r² + R² − 2rR·cos(θ − φ)`
    pub m: T,
    /// `r² + R² − 2rR·cos(φ)`
    pub n: T,
}

impl<T: Scalar> EdgeStationaryTerms<T> {
    pub fn new(ring_radius: T, disk_radius: T, angular_step: T, phi: T) -> Self {
        let two = T::of(2.0);
        let rr = ring_radius * ring_radius + disk_radius * disk_radius;
        let cross = two * ring_radius * disk_radius;
        EdgeStationaryTerms {
            m: rr - cross * (angular_step - phi).cos(),
            n: rr - cross * phi.cos(),
        }
    }
}

/// Mean power at the edge point with polar angle `phi` for the given
/// constellation.
pub fn edge_power<T: Scalar>(
    topology: &EcTopology<T>,
    pl: &PathLoss<T>,
    power: T,
    phi: T,
) -> Result<T> {
    let r = topology.ring_radius;
    let big_r = topology.disk_radius;
    let theta = topology.angular_step();
    let half_gamma = pl.gamma() / T::of(2.0);
    let two = T::of(2.0);

    let mut sum = T::zero();
    for b in 0..topology.ring_beacons() {
        let d2 = r * r + big_r * big_r
            - two * r * big_r * (theta * T::of(b as f64) - phi).cos();
        if !(d2 > T::zero()) {
            return Err(Error::Singularity {
                x: (big_r * phi.cos()).as_f64(),
                y: (big_r * phi.sin()).as_f64(),
            });
        }
        sum += d2.powf(-half_gamma);
    }
    if topology.variant == EcVariant::Centered {
        sum += big_r.powf(-pl.gamma());
    }
    Ok(power * pl.k() * sum)
}

/// The surviving worst edge angle, `θ/2`.
pub fn worst_edge_angle<T: Scalar>(topology: &EcTopology<T>) -> T {
    topology.angular_step() / T::of(2.0)
}

/// Closed-form near-optimal ring radius `R·cos(π/|B|)`, clamped to `[0, R]`;
/// zero for one or two beacons (place at the center).
pub fn approx_ring_radius<T: Scalar>(beacon_count: usize, disk_radius: T) -> T {
    if beacon_count == 0 {
        return T::zero();
    }
    let r = disk_radius * (T::PI() / T::of(beacon_count as f64)).cos();
    r.max(T::zero()).min(disk_radius)
}

/// Candidate-point evaluator for one constellation family with everything
/// that does not depend on the ring radius hoisted out.
///
/// The worst-candidate angles sit at fixed offsets from the beacons, so the
/// cosines in the distance terms are constants of the family; the centered
/// variant's interior candidate scales entirely with `r` and collapses to a
/// single `r^(−γ)` factor. A radius sweep then costs `O(|B|)` power-law
/// evaluations per step.
struct VariantEval<T> {
    variant: EcVariant,
    beacon_count: usize,
    disk_radius: T,
    gamma: T,
    half_gamma: T,
    pk: T,
    /// `2R·cos(θ·b − θ/2)` per ring beacon (edge-candidate distance terms).
    edge_coef: Vec<T>,
    /// `c_x^(−γ) + Σ_b q_b^(−γ/2)` where the interior candidate sits at
    /// `x = c_x·r` and its squared distance to ring beacon `b` is `q_b·r²`.
    interior_const: T,
}

impl<T: Scalar> VariantEval<T> {
    fn new(
        beacon_count: usize,
        variant: EcVariant,
        disk_radius: T,
        pl: &PathLoss<T>,
        power: T,
    ) -> Result<Self> {
        let ring_beacons = match variant {
            EcVariant::Ring => beacon_count,
            EcVariant::Centered => beacon_count - 1,
        };
        let theta = T::TAU() / T::of(ring_beacons as f64);
        let half = theta / T::of(2.0);
        let two = T::of(2.0);
        let edge_coef: Vec<T> = (0..ring_beacons)
            .map(|b| two * disk_radius * (theta * T::of(b as f64) - half).cos())
            .collect();
        let interior_const = match variant {
            EcVariant::Ring => T::zero(),
            EcVariant::Centered => {
                let c_x = (two * half.cos()).recip();
                if !(c_x > T::zero()) || !c_x.is_finite() {
                    return Err(Error::invalid(
                        "interior candidate undefined for this angular step",
                    ));
                }
                let mut sum = c_x.powf(-pl.gamma());
                for b in 0..ring_beacons {
                    let cos = (theta * T::of(b as f64) - half).cos();
                    let q = c_x * c_x + T::one() - two * c_x * cos;
                    if !(q > T::zero()) {
                        return Err(Error::invalid("interior candidate touches a beacon"));
                    }
                    sum += q.powf(-pl.gamma() / two);
                }
                sum
            }
        };
        Ok(VariantEval {
            variant,
            beacon_count,
            disk_radius,
            gamma: pl.gamma(),
            half_gamma: pl.gamma() / two,
            pk: power * pl.k(),
            edge_coef,
            interior_const,
        })
    }

    /// Worst candidate-point power at ring radius `r`.
    fn worst_at(&self, r: T) -> Result<T> {
        let rr = r * r + self.disk_radius * self.disk_radius;
        let mut edge = T::zero();
        for &coef in &self.edge_coef {
            edge += (rr - coef * r).powf(-self.half_gamma);
        }
        match self.variant {
            EcVariant::Ring => {
                let edge = self.pk * edge;
                if r > T::zero() {
                    let center =
                        T::of(self.beacon_count as f64) * self.pk * r.powf(-self.gamma);
                    Ok(center.min(edge))
                } else {
                    Ok(edge)
                }
            }
            EcVariant::Centered => {
                if !(r > T::zero()) {
                    return Err(Error::invalid(
                        "centered variant degenerates at ring radius 0",
                    ));
                }
                let edge = self.pk * (self.disk_radius.powf(-self.gamma) + edge);
                let interior = self.pk * r.powf(-self.gamma) * self.interior_const;
                Ok(interior.min(edge))
            }
        }
    }
}

/// Mean power at the worst of the closed-form candidate points for the
/// topology.
///
/// Ring variant: the lesser of the center value `|B|·P·K·r^(−γ)` and the
/// worst edge value. Centered variant: the lesser of the interior point
/// equidistant from the center and two adjacent ring beacons and the worst
/// edge value. At `r = 0` the ring variant collapses to all-at-center and
/// only the edge term remains (distance `R`, no singularity).
pub fn worst_of_topology<T: Scalar>(
    topology: &EcTopology<T>,
    pl: &PathLoss<T>,
    power: T,
) -> Result<T> {
    VariantEval::new(
        topology.beacon_count,
        topology.variant,
        topology.disk_radius,
        pl,
        power,
    )?
    .worst_at(topology.ring_radius)
}

/// Result of the radial sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcSolution<T = f64> {
    /// Best ring radius; 0 means every beacon sits at the center.
    pub ring_radius: T,
    /// Angular step of the winning constellation.
    pub angular_step: T,
    /// Winning family; `None` when the all-at-center incumbent was never
    /// beaten.
    pub variant: Option<EcVariant>,
    /// Worst-point mean power of the winner.
    pub worst_power: T,
    /// Radii evaluated by the sweep.
    pub steps: usize,
}

impl<T: Scalar> EcSolution<T> {
    /// Beacon coordinates of the winning constellation.
    pub fn positions(&self, beacon_count: usize, disk_radius: T) -> Vec<Point2<T>> {
        match self.variant {
            None => vec![Point2::origin(); beacon_count],
            Some(v) => EcTopology::new(beacon_count, v, self.ring_radius, disk_radius)
                .expect("winning topology is valid")
                .positions(),
        }
    }
}

/// Radial sweep over candidate constellations.
///
/// Starts from the all-at-center incumbent `|B|·P·K·R^(−γ)` and scans ring
/// radii `Δr, 2Δr, …  < R`, keeping the best worst-point power. The centered
/// variant enters at `|B| ≥ 3` (with fewer beacons it has no ring pair to
/// define the interior candidate). Ties keep the earlier incumbent, so the
/// result is deterministic and the returned power never drops below the
/// benchmark. The radius error of the winner is bounded by the step size.
pub fn ode_pobes<T: Scalar>(
    beacon_count: usize,
    disk_radius: T,
    pl: &PathLoss<T>,
    power: T,
    delta_r: T,
) -> Result<EcSolution<T>> {
    if beacon_count == 0 {
        return Err(Error::invalid("beacon count must be at least 1"));
    }
    if !(delta_r > T::zero()) {
        return Err(Error::invalid("sweep step must be positive"));
    }
    if !(disk_radius > T::zero()) {
        return Err(Error::invalid("disk radius must be positive"));
    }

    let benchmark =
        T::of(beacon_count as f64) * power * pl.k() * disk_radius.powf(-pl.gamma());
    let mut best = EcSolution {
        ring_radius: T::zero(),
        angular_step: T::TAU() / T::of(beacon_count as f64),
        variant: None,
        worst_power: benchmark,
        steps: 0,
    };

    let ring_eval = VariantEval::new(beacon_count, EcVariant::Ring, disk_radius, pl, power)?;
    let centered_eval = if beacon_count >= 3 {
        Some(VariantEval::new(
            beacon_count,
            EcVariant::Centered,
            disk_radius,
            pl,
            power,
        )?)
    } else {
        None
    };

    let mut step = 1usize;
    loop {
        let r = delta_r * T::of(step as f64);
        if r >= disk_radius {
            break;
        }
        best.steps += 1;

        let mut val = ring_eval.worst_at(r)?;
        let mut variant = EcVariant::Ring;
        if let Some(centered) = &centered_eval {
            let centered_val = centered.worst_at(r)?;
            // ties prefer the plain ring
            if centered_val > val {
                val = centered_val;
                variant = EcVariant::Centered;
            }
        }
        if val > best.worst_power {
            best.worst_power = val;
            best.ring_radius = r;
            best.variant = Some(variant);
            best.angular_step = T::TAU()
                / T::of(match variant {
                    EcVariant::Ring => beacon_count,
                    EcVariant::Centered => beacon_count - 1,
                } as f64);
        }
        step += 1;
    }
    Ok(best)
}
