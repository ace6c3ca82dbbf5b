//! Propagation model: power-law path loss, Rician small-scale fading, and
//! the resulting deterministic and sampled incident power at a point.
//!
//! Beacons transmit independent signals, so mean powers superpose. With
//! multiple antennas a beacon cycles through them, one antenna radiating at
//! full power for an equal share of the block; draws from different antennas
//! fade independently, which keeps the mean and shrinks the variance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::Scalar;

/// Path-loss law `gain(d) = K·d^(−γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss<T = f64> {
    k: T,
    gamma: T,
}

impl<T: Scalar> PathLoss<T> {
    pub fn new(k: T, gamma: T) -> Result<Self> {
        if !(k > T::zero()) {
            return Err(Error::invalid("path-loss constant K must be positive"));
        }
        if !(gamma > T::zero()) {
            return Err(Error::invalid("path-loss exponent must be positive"));
        }
        Ok(PathLoss { k, gamma })
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }
}

/// Dimensionless channel gain at distance `d` meters.
///
/// The law is singular at `d = 0`; callers must keep beacons away from the
/// points they evaluate. Clamping here would silently corrupt optimizer
/// gradients, so coincidence is an error instead.
pub fn path_gain<T: Scalar>(d: T, pl: &PathLoss<T>) -> Result<T> {
    if !(d > T::zero()) {
        return Err(Error::Singularity { x: 0.0, y: 0.0 });
    }
    Ok(pl.k * d.powf(-pl.gamma))
}

/// Rician fading with factor `kappa`: `h = α + jβ` with `α, β` independent
/// Gaussians of mean `√(κ/(2(1+κ)))` and variance `1/(2(1+κ))`, so that
/// `E[|h|²] = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianFading<T = f64> {
    kappa: T,
    mean: T,
    sigma: T,
}

impl<T: Scalar> RicianFading<T> {
    pub fn new(kappa: T) -> Result<Self> {
        if kappa < T::zero() {
            return Err(Error::invalid("Rician factor must be non-negative"));
        }
        let two = T::of(2.0);
        let denom = two * (T::one() + kappa);
        Ok(RicianFading {
            kappa,
            mean: (kappa / denom).sqrt(),
            sigma: denom.recip().sqrt(),
        })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// Mean of the real (and imaginary) component.
    pub fn component_mean(&self) -> T {
        self.mean
    }

    /// Standard deviation of each component.
    pub fn component_sigma(&self) -> T {
        self.sigma
    }

    /// Draw one fading component (the real or imaginary part of `h`).
    pub fn sample_component<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.mean + self.sigma * T::standard_normal(rng)
    }

    /// Draw one squared channel magnitude `|h|²`.
    pub fn sample_h_squared<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let a = self.sample_component(rng);
        let b = self.sample_component(rng);
        a * a + b * b
    }
}

/// Transmit hardware of one beacon: per-beacon power and antenna count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeaconRadio<T = f64> {
    power: T,
    antenna_count: usize,
}

impl<T: Scalar> BeaconRadio<T> {
    pub fn new(power: T, antenna_count: usize) -> Result<Self> {
        if !(power > T::zero()) {
            return Err(Error::invalid("beacon power must be positive"));
        }
        if antenna_count == 0 {
            return Err(Error::invalid("antenna count must be at least 1"));
        }
        Ok(BeaconRadio {
            power,
            antenna_count,
        })
    }

    pub fn power(&self) -> T {
        self.power
    }

    pub fn antenna_count(&self) -> usize {
        self.antenna_count
    }
}

/// A set of beacon positions sharing one radio configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment<T = f64> {
    positions: Vec<Point2<T>>,
    radio: BeaconRadio<T>,
}

impl<T: Scalar> Deployment<T> {
    pub fn new(positions: Vec<Point2<T>>, radio: BeaconRadio<T>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("deployment needs at least one beacon"));
        }
        Ok(Deployment { positions, radio })
    }

    pub fn positions(&self) -> &[Point2<T>] {
        &self.positions
    }

    pub fn beacon_count(&self) -> usize {
        self.positions.len()
    }

    pub fn radio(&self) -> &BeaconRadio<T> {
        &self.radio
    }

    /// Per-beacon transmit power.
    pub fn power(&self) -> T {
        self.radio.power
    }

    pub fn antenna_count(&self) -> usize {
        self.radio.antenna_count
    }
}

fn singularity_at<T: Scalar>(u: Point2<T>) -> Error {
    Error::Singularity {
        x: u.x.as_f64(),
        y: u.y.as_f64(),
    }
}

/// Mean incident RF power at `u`: `P·K·Σ_b ‖u − n_b‖^(−γ)` (watts).
pub fn mean_incident_power<T: Scalar>(
    u: Point2<T>,
    deployment: &Deployment<T>,
    pl: &PathLoss<T>,
) -> Result<T> {
    let mut sum = T::zero();
    for &n in deployment.positions() {
        let d = u.distance(n);
        if !(d > T::zero()) {
            return Err(singularity_at(u));
        }
        sum += d.powf(-pl.gamma());
    }
    Ok(deployment.power() * pl.k() * sum)
}

/// One stochastic draw of the incident power at `u`.
///
/// Single antenna: `P·Σ_b ϱ_b·|h_b|²` with a fresh independent channel per
/// beacon. With `|A| > 1` antennas each antenna radiates at full power for
/// `1/|A|` of the block, so the draw is `(P/|A|)·Σ_b ϱ_b·Σ_a |h_{b,a}|²`.
pub fn sample_incident_power<T: Scalar, R: Rng + ?Sized>(
    u: Point2<T>,
    deployment: &Deployment<T>,
    pl: &PathLoss<T>,
    fading: &RicianFading<T>,
    rng: &mut R,
) -> Result<T> {
    let antennas = deployment.antenna_count();
    let mut sum = T::zero();
    for &n in deployment.positions() {
        let d = u.distance(n);
        if !(d > T::zero()) {
            return Err(singularity_at(u));
        }
        let rho = pl.k() * d.powf(-pl.gamma());
        let mut h2 = T::zero();
        for _ in 0..antennas {
            h2 += fading.sample_h_squared(rng);
        }
        sum += rho * h2;
    }
    Ok(deployment.power() / T::of(antennas as f64) * sum)
}

/// Seeded RNG for stream `stream` of a run seeded with `seed`.
///
/// Streams with distinct indices are independent, so Monte Carlo batches can
/// run in parallel and still merge to the same counts for any thread count.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive a sub-seed for a named stage of a larger experiment (splitmix64).
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(tag.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
