//! Points in the plane and the disk discretization that stands in for the
//! unknown harvester population.
//!
//! The service area is a disk of radius `R`. Because harvester positions are
//! unknown, placement quality is judged on a deterministic set of proxy
//! points: concentric rings with per-ring point counts proportional to the
//! ring circumference, plus the exact disk center.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A 2-D point in Cartesian coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }

    pub fn origin() -> Self {
        Point2 {
            x: T::zero(),
            y: T::zero(),
        }
    }

    /// Build from polar form `(r, phi)`; `phi` in radians.
    pub fn from_polar(r: T, phi: T) -> Self {
        Point2 {
            x: r * phi.cos(),
            y: r * phi.sin(),
        }
    }

    /// Distance from the origin.
    pub fn radius(self) -> T {
        self.x.hypot(self.y)
    }

    /// Squared distance from the origin.
    pub fn norm_sq(self) -> T {
        self.x * self.x + self.y * self.y
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(self) -> T {
        let a = self.y.atan2(self.x);
        if a < T::zero() {
            a + T::TAU()
        } else {
            a
        }
    }

    pub fn distance(self, other: Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rotate about the origin by `angle` radians.
    pub fn rotated(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Point2 {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn scaled(self, factor: T) -> Self {
        Point2 {
            x: self.x * factor,
            y: self.y * factor,
        }
    }
}

impl<T: Scalar> std::ops::Add for Point2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> std::ops::Sub for Point2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Disk discretization: ring `j` of `ring_count` sits at radius
/// `j·R/ring_count` and carries `max(6, round(density·circumference))`
/// equally spaced points starting at angle 0; ring 0 is the single center
/// point. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskGrid<T = f64> {
    radius: T,
    ring_count: usize,
    points: Vec<Point2<T>>,
    ring_sizes: Vec<usize>,
}

impl<T: Scalar> DiskGrid<T> {
    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn ring_count(&self) -> usize {
        self.ring_count
    }

    /// Number of proxy points, `|S|`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    /// Points per ring, center ring first.
    pub fn ring_sizes(&self) -> &[usize] {
        &self.ring_sizes
    }

    /// Export as CSV with header `x,y,r,phi`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,r,phi")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.x, p.y, p.radius(), p.angle())?;
        }
        Ok(())
    }
}

/// Build the proxy grid for a disk of the given radius.
///
/// `density` is in points per meter of ring circumference. The center is
/// always a single point, so thin grids still observe the exact middle of
/// the area.
pub fn make_disk_grid<T: Scalar>(radius: T, ring_count: usize, density: T) -> Result<DiskGrid<T>> {
    if !(radius > T::zero()) {
        return Err(Error::invalid("grid radius must be positive"));
    }
    if ring_count == 0 {
        return Err(Error::invalid("ring count must be at least 1"));
    }
    if !(density > T::zero()) {
        return Err(Error::invalid("grid density must be positive"));
    }

    let mut points = vec![Point2::origin()];
    let mut ring_sizes = vec![1usize];
    for j in 1..=ring_count {
        let r = radius * T::of(j as f64) / T::of(ring_count as f64);
        let circumference = T::TAU() * r;
        let n = (density * circumference).round().as_f64().max(0.0) as usize;
        let n = n.max(6);
        ring_sizes.push(n);
        for i in 0..n {
            let phi = T::TAU() * T::of(i as f64) / T::of(n as f64);
            points.push(Point2::from_polar(r, phi));
        }
    }

    Ok(DiskGrid {
        radius,
        ring_count,
        points,
        ring_sizes,
    })
}

/// Pick a density so the grid lands close to `target` total points.
///
/// The total is `1 + Σ_j max(6, round(density·2π·jR/m))`, which away from the
/// 6-point floor is approximately `1 + density·πR(m+1)`.
pub fn density_for_target<T: Scalar>(radius: T, ring_count: usize, target: usize) -> T {
    let m = ring_count as f64;
    let guess = (target.max(2) as f64 - 1.0) / (std::f64::consts::PI * radius.as_f64() * (m + 1.0));
    T::of(guess)
}

/// `beacon_count` points on a ring of `ring_radius`, uniformly spaced by
/// `2π/beacon_count` starting at `offset` radians.
pub fn angular_positions<T: Scalar>(
    beacon_count: usize,
    ring_radius: T,
    offset: T,
) -> Result<Vec<Point2<T>>> {
    if beacon_count == 0 {
        return Err(Error::invalid("beacon count must be at least 1"));
    }
    if ring_radius < T::zero() {
        return Err(Error::invalid("ring radius must be non-negative"));
    }
    let step = T::TAU() / T::of(beacon_count as f64);
    Ok((0..beacon_count)
        .map(|b| Point2::from_polar(ring_radius, offset + step * T::of(b as f64)))
        .collect())
}
