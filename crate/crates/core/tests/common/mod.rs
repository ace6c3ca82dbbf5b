//! Independent oracles shared by the integration suites.
//!
//! Everything here deliberately avoids the library's own differentiation and
//! sampling paths: the gradient oracle is a central difference of the plain
//! surrogate value, and the distribution oracle evaluates the noncentral
//! chi-squared CDF by a Poisson-weighted incomplete-gamma series.

#![allow(dead_code)]

use std::sync::Arc;

use wetplan_core::channel::{BeaconRadio, Deployment, PathLoss};
use wetplan_core::geometry::{DiskGrid, Point2};
use wetplan_core::objective::{evaluate_field, smoothed_min, SmoothingSpec};

/// Lanczos log-gamma (g = 7, n = 9), accurate to ~1e-13 for x > 0.
#[allow(clippy::excessive_precision)]
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // series representation
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..500 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * (-x + a * x.ln() - ln_gamma(a)).exp()
    } else {
        // continued fraction for Q(a, x), modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = (-x + a * x.ln() - ln_gamma(a)).exp() * h;
        1.0 - q
    }
}

/// CDF of the noncentral chi-squared distribution with `df` degrees of
/// freedom and noncentrality `lambda`, via the Poisson mixture
/// `Σ_j pois(j; λ/2)·P(df/2 + j, x/2)`.
pub fn noncentral_chi2_cdf(x: f64, df: f64, lambda: f64) -> f64 {
    assert!(df > 0.0 && lambda >= 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    let half_l = 0.5 * lambda;
    let half_x = 0.5 * x;
    let mut sum = 0.0;
    let mut log_w = -half_l; // ln of the Poisson weight at j = 0
    let mut cum_w = 0.0;
    for j in 0..10_000 {
        let w = log_w.exp();
        cum_w += w;
        sum += w * reg_lower_gamma(0.5 * df + j as f64, half_x);
        if cum_w > 1.0 - 1e-15 && j as f64 > half_l {
            break;
        }
        log_w += half_l.ln() - ((j + 1) as f64).ln();
    }
    sum.clamp(0.0, 1.0)
}

/// Central-difference gradient of the power-mean surrogate with respect to
/// every beacon coordinate; step `h` in meters. Uses only the value path
/// (field evaluation + smoothed min), never the analytic gradient.
pub fn fd_surrogate_gradient(
    positions: &[Point2<f64>],
    power: f64,
    grid: &Arc<DiskGrid<f64>>,
    pl: &PathLoss<f64>,
    k: f64,
    h: f64,
) -> Vec<f64> {
    let spec = SmoothingSpec::power_mean(k).unwrap();
    let value = |pts: &[Point2<f64>]| -> f64 {
        let dep = Deployment::new(pts.to_vec(), BeaconRadio::new(power, 1).unwrap()).unwrap();
        let field = evaluate_field(&dep, grid.clone(), pl).unwrap();
        smoothed_min(&field, &spec).unwrap()
    };
    let mut grad = Vec::with_capacity(2 * positions.len());
    let mut pts = positions.to_vec();
    for b in 0..positions.len() {
        for axis in 0..2 {
            let save = pts[b];
            let bump = |p: Point2<f64>, s: f64| {
                if axis == 0 {
                    Point2::new(p.x + s, p.y)
                } else {
                    Point2::new(p.x, p.y + s)
                }
            };
            pts[b] = bump(save, h);
            let plus = value(&pts);
            pts[b] = bump(save, -h);
            let minus = value(&pts);
            pts[b] = save;
            grad.push((plus - minus) / (2.0 * h));
        }
    }
    grad
}

/// Relative L2 error between two stacked vectors.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm
}

/// Mean and variance of a sample.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
