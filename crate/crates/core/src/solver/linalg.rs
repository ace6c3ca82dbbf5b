//! Tiny dense linear algebra for the Newton systems (dimension ≤ tens).

use crate::scalar::Scalar;

/// Attempt a Cholesky factorization of the symmetric matrix `a` (row-major
/// `n×n`). Returns the lower factor, or `None` if the matrix is not
/// sufficiently positive definite.
pub(crate) fn cholesky<T: Scalar>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > T::zero()) || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solve `L·Lᵀ·x = b` given the lower Cholesky factor.
pub(crate) fn cholesky_solve<T: Scalar>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let delta = l[i * n + k] * y[k];
            y[i] -= delta;
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let delta = l[k * n + i] * y[k];
            y[i] -= delta;
        }
        y[i] /= l[i * n + i];
    }
    y
}

/// Solve the symmetric system `(a + δI)x = b`, growing the shift `δ` until
/// the matrix factors. Returns the solution and the shift used.
pub(crate) fn solve_regularized<T: Scalar>(a: &[T], n: usize, b: &[T]) -> (Vec<T>, T) {
    let max_diag = (0..n)
        .map(|i| a[i * n + i].abs())
        .fold(T::zero(), T::max)
        .max(T::of(1e-300));
    let mut shift = T::zero();
    loop {
        let mut m = a.to_vec();
        if shift > T::zero() {
            for i in 0..n {
                m[i * n + i] += shift;
            }
        }
        if let Some(l) = cholesky(&m, n) {
            return (cholesky_solve(&l, n, b), shift);
        }
        shift = if shift == T::zero() {
            max_diag * T::of(1e-8)
        } else {
            shift * T::of(10.0)
        };
        if shift > max_diag * T::of(1e12) {
            // fully dominated by the shift: gradient-descent direction
            let mut x = b.to_vec();
            for v in &mut x {
                *v /= shift;
            }
            return (x, shift);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_spd_system() {
        // A = [[4,1],[1,3]], b = [1,2] -> x = [1/11, 7/11]
        let a = [4.0f64, 1.0, 1.0, 3.0];
        let l = cholesky(&a, 2).unwrap();
        let x = cholesky_solve(&l, 2, &[1.0, 2.0]);
        assert_relative_eq!(x[0], 1.0 / 11.0, max_relative = 1e-12);
        assert_relative_eq!(x[1], 7.0 / 11.0, max_relative = 1e-12);
    }

    #[test]
    fn regularizes_indefinite_system() {
        let a = [-1.0f64, 0.0, 0.0, 2.0];
        let (x, shift) = solve_regularized(&a, 2, &[1.0, 1.0]);
        assert!(shift > 0.0);
        assert!(x.iter().all(|v| v.is_finite()));
    }
}
