use crate::scalar::Scalar;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// Fails with `(column, |pivot|)` when the best available pivot is below
/// `pivot_tol`.
pub fn gaussian_solve<T: Scalar>(
    mut a: Vec<Vec<T>>,
    mut b: Vec<T>,
    pivot_tol: T,
) -> Result<Vec<T>, (usize, f64)> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let mut best = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[best][col].abs() {
                best = row;
            }
        }
        let pivot = a[best][col];
        if pivot.abs() < pivot_tol {
            return Err((col, pivot.abs().to_f64_lossy()));
        }
        a.swap(col, best);
        b.swap(col, best);
        for row in col + 1..n {
            let factor = a[row][col] / pivot;
            if factor.is_zero() {
                continue;
            }
            a[row][col] = T::zero();
            for k in col + 1..n {
                let delta = factor * a[col][k];
                a[row][k] = a[row][k] - delta;
            }
            let delta = factor * b[col];
            b[row] = b[row] - delta;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

const POWER_ITERATIONS: usize = 50;

/// Spectral radius estimate of a square non-negative matrix.
///
/// Exact for 1x1. Otherwise runs 50 steps of power iteration on `M + I`
/// (primitive whenever `M` is irreducible) from the all-ones vector and
/// returns the Collatz-Wielandt upper bound `max_i (Mv)_i / v_i`, which
/// never underestimates the true radius for a positive iterate.
pub fn spectral_radius_estimate<T: Scalar>(m: &[Vec<T>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let m: Vec<Vec<f64>> = m
        .iter()
        .map(|row| row.iter().map(|x| x.to_f64_lossy()).collect())
        .collect();
    if n == 1 {
        return m[0][0].abs();
    }
    let apply = |v: &[f64]| -> Vec<f64> {
        m.iter()
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    };
    let mut v = vec![1.0; n];
    for _ in 0..POWER_ITERATIONS {
        let mv = apply(&v);
        let mut next: Vec<f64> = mv.iter().zip(&v).map(|(a, x)| a + x).collect();
        let norm = next.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 {
            return 0.0;
        }
        next.iter_mut().for_each(|x| *x /= norm);
        v = next;
    }
    let mv = apply(&v);
    mv.iter()
        .zip(&v)
        .filter(|(_, &x)| x > 0.0)
        .map(|(a, x)| a / x)
        .fold(0.0, f64::max)
}
