use num_complex::Complex64;

use crate::error::{Error, Result};

use super::matrix::norm2;

pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-8;
pub const DEFAULT_SPECTRAL_MAX_ITER: usize = 20_000;

/// Largest singular value of an `n x p` operator given only its action and
/// the action of its adjoint.
///
/// Runs power iteration on `A A^H` from the normalized all-ones vector. The
/// Rayleigh quotient `||A^H u||^2` is tracked, and iteration stops once both
/// its last change and an Aitken-style estimate of the remaining error drop
/// below `tol` relative to the current value. Returns
/// [`Error::NoConvergence`] with the last iterate when `max_iter` is
/// exhausted.
///
/// If the all-ones vector happens to be annihilated by `A^H`, the iteration
/// is restarted once from [`generic_start`].
pub fn spectral_norm<F, G>(
    apply: F,
    apply_adjoint: G,
    n: usize,
    p: usize,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    G: Fn(&[Complex64]) -> Vec<Complex64>,
{
    if n == 0 || p == 0 {
        return Err(Error::invalid("operator dimensions must be positive"));
    }
    let ones = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    match power_iterate(&ones, &apply, &apply_adjoint, p, tol, max_iter)? {
        Some(s) => Ok(s),
        None => Ok(power_iterate(&generic_start(n), &apply, &apply_adjoint, p, tol, max_iter)?.unwrap_or(0.0)),
    }
}

/// As [`spectral_norm`], from a caller-supplied start vector. Returns 0 if
/// `A^H start = 0`.
pub fn spectral_norm_from<F, G>(
    start: &[Complex64],
    apply: F,
    apply_adjoint: G,
    p: usize,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    G: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n0 = norm2(start);
    if start.is_empty() || p == 0 || !(n0 > 0.0) {
        return Err(Error::invalid("start vector must be nonzero and dimensions positive"));
    }
    let u: Vec<Complex64> = start.iter().map(|z| z / n0).collect();
    Ok(power_iterate(&u, &apply, &apply_adjoint, p, tol, max_iter)?.unwrap_or(0.0))
}

/// A fixed unit vector with no exploitable structure: unequal magnitudes and
/// quadratic phases, so it is not orthogonal to shift- or sign-symmetric
/// eigenvectors.
pub fn generic_start(n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|q| {
            let x = q as f64;
            Complex64::from_polar(1.0 + 0.5 * (0.7 * x + 0.3).sin(), 0.61 * x * x + 0.17 * x)
        })
        .collect();
    let nv = norm2(&v);
    v.into_iter().map(|z| z / nv).collect()
}

/// `None` when the start vector is in the null space of `A^H`.
fn power_iterate<F, G>(start: &[Complex64], apply: &F, apply_adjoint: &G, p: usize, tol: f64, max_iter: usize) -> Result<Option<f64>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    G: Fn(&[Complex64]) -> Vec<Complex64>,
{
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let n = start.len();
    let mut u = start.to_vec();
    let mut prev: Option<f64> = None;
    let mut prev_delta: Option<f64> = None;
    let mut estimate = 0.0;

    for _ in 0..max_iter {
        let v = apply_adjoint(&u);
        if v.len() != p {
            return Err(Error::dims(format!(
                "adjoint returned {} entries, expected {p}",
                v.len()
            )));
        }
        let rq = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        estimate = rq;
        if rq == 0.0 {
            return Ok(None);
        }
        let w = apply(&v);
        if w.len() != n {
            return Err(Error::dims(format!(
                "operator returned {} entries, expected {n}",
                w.len()
            )));
        }
        let nw = norm2(&w);
        if nw == 0.0 {
            return Ok(Some(rq.sqrt()));
        }
        u = w.into_iter().map(|z| z / nw).collect();

        if let Some(last) = prev {
            let delta = (rq - last).abs();
            if delta <= 4.0 * f64::EPSILON * rq {
                return Ok(Some(rq.sqrt()));
            }
            if delta <= tol * rq {
                if let Some(pd) = prev_delta {
                    let ratio = delta / pd;
                    if ratio < 1.0 && delta * ratio / (1.0 - ratio) <= tol * rq {
                        return Ok(Some(rq.sqrt()));
                    }
                }
            }
            prev_delta = Some(delta);
        }
        prev = Some(rq);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        estimate: estimate.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::ComplexMatrix;

    #[test]
    fn identity_has_unit_norm() {
        let id = ComplexMatrix::identity(6);
        assert!((id.spectral_norm().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_picks_largest_entry() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::new([1.0, -4.0, 2.5][i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert!((m.spectral_norm().unwrap() - 4.0).abs() < 1e-7);
    }

    #[test]
    fn zero_operator() {
        let z = ComplexMatrix::zeros(4, 5);
        assert_eq!(z.spectral_norm().unwrap(), 0.0);
    }

    #[test]
    fn reports_non_convergence_with_estimate() {
        // Two nearly equal singular values with the start vector split
        // between them converge far too slowly for two iterations.
        let m = ComplexMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::new([1.0, 0.999][i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let err = spectral_norm(
            |x| m.mul_vec(x).unwrap(),
            |y| m.adjoint_mul_vec(y).unwrap(),
            2,
            2,
            1e-14,
            2,
        )
        .unwrap_err();
        match err {
            Error::NoConvergence {
                iterations,
                estimate,
            } => {
                assert_eq!(iterations, 2);
                assert!(estimate > 0.99 && estimate <= 1.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ones_in_null_space_of_adjoint() {
        // [[1, -1], [-1, 1]] kills the all-ones vector but has norm 2.
        let m = ComplexMatrix::from_fn(2, 2, |i, j| Complex64::new(if i == j { 1.0 } else { -1.0 }, 0.0));
        assert!((m.spectral_norm().unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn explicit_start() {
        let id = ComplexMatrix::identity(3);
        let s = spectral_norm_from(&generic_start(3), |x| id.mul_vec(x).unwrap(), |y| id.adjoint_mul_vec(y).unwrap(), 3, 1e-10, 100);
        assert!((s.unwrap() - 1.0).abs() < 1e-12);
        assert!((norm2(&generic_start(17)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let id = ComplexMatrix::identity(2);
        let r = spectral_norm(
            |x| id.mul_vec(x).unwrap(),
            |y| id.adjoint_mul_vec(y).unwrap(),
            2,
            2,
            0.0,
            10,
        );
        assert!(r.is_err());
    }
}
