//! Minimum-norm least squares through a complete orthogonal decomposition:
//! Householder QR with column pivoting, then an RQ-style reduction of the
//! leading rows when the matrix is rank deficient.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::matrix::{cdot, norm2, ComplexMatrix};

/// Rank cutoff relative to the largest column norm of the input.
pub const RANK_RTOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `H = I - beta v v^H`, acting on entries `start..` of a vector.
struct Reflector {
    start: usize,
    v: Vec<Complex64>,
    beta: f64,
}

impl Reflector {
    /// Reflector mapping `x` onto a multiple of the first unit vector.
    /// Returns `None` when `x` is zero. The second value is the image `alpha`.
    fn annihilate(start: usize, x: &[Complex64]) -> Option<(Self, Complex64)> {
        let nx = norm2(x);
        if nx == 0.0 {
            return None;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * nx;
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        Some((
            Reflector {
                start,
                v,
                beta: 2.0 / vn2,
            },
            alpha,
        ))
    }

    fn apply(&self, x: &mut [Complex64]) {
        let seg = &mut x[self.start..];
        let s = cdot(&self.v, seg) * self.beta;
        for (xi, vi) in seg.iter_mut().zip(&self.v) {
            *xi -= vi * s;
        }
    }
}

/// Solves `min ||A w - y||_2`, returning the solution of smallest norm.
///
/// Requires `A` to have at least as many rows as columns. Rank is decided on
/// the pivoted factorization with cutoff `RANK_RTOL * max_j ||a_j||`.
pub fn least_squares(a: &ComplexMatrix, y: &[Complex64]) -> Result<Vec<Complex64>> {
    let (n, m) = (a.rows(), a.cols());
    if m > n {
        return Err(Error::invalid(format!(
            "least squares needs at least as many rows as columns, got {n}x{m}"
        )));
    }
    if y.len() != n {
        return Err(Error::dims(format!(
            "right-hand side has length {}, matrix has {n} rows",
            y.len()
        )));
    }

    let largest = a.column_norms().into_iter().fold(0.0, f64::max);
    let cutoff = RANK_RTOL * largest;

    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut reflectors = Vec::with_capacity(m);
    let mut rank = 0;

    for j in 0..m {
        let mut pivot = j;
        let mut best = -1.0;
        for c in j..m {
            let nc = norm2(&work.col(c)[j..]);
            if nc > best {
                best = nc;
                pivot = c;
            }
        }
        if best <= cutoff {
            break;
        }
        if pivot != j {
            for i in 0..n {
                let tmp = work[(i, j)];
                work[(i, j)] = work[(i, pivot)];
                work[(i, pivot)] = tmp;
            }
            perm.swap(j, pivot);
        }
        let (h, alpha) = Reflector::annihilate(j, &work.col(j)[j..]).expect("pivot norm positive");
        for c in j + 1..m {
            h.apply(work.col_mut(c));
        }
        let col = work.col_mut(j);
        col[j] = alpha;
        for z in &mut col[j + 1..] {
            *z = ZERO;
        }
        reflectors.push(h);
        rank = j + 1;
    }

    let mut rhs = y.to_vec();
    for h in &reflectors {
        h.apply(&mut rhs);
    }
    let c = &rhs[..rank];

    let permuted = if rank == m {
        back_substitute(&work, c)
    } else {
        min_norm_trapezoidal(&work, rank, m, c)
    };

    let mut w = vec![ZERO; m];
    for (j, &orig) in perm.iter().enumerate() {
        w[orig] = permuted[j];
    }
    Ok(w)
}

/// Solves `R w = c` with `R` the leading upper triangle of `r`.
fn back_substitute(r: &ComplexMatrix, c: &[Complex64]) -> Vec<Complex64> {
    let m = c.len();
    let mut w = vec![ZERO; m];
    for i in (0..m).rev() {
        let mut s = c[i];
        for j in i + 1..m {
            s -= r[(i, j)] * w[j];
        }
        w[i] = s / r[(i, i)];
    }
    w
}

/// Minimum-norm solution of `T w = c` where `T` is the `rank x m` upper
/// trapezoidal block at the top of `r`. Factors `T^H = Z [U; 0]`, so that
/// `T = [U^H 0] Z^H`; the minimum-norm solution is `Z [U^{-H} c; 0]`.
fn min_norm_trapezoidal(r: &ComplexMatrix, rank: usize, m: usize, c: &[Complex64]) -> Vec<Complex64> {
    let mut th = ComplexMatrix::from_fn(m, rank, |i, j| {
        if i >= j {
            r[(j, i)].conj()
        } else {
            ZERO
        }
    });
    let mut reflectors = Vec::with_capacity(rank);
    for j in 0..rank {
        match Reflector::annihilate(j, &th.col(j)[j..]) {
            Some((h, alpha)) => {
                for col in j + 1..rank {
                    h.apply(th.col_mut(col));
                }
                let col = th.col_mut(j);
                col[j] = alpha;
                for z in &mut col[j + 1..] {
                    *z = ZERO;
                }
                reflectors.push(h);
            }
            None => unreachable!("rows of a full-row-rank block are nonzero"),
        }
    }
    // Forward substitution with the lower-triangular U^H.
    let mut v = vec![ZERO; m];
    for i in 0..rank {
        let mut s = c[i];
        for j in 0..i {
            s -= th[(j, i)].conj() * v[j];
        }
        v[i] = s / th[(i, i)].conj();
    }
    for h in reflectors.iter().rev() {
        h.apply(&mut v);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn orthonormal_columns_recover_exactly() {
        let s = 1.0 / 2f64.sqrt();
        let a = ComplexMatrix::from_columns(
            3,
            &[
                vec![c(s, 0.0), c(0.0, s), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
            ],
        )
        .unwrap();
        let w = vec![c(1.5, -2.0), c(0.25, 3.0)];
        let y = a.mul_vec(&w).unwrap();
        let got = least_squares(&a, &y).unwrap();
        for (g, e) in got.iter().zip(&w) {
            assert!((g - e).norm() < 1e-10);
        }
    }

    #[test]
    fn duplicated_column_splits_weight() {
        let col = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)];
        let a = ComplexMatrix::from_columns(3, &[col.clone(), col.clone()]).unwrap();
        let y: Vec<_> = col.iter().map(|z| z * 2.0).collect();
        let w = least_squares(&a, &y).unwrap();
        assert!((w[0] - c(1.0, 0.0)).norm() < 1e-10);
        assert!((w[1] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn zero_matrix_gives_zero_solution() {
        let a = ComplexMatrix::zeros(3, 2);
        let w = least_squares(&a, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!(w.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn wide_matrix_is_rejected() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            least_squares(&a, &[ZERO, ZERO]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let a = ComplexMatrix::identity(3);
        assert!(matches!(
            least_squares(&a, &[ZERO, ZERO]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn inconsistent_system_residual_is_orthogonal() {
        let a = ComplexMatrix::from_fn(5, 2, |i, j| c((i + 1) as f64 * (j as f64 + 0.5), (i * j) as f64 - 1.0));
        let y = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0), c(0.5, 0.5), c(-3.0, 0.0)];
        let w = least_squares(&a, &y).unwrap();
        let fit = a.mul_vec(&w).unwrap();
        let resid: Vec<_> = y.iter().zip(&fit).map(|(u, v)| u - v).collect();
        for g in a.adjoint_mul_vec(&resid).unwrap() {
            assert!(g.norm() < 1e-9);
        }
    }
}
