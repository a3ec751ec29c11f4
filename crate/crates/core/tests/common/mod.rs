//! Independent reference computations. Nothing here calls into the library's
//! numerical routines; everything is the textbook O(n^2)/O(n^3) definition.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(n: usize, r: &mut impl Rng) -> Vec<C> {
    (0..n).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect()
}

pub fn unit_vec(n: usize, r: &mut impl Rng) -> Vec<C> {
    let v = random_vec(n, r);
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / nv).collect()
}

/// Direct DFT with the `e^{-j 2 pi q m / n}` kernel.
pub fn dft(v: &[C]) -> Vec<C> {
    let n = v.len();
    (0..n)
        .map(|m| {
            v.iter()
                .enumerate()
                .map(|(q, x)| {
                    let ang = -2.0 * std::f64::consts::PI * ((q * m) % n) as f64 / n as f64;
                    x * C::from_polar(1.0, ang)
                })
                .sum()
        })
        .collect()
}

/// Column `(l, m)` (linear index `l + m n`) of the Gabor frame from `g`,
/// straight from the definition.
pub fn gabor_column(g: &[C], i: usize) -> Vec<C> {
    let n = g.len();
    let (l, m) = (i % n, i / n);
    (0..n)
        .map(|q| {
            let ang = 2.0 * std::f64::consts::PI * ((m * q) % n) as f64 / n as f64;
            g[(q + n - l) % n] * C::from_polar(1.0, ang)
        })
        .collect()
}

/// Dense column list of the Gabor frame.
pub fn gabor_columns(g: &[C]) -> Vec<Vec<C>> {
    (0..g.len() * g.len()).map(|i| gabor_column(g, i)).collect()
}

/// `a^H b`.
pub fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Full Gram matrix `G[i][j] = <x_i, x_j>`.
pub fn gram(cols: &[Vec<C>]) -> Vec<Vec<C>> {
    cols.iter().map(|a| cols.iter().map(|b| inner(a, b)).collect()).collect()
}

pub fn gram_mu(g: &[Vec<C>]) -> f64 {
    let mut mu: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                mu = mu.max(v.norm());
            }
        }
    }
    mu
}

pub fn gram_nu(g: &[Vec<C>]) -> f64 {
    let p = g.len();
    let mut nu: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        let s: C = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).sum();
        nu = nu.max(s.norm());
    }
    nu / (p - 1) as f64
}

/// Matrix (given as columns) times vector.
pub fn matvec(cols: &[Vec<C>], x: &[C]) -> Vec<C> {
    let n = cols[0].len();
    let mut y = vec![C::new(0.0, 0.0); n];
    for (col, xi) in cols.iter().zip(x) {
        for (yq, a) in y.iter_mut().zip(col) {
            *yq += a * xi;
        }
    }
    y
}

/// Eigenvalues of a Hermitian matrix via cyclic Jacobi on its real
/// symmetric embedding `[[Re, -Im], [Im, Re]]` (each eigenvalue appears
/// twice; duplicates are removed by taking every other sorted value).
pub fn hermitian_eigenvalues(h: &[Vec<C>]) -> Vec<f64> {
    let k = h.len();
    let m = 2 * k;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = h[i][j].re;
            a[i + k][j + k] = h[i][j].re;
            a[i][j + k] = -h[i][j].im;
            a[i + k][j] = h[i][j].im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for r in 0..m {
                    let (arp, arq) = (a[r][p], a[r][q]);
                    a[r][p] = cs * arp - sn * arq;
                    a[r][q] = sn * arp + cs * arq;
                }
                for r in 0..m {
                    let (apr, aqr) = (a[p][r], a[q][r]);
                    a[p][r] = cs * apr - sn * aqr;
                    a[q][r] = sn * apr + cs * aqr;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev.into_iter().step_by(2).collect()
}

/// Largest singular value of an `n x p` matrix (columns) from the
/// eigenvalues of `A A^H`.
pub fn spectral_norm_oracle(cols: &[Vec<C>]) -> f64 {
    let n = cols[0].len();
    let mut aah = vec![vec![C::new(0.0, 0.0); n]; n];
    for col in cols {
        for i in 0..n {
            for j in 0..n {
                aah[i][j] += col[i] * col[j].conj();
            }
        }
    }
    hermitian_eigenvalues(&aah).last().copied().unwrap().max(0.0).sqrt()
}

/// Solves the square system `m x = b` by Gaussian elimination with partial
/// pivoting.
pub fn solve(mut m: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for cc in col..n {
                let v = m[col][cc];
                m[r][cc] -= f * v;
            }
            let bc = b[col];
            b[r] -= f * bc;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: C = (r + 1..n).map(|cc| m[r][cc] * x[cc]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x
}

/// Least squares through the normal equations `A^H A w = A^H y`.
pub fn normal_equations(cols: &[Vec<C>], y: &[C]) -> Vec<C> {
    let g = gram(cols);
    let rhs: Vec<C> = cols.iter().map(|a| inner(a, y)).collect();
    solve(g, rhs)
}

/// All ordered `k`-prefixes of permutations of `0..p`.
pub fn ordered_prefixes(p: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(p: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..p {
            if !cur.contains(&i) {
                cur.push(i);
                rec(p, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(p, k, &mut Vec::new(), &mut out);
    out
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn rel_err(a: &[C], b: &[C]) -> f64 {
    let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() / nb
}
