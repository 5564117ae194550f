//! Dense Hermitian eigensolvers: Householder reduction to a real tridiagonal
//! matrix followed by implicit QL iterations.

use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use crate::math::Float;
use crate::math::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors, column `k` stored at `vectors[k * n..(k + 1) * n]`.
    pub vectors: Vec<C64>,
    pub n: usize,
}

impl DenseEigen {
    pub fn vector(&self, k: usize) -> &[C64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }
}

/// All eigenpairs of the Hermitian `n x n` row-major matrix `a`. Only the
/// lower triangle is referenced.
pub fn hermitian_eigen(a: &[C64], n: usize) -> Result<DenseEigen> {
    if a.len() != n * n {
        return Err(Error::InvalidArgument(alloc::format!("matrix of {} entries is not {n}x{n}", a.len())));
    }
    if n == 0 {
        return Ok(DenseEigen { values: Vec::new(), vectors: Vec::new(), n });
    }
    let mut w = alloc::vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..=i {
            w[i * n + j] = a[i * n + j];
            w[j * n + i] = a[i * n + j].conj();
        }
        w[i * n + i] = C64::new(a[i * n + i].re, 0.0);
    }

    // Householder reduction: column k below the diagonal is mapped onto
    // `alpha e_1`.
    let mut reflectors: Vec<Vec<C64>> = Vec::new();
    let mut sub = alloc::vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C64> = (0..m).map(|i| w[(k + 1 + i) * n + k]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|v| v.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail <= f64::EPSILON * f64::EPSILON * xnorm * xnorm * 1e-4 {
            sub[k] = x[0];
            reflectors.push(Vec::new());
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // trailing block B <- H B H with H = I - 2 v v^H
        let off = k + 1;
        let mut p = alloc::vec![ZERO; m];
        for i in 0..m {
            let row = &w[(off + i) * n + off..(off + i) * n + n];
            p[i] = row.iter().zip(&v).map(|(b, vj)| b * vj).sum();
        }
        let kk: f64 = v.iter().zip(&p).map(|(vi, pi)| (vi.conj() * pi).re).sum();
        let q: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk).collect();
        for i in 0..m {
            let (vi, qi) = (v[i], q[i]);
            let row = &mut w[(off + i) * n + off..(off + i) * n + n];
            for j in 0..m {
                row[j] -= (vi * q[j].conj() + qi * v[j].conj()) * 2.0;
            }
        }
        sub[k] = alpha;
        reflectors.push(v);
    }
    if n >= 2 {
        sub[n - 2] = w[(n - 1) * n + (n - 2)];
    }

    // phase scaling to a real tridiagonal matrix
    let mut delta = alloc::vec![C64::new(1.0, 0.0); n];
    let mut d: Vec<f64> = (0..n).map(|i| w[i * n + i].re).collect();
    let mut e = alloc::vec![0.0; n];
    for k in 0..n - 1 {
        let mag = sub[k].norm();
        e[k] = mag;
        delta[k + 1] = if mag > 0.0 { delta[k] * sub[k] / mag } else { delta[k] };
    }
    let mut z = alloc::vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z, n)?;

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = alloc::vec![ZERO; n * n];
    for (col, &src) in idx.iter().enumerate() {
        values.push(d[src]);
        let y = &mut vectors[col * n..(col + 1) * n];
        for i in 0..n {
            y[i] = delta[i] * z[src * n + i];
        }
        for (k, v) in reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let seg = &mut y[k + 1..];
            let s: C64 = v.iter().zip(seg.iter()).map(|(vi, yi)| vi.conj() * yi).sum();
            for (yi, vi) in seg.iter_mut().zip(v) {
                *yi -= vi * s * 2.0;
            }
        }
    }
    Ok(DenseEigen { values, vectors, n })
}

/// Implicit QL on a symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i + 1`). Rotations are
/// accumulated into the column-major `z`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::ConvergenceFailure {
                    iterations,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = z.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..(i + 1) * n];
                let zi1 = &mut hi[..n];
                for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                    let t = *b;
                    *b = s * *a + c * t;
                    *a = c * *a - s * t;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// In-place Cholesky factor `B = L L^H` of a Hermitian positive definite
/// row-major matrix; the strict upper triangle is zeroed.
pub fn cholesky(b: &mut [C64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut djj = b[j * n + j].re;
        for k in 0..j {
            djj -= b[j * n + k].norm_sqr();
        }
        if !(djj > 0.0) {
            return Err(Error::LinearSolveFailure(alloc::format!("matrix not positive definite at column {j}")));
        }
        let ljj = djj.sqrt();
        b[j * n + j] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = b[i * n + j];
            for k in 0..j {
                s -= b[i * n + k] * b[j * n + k].conj();
            }
            b[i * n + j] = s / ljj;
        }
        for k in j + 1..n {
            b[j * n + k] = ZERO;
        }
    }
    Ok(())
}

/// Solves `L x = rhs` in place for a lower triangular row-major `L`.
pub fn forward_substitute(l: &[C64], n: usize, x: &mut [C64]) {
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
}

/// Solves `L^H x = rhs` in place.
pub fn backward_substitute_adjoint(l: &[C64], n: usize, x: &mut [C64]) {
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k * n + i].conj() * x[k];
        }
        x[i] = s / l[i * n + i].conj();
    }
}

/// Generalized problem `A x = lambda B x` with `B` Hermitian positive
/// definite; eigenvectors are `B`-orthonormal.
pub fn hermitian_generalized_eigen(a: &[C64], b: &[C64], n: usize) -> Result<DenseEigen> {
    let mut l = b.to_vec();
    cholesky(&mut l, n)?;
    // C = L^{-1} A L^{-H}
    let mut c = a.to_vec();
    for j in 0..n {
        let mut col: Vec<C64> = (0..n).map(|i| c[i * n + j]).collect();
        forward_substitute(&l, n, &mut col);
        for i in 0..n {
            c[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        let mut row: Vec<C64> = (0..n).map(|j| c[i * n + j].conj()).collect();
        forward_substitute(&l, n, &mut row);
        for j in 0..n {
            c[i * n + j] = row[j].conj();
        }
    }
    let mut eig = hermitian_eigen(&c, n)?;
    for k in 0..n {
        backward_substitute_adjoint(&l, n, &mut eig.vectors[k * n..(k + 1) * n]);
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::XorShift;

    fn random_hermitian(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = XorShift::new(seed);
        let mut a = alloc::vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j {
                    C64::new(rng.next_signed(), 0.0)
                } else {
                    C64::new(rng.next_signed(), rng.next_signed())
                };
                a[i * n + j] = v;
                a[j * n + i] = v.conj();
            }
        }
        a
    }

    fn check_decomposition(a: &[C64], eig: &DenseEigen, b: Option<&[C64]>) {
        let n = eig.n;
        for k in 0..n {
            let x = eig.vector(k);
            for i in 0..n {
                let ax: C64 = (0..n).map(|j| a[i * n + j] * x[j]).sum();
                let bx: C64 = match b {
                    Some(b) => (0..n).map(|j| b[i * n + j] * x[j]).sum(),
                    None => x[i],
                };
                assert!((ax - bx * eig.values[k]).norm() < 1e-11, "residual at {k}");
            }
            for l in 0..n {
                let y = eig.vector(l);
                let ip: C64 = match b {
                    Some(b) => (0..n).map(|i| y[i].conj() * (0..n).map(|j| b[i * n + j] * x[j]).sum::<C64>()).sum(),
                    None => y.iter().zip(x).map(|(p, q)| p.conj() * q).sum(),
                };
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-11);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn random_hermitian_matrices() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (7, 4), (40, 5)] {
            let a = random_hermitian(n, seed);
            let eig = hermitian_eigen(&a, n).unwrap();
            check_decomposition(&a, &eig, None);
        }
    }

    #[test]
    fn known_spectrum_of_ring() {
        let n = 10;
        let mut a = alloc::vec![ZERO; n * n];
        for i in 0..n {
            a[i * n + i] = C64::new(2.0, 0.0);
            a[i * n + (i + 1) % n] = C64::new(-1.0, 0.0);
            a[((i + 1) % n) * n + i] = C64::new(-1.0, 0.0);
        }
        let eig = hermitian_eigen(&a, n).unwrap();
        let mut want: Vec<f64> = (0..n).map(|k| 2.0 - 2.0 * (2.0 * core::f64::consts::PI * k as f64 / n as f64).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in eig.values.iter().zip(&want) {
            assert!((g - w).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_and_generalized() {
        let n = 12;
        let a = random_hermitian(n, 9);
        let mut b = random_hermitian(n, 10);
        // make b diagonally dominant
        for i in 0..n {
            b[i * n + i] = C64::new(2.0 * n as f64, 0.0);
        }
        let eig = hermitian_generalized_eigen(&a, &b, n).unwrap();
        check_decomposition(&a, &eig, Some(&b));

        let mut d = alloc::vec![ZERO; 9];
        d[0] = C64::new(3.0, 0.0);
        d[4] = C64::new(-1.0, 0.0);
        d[8] = C64::new(2.0, 0.0);
        assert_eq!(hermitian_eigen(&d, 3).unwrap().values, alloc::vec![-1.0, 2.0, 3.0]);
        assert!(cholesky(&mut d.clone(), 3).is_err());
    }
}
