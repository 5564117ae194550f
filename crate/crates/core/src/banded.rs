//! Band LU factorization without pivoting on a bandwidth-reducing node
//! ordering. Used for shifted Hermitian operators (where the pivot signs give
//! the inertia) and for Crank-Nicolson systems with positive definite
//! Hermitian part.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math::C64;
use crate::sparse::CsrMatrix;

/// Node permutation: `order[new] = old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl Ordering {
    pub fn identity(n: usize) -> Self {
        Self::from_order((0..n).collect())
    }

    pub fn from_order(order: Vec<usize>) -> Self {
        let mut position = alloc::vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        Self { order, position }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn old(&self, new: usize) -> usize {
        self.order[new]
    }

    pub fn new_of(&self, old: usize) -> usize {
        self.position[old]
    }

    pub fn bandwidth(&self, matrix: &CsrMatrix) -> usize {
        matrix
            .nonzero_pattern()
            .map(|(i, j)| self.position[i].abs_diff(self.position[j]))
            .max()
            .unwrap_or(0)
    }

    /// Tries every axis order, folding periodic axes as `0, n-1, 1, n-2, ...`
    /// so that wrap-around neighbours stay close, and keeps the ordering with
    /// the smallest bandwidth for `matrix`.
    pub fn for_grid(grid: &Grid, matrix: &CsrMatrix) -> Self {
        let d = grid.dim();
        let folded: Vec<Vec<usize>> = (0..d)
            .map(|a| {
                let ax = grid.axis(a);
                if ax.periodic() {
                    fold(ax.n)
                } else {
                    (0..ax.n).collect()
                }
            })
            .collect();
        let mut best: Option<(usize, Ordering)> = None;
        for perm in axis_permutations(d) {
            // perm[0] is the fastest axis in the new order
            let mut order = Vec::with_capacity(grid.len());
            let sizes: Vec<usize> = perm.iter().map(|&a| grid.axis(a).n).collect();
            let mut counter = alloc::vec![0usize; d];
            for _ in 0..grid.len() {
                let mut idx = [0usize; 3];
                for (slot, &a) in perm.iter().enumerate() {
                    idx[a] = folded[a][counter[slot]];
                }
                order.push(grid.index(idx));
                for slot in 0..d {
                    counter[slot] += 1;
                    if counter[slot] < sizes[slot] {
                        break;
                    }
                    counter[slot] = 0;
                }
            }
            let candidate = Ordering::from_order(order);
            let bw = candidate.bandwidth(matrix);
            if best.as_ref().is_none_or(|(b, _)| bw < *b) {
                best = Some((bw, candidate));
            }
        }
        best.map(|b| b.1).unwrap_or_else(|| Ordering::identity(grid.len()))
    }
}

fn fold(n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        out.push(lo);
        lo += 1;
        if lo < hi {
            hi -= 1;
            out.push(hi);
        }
    }
    out
}

fn axis_permutations(d: usize) -> Vec<Vec<usize>> {
    match d {
        1 => alloc::vec![alloc::vec![0]],
        2 => alloc::vec![alloc::vec![0, 1], alloc::vec![1, 0]],
        _ => alloc::vec![
            alloc::vec![0, 1, 2],
            alloc::vec![0, 2, 1],
            alloc::vec![1, 0, 2],
            alloc::vec![1, 2, 0],
            alloc::vec![2, 0, 1],
            alloc::vec![2, 1, 0],
        ],
    }
}

/// LU factors of `scale * A + diag(shift)` in band storage.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    bw: usize,
    data: Vec<C64>,
    ordering: Ordering,
    negative_pivots: usize,
}

impl BandedLu {
    pub fn factor(matrix: &CsrMatrix, scale: C64, shift: &[C64], ordering: &Ordering) -> Result<Self> {
        let n = matrix.n();
        if shift.len() != n || ordering.len() != n {
            return Err(Error::GridMismatch(format!("factor of order {n} with shift {} and ordering {}", shift.len(), ordering.len())));
        }
        let bw = ordering.bandwidth(matrix);
        let width = 2 * bw + 1;
        let mut data = alloc::vec![C64::new(0.0, 0.0); n * width];
        for (i, s) in shift.iter().enumerate() {
            let ni = ordering.new_of(i);
            data[ni * width + bw] += *s;
            for (j, v) in matrix.row(i) {
                let nj = ordering.new_of(j);
                data[ni * width + nj + bw - ni] += scale * v;
            }
        }
        let mut negative_pivots = 0;
        for k in 0..n {
            let pivot = data[k * width + bw];
            if !(pivot.norm() > 0.0) || !pivot.re.is_finite() || !pivot.im.is_finite() {
                return Err(Error::LinearSolveFailure(format!("zero or non-finite pivot {pivot} at row {k}")));
            }
            if pivot.re < 0.0 {
                negative_pivots += 1;
            }
            let last = (k + bw).min(n - 1);
            let (head, tail) = data.split_at_mut((k + 1) * width);
            // row k, columns k+1..=last
            let upper = &head[k * width + bw + 1..k * width + bw + 1 + (last - k)];
            for i in k + 1..=last {
                let row = &mut tail[(i - k - 1) * width..(i - k) * width];
                let lik = row[k + bw - i];
                if lik.re == 0.0 && lik.im == 0.0 {
                    continue;
                }
                let l = lik / pivot;
                row[k + bw - i] = l;
                let start = k + 1 + bw - i;
                for (a, u) in row[start..start + (last - k)].iter_mut().zip(upper) {
                    *a -= l * u;
                }
            }
        }
        Ok(Self {
            n,
            bw,
            data,
            ordering: ordering.clone(),
            negative_pivots,
        })
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Number of pivots with negative real part. For a Hermitian matrix this
    /// is the number of negative eigenvalues.
    pub fn negative_pivots(&self) -> usize {
        self.negative_pivots
    }

    /// Solves for several right-hand sides at once; each band row is read
    /// once per call.
    pub fn solve_many(&self, rhs: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let (n, bw, width, p) = (self.n, self.bw, 2 * self.bw + 1, rhs.len());
        if p == 0 {
            return Vec::new();
        }
        // row-major n x p block in the factor ordering
        let mut y = alloc::vec![C64::new(0.0, 0.0); n * p];
        for k in 0..n {
            let old = self.ordering.old(k);
            for (r, b) in rhs.iter().enumerate() {
                y[k * p + r] = b[old];
            }
        }
        let mut acc = alloc::vec![C64::new(0.0, 0.0); p];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * width..(i + 1) * width];
            acc.copy_from_slice(&y[i * p..(i + 1) * p]);
            for j in lo..i {
                let l = row[j + bw - i];
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                for (a, v) in acc.iter_mut().zip(&y[j * p..(j + 1) * p]) {
                    *a -= l * v;
                }
            }
            y[i * p..(i + 1) * p].copy_from_slice(&acc);
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let row = &self.data[i * width..(i + 1) * width];
            acc.copy_from_slice(&y[i * p..(i + 1) * p]);
            for j in i + 1..=hi {
                let u = row[j + bw - i];
                if u.re == 0.0 && u.im == 0.0 {
                    continue;
                }
                for (a, v) in acc.iter_mut().zip(&y[j * p..(j + 1) * p]) {
                    *a -= u * v;
                }
            }
            let d = C64::new(1.0, 0.0) / row[bw];
            for (dst, a) in y[i * p..(i + 1) * p].iter_mut().zip(&acc) {
                *dst = a * d;
            }
        }
        let mut out = alloc::vec![alloc::vec![C64::new(0.0, 0.0); n]; p];
        for k in 0..n {
            let old = self.ordering.old(k);
            for (r, o) in out.iter_mut().enumerate() {
                o[old] = y[k * p + r];
            }
        }
        out
    }

    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let (n, bw, width) = (self.n, self.bw, 2 * self.bw + 1);
        let mut y: Vec<C64> = (0..n).map(|k| rhs[self.ordering.old(k)]).collect();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * width..(i + 1) * width];
            let mut acc = y[i];
            for j in lo..i {
                acc -= row[j + bw - i] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let row = &self.data[i * width..(i + 1) * width];
            let mut acc = y[i];
            for j in i + 1..=hi {
                acc -= row[j + bw - i] * y[j];
            }
            y[i] = acc / row[bw];
        }
        let mut out = alloc::vec![C64::new(0.0, 0.0); n];
        for (k, v) in y.into_iter().enumerate() {
            out[self.ordering.old(k)] = v;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, Boundary};

    fn ring_laplacian(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(2.0, 0.0)));
            t.push((i, (i + 1) % n, C64::new(-1.0, 0.0)));
            t.push((i, (i + n - 1) % n, C64::new(-1.0, 0.0)));
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn fold_keeps_ring_neighbours_close() {
        assert_eq!(fold(5), alloc::vec![0, 4, 1, 3, 2]);
        let grid = Grid::new(alloc::vec![Axis::new(16, 0.0, 1.0, Boundary::Periodic)]).unwrap();
        let m = ring_laplacian(16);
        assert_eq!(Ordering::identity(16).bandwidth(&m), 15);
        assert_eq!(Ordering::for_grid(&grid, &m).bandwidth(&m), 2);
    }

    #[test]
    fn solve_and_inertia() {
        let n = 12;
        let m = ring_laplacian(n);
        let grid = Grid::new(alloc::vec![Axis::new(n, 0.0, 1.0, Boundary::Periodic)]).unwrap();
        let ord = Ordering::for_grid(&grid, &m);
        // eigenvalues of the ring are 2 - 2 cos(2 pi k / n) in [0, 4]
        let shift = |s: f64| alloc::vec![C64::new(-s, 0.0); n];
        let lu = BandedLu::factor(&m, C64::new(1.0, 0.0), &shift(-0.5), &ord).unwrap();
        assert_eq!(lu.negative_pivots(), 0);
        let lu2 = BandedLu::factor(&m, C64::new(1.0, 0.0), &shift(1.1), &ord).unwrap();
        // 2 - 2cos(2 pi k/12) < 1.1 for k = 0, +-1, +-2
        assert_eq!(lu2.negative_pivots(), 5);
        let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let x = lu.solve(&b);
        let many = lu.solve_many(&[b.clone(), x.clone()]);
        for i in 0..n {
            assert!((many[0][i] - x[i]).norm() < 1e-14);
        }
        let mut r = alloc::vec![C64::new(0.0, 0.0); n];
        m.mul_vec(&x, &mut r);
        for i in 0..n {
            assert!((r[i] + 0.5 * x[i] - b[i]).norm() < 1e-12);
        }
    }
}
