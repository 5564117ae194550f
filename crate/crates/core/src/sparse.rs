//! Compressed sparse row storage for complex operators.

use alloc::vec::Vec;

use crate::math::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix, summing duplicate entries in insertion order.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = alloc::vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(p) => self.values[range.start + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Mutable access to a stored entry; `None` outside the pattern.
    pub fn get_mut(&mut self, i: usize, j: usize) -> Option<&mut C64> {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        let p = self.col_idx[range.clone()].binary_search(&j).ok()?;
        Some(&mut self.values[range.start + p])
    }

    pub fn mul_vec(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `max |A - A^H|`.
    pub fn hermitian_defect_abs(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Entry-wise maximum of `|A - B|` over the union of both patterns.
    pub fn max_abs_difference(&self, other: &CsrMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - other.get(i, j)).norm());
            }
            for (j, v) in other.row(i) {
                worst = worst.max((v - self.get(i, j)).norm());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn nonzero_pattern(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(move |&j| (i, j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_multiply() {
        let c = |x: f64| C64::new(x, 0.0);
        let m = CsrMatrix::from_triplets(3, alloc::vec![(0, 0, c(1.0)), (2, 1, c(4.0)), (0, 0, c(2.0)), (1, 2, C64::new(0.0, 1.0))]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), c(3.0));
        assert_eq!(m.get(1, 1), c(0.0));
        let mut y = alloc::vec![c(0.0); 3];
        m.mul_vec(&[c(1.0), c(1.0), c(2.0)], &mut y);
        assert_eq!(y, alloc::vec![c(3.0), C64::new(0.0, 2.0), c(4.0)]);
        assert!(m.hermitian_defect_abs() > 1.0);
    }
}
