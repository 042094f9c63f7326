//! Dense complex matrices and 0-1 routing masks.
//!
//! The pipeline is defined in terms of matrix algebra, and verification
//! happens on materialized matrices at desk scale, so a plain row-major
//! container with the handful of operations the chain needs is all that
//! is required here. Production-scale signals flow through the structured
//! operator applications instead (see `operators` and `engine`), which
//! never materialize these matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
use num_complex::Complex64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds a column vector from a slice.
    pub fn column(v: &[Complex64]) -> Self {
        Mat {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[Complex64]) {
        assert_eq!(v.len(), self.rows, "column length mismatch");
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// Elementwise product. Both operands must have identical shape.
    pub fn hadamard(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn scaled(&self, s: Complex64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Sums the columns into a single vector: `self * 1`.
    pub fn sum_cols(&self) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().sum::<Complex64>())
            .collect()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

/// Dense 0-1 matrix, used for the routing operators whose entries are all
/// zeros and ones (subchannel multiplexers and stream combiners).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat01 {
    rows: usize,
    cols: usize,
    set: Vec<bool>,
}

impl Mat01 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat01 {
            rows,
            cols,
            set: vec![false; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat01::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// All-ones column vector of the given height.
    pub fn ones_column(rows: usize) -> Self {
        Mat01 {
            rows,
            cols: 1,
            set: vec![true; rows],
        }
    }

    /// Builds from a row-major flat slice where any nonzero byte marks a one.
    pub fn from_flat(rows: usize, cols: usize, flat: &[u8]) -> Option<Self> {
        if flat.len() != rows * cols {
            return None;
        }
        Some(Mat01 {
            rows,
            cols,
            set: flat.iter().map(|&b| b != 0).collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut set = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                set.push(f(i, j));
            }
        }
        Mat01 { rows, cols, set }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.set[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        debug_assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.set[i * self.cols + j] = v;
    }

    /// Iterates the positions of all ones in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.set
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k / cols, k % cols))
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            if self.entry(i, j) {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn test_identity_mul() {
        let i3 = Mat::identity(3);
        let m = Mat::from_fn(3, 2, |i, j| c((i * 2 + j) as f64, 1.0));
        assert_eq!(i3.mul(&m), m);
    }

    #[test]
    fn test_transpose_involution() {
        let m = Mat::from_fn(4, 3, |i, j| c(i as f64, j as f64));
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn test_mul_vec_matches_mul() {
        let m = Mat::from_fn(3, 3, |i, j| c((i + j) as f64, (i * j) as f64));
        let v = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 2.0)];
        let as_col = m.mul(&Mat::column(&v));
        let direct = m.mul_vec(&v);
        for i in 0..3 {
            assert_eq!(as_col[(i, 0)], direct[i]);
        }
    }

    #[test]
    fn test_sum_cols() {
        let m = Mat::from_fn(2, 3, |i, j| c((i + j) as f64, 0.0));
        let s = m.sum_cols();
        assert_eq!(s[0], c(3.0, 0.0));
        assert_eq!(s[1], c(6.0, 0.0));
    }

    #[test]
    fn test_mat01_ones_iterator() {
        let m = Mat01::from_flat(2, 3, &[0, 1, 0, 1, 0, 1]).unwrap();
        let ones: Vec<_> = m.ones().collect();
        assert_eq!(ones, vec![(0, 1), (1, 0), (1, 2)]);
    }

    #[test]
    fn test_mat01_to_mat_roundtrip() {
        let m = Mat01::identity(4);
        assert_eq!(m.to_mat(), Mat::identity(4));
    }
}
