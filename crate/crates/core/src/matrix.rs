//! Small dense matrices and their largest singular value.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed::stream_rng;

pub const DEFAULT_MATRIX_ITERS: usize = 300;
pub const DEFAULT_MATRIX_TOL: f64 = 1e-12;

/// Scalars the power iteration works over: `f64` and `Complex64`.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + AddAssign + Mul<Output = Self> + Send + Sync
{
    fn conj(self) -> Self;
    fn abs_sqr(self) -> f64;
    fn real(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    fn conj(self) -> Self {
        self
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn real(self) -> f64 {
        self
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn real(self) -> f64 {
        self.re
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::from_real(1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut s = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                s[(i, j)] = self[(r, c)];
            }
        }
        s
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = T::default();
                for (a, &b) in self.row(r).iter().zip(x) {
                    acc += *a * b;
                }
                acc
            })
            .collect()
    }

    /// `Mᵀ y` (no conjugation).
    pub fn matvec_transpose(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![T::default(); self.cols];
        for (r, &yr) in y.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian Gram matrix on the smaller side: `MᴴM` or `MMᴴ`.
    pub fn small_gram(&self) -> Self {
        if self.cols <= self.rows {
            let n = self.cols;
            let mut g = Self::zeros(n, n);
            for r in 0..self.rows {
                let row = self.row(r);
                for i in 0..n {
                    let a = row[i].conj();
                    for j in i..n {
                        g.data[i * n + j] += a * row[j];
                    }
                }
            }
            g.fill_lower();
            g
        } else {
            let n = self.rows;
            let mut g = Self::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let mut acc = T::default();
                    for (&a, &b) in self.row(i).iter().zip(self.row(j)) {
                        acc += a * b.conj();
                    }
                    g.data[i * n + j] = acc;
                }
            }
            g.fill_lower();
            g
        }
    }

    fn fill_lower(&mut self) {
        let n = self.rows;
        for i in 0..n {
            for j in 0..i {
                self.data[i * n + j] = self.data[j * n + i].conj();
            }
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

fn norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value by power iteration on the (explicit) Gram matrix.
///
/// Stops when `|σ_t − σ_{t−1}| ≤ tol·σ_t` or after `iters` steps and returns
/// the square root of the Rayleigh quotient at the final iterate. The start
/// vector is Gaussian, drawn from `seed`.
pub fn matrix_spectral_norm<T: Scalar>(m: &Matrix<T>, iters: usize, tol: f64, seed: u64) -> f64 {
    if m.data.iter().all(|v| v.abs_sqr() == 0.0) {
        return 0.0;
    }
    let g = m.small_gram();
    let n = g.rows;
    let mut rng = stream_rng(seed, "matrix-power", 0);
    let mut x: Vec<T> = (0..n)
        .map(|_| T::from_real(rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v = *v * T::from_real(1.0 / nx));

    let mut sigma = 0.0f64;
    for _ in 0..iters.max(1) {
        let y = g.matvec(&x);
        let mut rq = 0.0;
        for (a, b) in x.iter().zip(&y) {
            rq += (a.conj() * *b).real();
        }
        let next = rq.max(0.0).sqrt();
        let ny = norm(&y);
        let done = (next - sigma).abs() <= tol * next;
        sigma = next;
        if ny == 0.0 || done {
            break;
        }
        x = y.into_iter().map(|v| v * T::from_real(1.0 / ny)).collect();
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::gap_kernel;
    use crate::tensor::{unfold, UnfoldingSpec};

    #[test]
    fn diagonal() {
        let m = RealMatrix::from_vec(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let s = matrix_spectral_norm(&m, DEFAULT_MATRIX_ITERS, DEFAULT_MATRIX_TOL, 0);
        assert!((s - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_zero() {
        assert_eq!(
            matrix_spectral_norm(&RealMatrix::zeros(3, 4), 10, 0.0, 1),
            0.0
        );
    }

    #[test]
    fn gap_kernel_unfolding_has_norm_four() {
        let m = unfold(&gap_kernel(), &UnfoldingSpec::row_major_split(4, 1)).unwrap();
        let s = matrix_spectral_norm(&m, DEFAULT_MATRIX_ITERS, DEFAULT_MATRIX_TOL, 0);
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn complex_matrix() {
        // i * diag(2, 1) rotated by a unitary: norm 2
        let i = Complex64::new(0.0, 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = ComplexMatrix::from_vec(
            2,
            2,
            vec![Complex64::new(h, 0.0), i * h, i * h, Complex64::new(h, 0.0)],
        )
        .unwrap();
        let d = [2.0 * i, Complex64::new(1.0, 0.0)];
        let mut m = ComplexMatrix::zeros(2, 2);
        for r in 0..2 {
            for c in 0..2 {
                m[(r, c)] = u[(r, c)] * d[c];
            }
        }
        let s = matrix_spectral_norm(&m, 300, 1e-14, 3);
        assert!((s - 2.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn deterministic_in_seed() {
        let m = RealMatrix::from_vec(2, 3, vec![1.0, 2.0, 0.5, -1.0, 0.3, 2.0]).unwrap();
        assert_eq!(
            matrix_spectral_norm(&m, 5, 0.0, 9).to_bits(),
            matrix_spectral_norm(&m, 5, 0.0, 9).to_bits()
        );
    }
}
