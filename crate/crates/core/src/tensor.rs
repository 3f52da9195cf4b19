//! Dense real tensors, complex vectors, the multilinear form and unfoldings.
//!
//! Storage is row-major (last axis fastest). Unfoldings follow the
//! permute-then-column-major convention: for `UnfoldingSpec { row_axes,
//! col_axes }` the row index is built from `row_axes` with the *first*
//! listed axis varying fastest, and likewise for columns.
//!
//! numpy's `A.reshape(n0, -1, order='c')` on an untransposed tensor is the
//! same matrix as `unfold(A, rows=[0], cols=[d-1, ..., 1])`: a row-major
//! column index over axes `1..d` is a column-major index over the reversed
//! axis list. [`UnfoldingSpec::row_major_split`] builds that spec.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::ShapeMismatch(
                "tensor needs at least one axis".into(),
            ));
        }
        if let Some(axis) = shape.iter().position(|&n| n == 0) {
            return Err(Error::ShapeMismatch(format!("axis {axis} has size 0")));
        }
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        assert!(
            !shape.is_empty() && shape.iter().all(|&n| n > 0),
            "invalid shape {shape:?}"
        );
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(shape);
        let mut idx = vec![0usize; shape.len()];
        for v in t.data.iter_mut() {
            *v = f(&idx);
            increment(&mut idx, shape);
        }
        t
    }

    /// i.i.d. standard normal entries.
    pub fn random_normal(shape: &[usize], rng: &mut impl Rng) -> Self {
        let mut t = Self::zeros(shape);
        for v in t.data.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * alpha).collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Self, alpha: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        })
    }

    /// Reorders axes so that axis `k` of the result is axis `perm[k]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let d = self.ndim();
        let mut seen = vec![false; d];
        if perm.len() != d
            || perm
                .iter()
                .any(|&p| p >= d || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::ShapeMismatch(format!(
                "{perm:?} is not a permutation of {d} axes"
            )));
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut src = vec![0usize; d];
        Ok(Self::from_fn(&new_shape, |idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            self.get(&src)
        }))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn frobenius_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }
}

pub(crate) fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Advances a row-major multi-index; wraps to all zeros after the last entry.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for k in (0..shape.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// A vector in C^n. Serialized as separate `re` / `im` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ComplexParts", try_from = "ComplexParts")]
pub struct ComplexVector(Vec<Complex64>);

#[derive(Serialize, Deserialize)]
struct ComplexParts {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<ComplexVector> for ComplexParts {
    fn from(v: ComplexVector) -> Self {
        Self {
            re: v.re(),
            im: v.im(),
        }
    }
}

impl TryFrom<ComplexParts> for ComplexVector {
    type Error = Error;
    fn try_from(p: ComplexParts) -> Result<Self> {
        Self::from_parts(&p.re, &p.im)
    }
}

impl ComplexVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn from_real(re: &[f64]) -> Self {
        Self(re.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::ShapeMismatch(format!(
                "real part has {} entries, imaginary part {}",
                re.len(),
                im.len()
            )));
        }
        Ok(Self(
            re.iter()
                .zip(im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect(),
        ))
    }

    /// Unit vector with i.i.d. standard (complex) Gaussian direction.
    pub fn random_unit(len: usize, real_only: bool, rng: &mut impl Rng) -> Self {
        loop {
            let v = Self(
                (0..len)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = if real_only {
                            0.0
                        } else {
                            rng.sample(StandardNormal)
                        };
                        Complex64::new(re, im)
                    })
                    .collect(),
            );
            if let Some(u) = v.normalized() {
                return u;
            }
        }
    }

    /// The `i`-th canonical basis vector of length `len`.
    pub fn basis(len: usize, i: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); len];
        v[i] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn re(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.im).collect()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| Self(self.0.iter().map(|z| z / n).collect()))
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * alpha).collect())
    }

    /// Bilinear (unconjugated) product `Σ a_i b_i`.
    pub fn dot(&self, other: &Self) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

fn check_factors(a: &DenseTensor, us: &[ComplexVector], hole: Option<usize>) -> Result<()> {
    if us.len() != a.ndim() {
        return Err(Error::ShapeMismatch(format!(
            "tensor has {} axes but {} vectors were supplied",
            a.ndim(),
            us.len()
        )));
    }
    for (axis, (u, &n)) in us.iter().zip(a.shape()).enumerate() {
        if Some(axis) != hole && u.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "axis {axis}: tensor size {n}, vector length {}",
                u.len()
            )));
        }
    }
    Ok(())
}

fn contract_last_real(data: &[f64], n: usize, u: &[Complex64]) -> Vec<Complex64> {
    let ure: Vec<f64> = u.iter().map(|z| z.re).collect();
    let uim: Vec<f64> = u.iter().map(|z| z.im).collect();
    data.chunks_exact(n)
        .map(|row| {
            let mut re = 0.0;
            let mut im = 0.0;
            for j in 0..n {
                re += row[j] * ure[j];
                im += row[j] * uim[j];
            }
            Complex64::new(re, im)
        })
        .collect()
}

fn contract_last_complex(data: &[Complex64], n: usize, u: &[Complex64]) -> Vec<Complex64> {
    data.chunks_exact(n)
        .map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum())
        .collect()
}

fn contract_first_real(data: &[f64], n: usize, u: &[Complex64]) -> Vec<Complex64> {
    let rest = data.len() / n;
    let mut out = vec![Complex64::new(0.0, 0.0); rest];
    for (i, block) in data.chunks_exact(rest).enumerate() {
        let (ur, ui) = (u[i].re, u[i].im);
        for (o, &a) in out.iter_mut().zip(block) {
            o.re += a * ur;
            o.im += a * ui;
        }
    }
    out
}

fn contract_first_complex(data: &[Complex64], n: usize, u: &[Complex64]) -> Vec<Complex64> {
    let rest = data.len() / n;
    let mut out = vec![Complex64::new(0.0, 0.0); rest];
    for (i, block) in data.chunks_exact(rest).enumerate() {
        for (o, a) in out.iter_mut().zip(block) {
            *o += a * u[i];
        }
    }
    out
}

/// Contracts every axis except `hole`; `us[hole]` is ignored.
fn contract_except(a: &DenseTensor, us: &[ComplexVector], hole: usize) -> Vec<Complex64> {
    let shape = a.shape();
    let d = shape.len();
    let mut buf: Option<Vec<Complex64>> = None;
    for axis in (hole + 1..d).rev() {
        let u = us[axis].as_slice();
        buf = Some(match &buf {
            None => contract_last_real(a.data(), shape[axis], u),
            Some(b) => contract_last_complex(b, shape[axis], u),
        });
    }
    for axis in 0..hole {
        let u = us[axis].as_slice();
        buf = Some(match &buf {
            None => contract_first_real(a.data(), shape[axis], u),
            Some(b) => contract_first_complex(b, shape[axis], u),
        });
    }
    buf.unwrap_or_else(|| a.data().iter().map(|&v| Complex64::new(v, 0.0)).collect())
}

/// `⟦A; u_1, …, u_d⟧ = Σ A_{i1…id} u1_{i1} ⋯ ud_{id}` (no conjugation).
pub fn multilinear_form(a: &DenseTensor, us: &[ComplexVector]) -> Result<Complex64> {
    check_factors(a, us, None)?;
    let d = a.ndim();
    let v = contract_except(a, us, d - 1);
    Ok(v.iter().zip(us[d - 1].as_slice()).map(|(x, y)| x * y).sum())
}

/// The vector `v` with `v_j = ⟦A; u_1, …, e_j, …, u_d⟧`, `e_j` at position `hole`.
///
/// `us` has one entry per axis; the entry at `hole` is ignored.
pub fn partial_contraction(
    a: &DenseTensor,
    us: &[ComplexVector],
    hole: usize,
) -> Result<ComplexVector> {
    if hole >= a.ndim() {
        return Err(Error::ShapeMismatch(format!(
            "hole axis {hole} out of range for {} axes",
            a.ndim()
        )));
    }
    check_factors(a, us, Some(hole))?;
    Ok(ComplexVector(contract_except(a, us, hole)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnfoldingSpec {
    pub row_axes: Vec<usize>,
    pub col_axes: Vec<usize>,
}

impl UnfoldingSpec {
    pub fn new(row_axes: Vec<usize>, col_axes: Vec<usize>) -> Self {
        Self { row_axes, col_axes }
    }

    /// The spec reproducing numpy's `reshape(n_0 ⋯ n_{k-1}, -1, order='c')`
    /// of an untransposed tensor with `d` axes split after axis `k`.
    pub fn row_major_split(d: usize, k: usize) -> Self {
        Self {
            row_axes: (0..k).rev().collect(),
            col_axes: (k..d).rev().collect(),
        }
    }

    pub fn validate(&self, ndim: usize) -> Result<()> {
        let mut seen = vec![false; ndim];
        for &ax in self.row_axes.iter().chain(&self.col_axes) {
            if ax >= ndim {
                return Err(Error::InvalidUnfolding(format!(
                    "axis {ax} out of range for {ndim} axes"
                )));
            }
            if std::mem::replace(&mut seen[ax], true) {
                return Err(Error::InvalidUnfolding(format!("axis {ax} repeated")));
            }
        }
        if let Some(ax) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidUnfolding(format!("axis {ax} missing")));
        }
        Ok(())
    }

    /// Column-major place values of each tensor axis within the row / column index.
    fn place_values(&self, shape: &[usize]) -> (Vec<usize>, Vec<usize>, usize, usize) {
        let mut row_pv = vec![0usize; shape.len()];
        let mut col_pv = vec![0usize; shape.len()];
        let mut rows = 1;
        for &ax in &self.row_axes {
            row_pv[ax] = rows;
            rows *= shape[ax];
        }
        let mut cols = 1;
        for &ax in &self.col_axes {
            col_pv[ax] = cols;
            cols *= shape[ax];
        }
        (row_pv, col_pv, rows, cols)
    }
}

pub fn unfold(a: &DenseTensor, spec: &UnfoldingSpec) -> Result<RealMatrix> {
    spec.validate(a.ndim())?;
    let shape = a.shape();
    let (row_pv, col_pv, rows, cols) = spec.place_values(shape);
    let mut m = RealMatrix::zeros(rows, cols);
    let mut idx = vec![0usize; shape.len()];
    for &v in a.data() {
        let r: usize = idx.iter().zip(&row_pv).map(|(i, p)| i * p).sum();
        let c: usize = idx.iter().zip(&col_pv).map(|(i, p)| i * p).sum();
        m[(r, c)] = v;
        increment(&mut idx, shape);
    }
    Ok(m)
}

/// Inverse of [`unfold`].
pub fn fold(m: &RealMatrix, shape: &[usize], spec: &UnfoldingSpec) -> Result<DenseTensor> {
    spec.validate(shape.len())?;
    let (row_pv, col_pv, rows, cols) = spec.place_values(shape);
    if m.rows() != rows || m.cols() != cols {
        return Err(Error::ShapeMismatch(format!(
            "matrix is {}x{}, unfolding of {shape:?} is {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(DenseTensor::from_fn(shape, |idx| {
        let r: usize = idx.iter().zip(&row_pv).map(|(i, p)| i * p).sum();
        let c: usize = idx.iter().zip(&col_pv).map(|(i, p)| i * p).sum();
        m[(r, c)]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::gap_kernel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eye2() -> DenseTensor {
        DenseTensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            DenseTensor::new(vec![2, 2], vec![1.0; 3]),
            Err(Error::ShapeMismatch(_))
        ));
        assert_eq!(
            DenseTensor::new(vec![2], vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        );
        assert!(DenseTensor::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn identity_form() {
        let us = vec![ComplexVector::basis(2, 0), ComplexVector::basis(2, 0)];
        assert_eq!(multilinear_form(&eye2(), &us).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn gap_kernel_complex_witness_has_modulus_four() {
        let k = gap_kernel();
        let x = ComplexVector::new(vec![c(0.5, 0.5), c(-0.5, 0.5)]);
        let us = vec![x.clone(), x.clone(), x.clone(), x];
        let v = multilinear_form(&k, &us).unwrap();
        assert!((v.norm() - 4.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn dimension_mismatch_names_the_axis() {
        let k = gap_kernel();
        let mut us = vec![ComplexVector::basis(2, 0); 4];
        us[2] = ComplexVector::basis(3, 0);
        match multilinear_form(&k, &us) {
            Err(Error::ShapeMismatch(msg)) => assert!(msg.contains("axis 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(multilinear_form(&k, &us[..3]).is_err());
    }

    #[test]
    fn form_matches_nested_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DenseTensor::random_normal(&[3, 2, 2], &mut rng);
        let us: Vec<_> = a
            .shape()
            .iter()
            .map(|&n| ComplexVector::random_unit(n, true, &mut rng))
            .collect();
        let mut expect = c(0.0, 0.0);
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..2 {
                    expect += a.get(&[i, j, k])
                        * us[0].as_slice()[i]
                        * us[1].as_slice()[j]
                        * us[2].as_slice()[k];
                }
            }
        }
        let got = multilinear_form(&a, &us).unwrap();
        assert!((got - expect).norm() < 1e-13);
    }

    #[test]
    fn partial_contraction_picks_column() {
        let us = vec![ComplexVector::basis(2, 0), ComplexVector::basis(2, 1)];
        let v = partial_contraction(&eye2(), &us, 0).unwrap();
        assert_eq!(v.as_slice(), &[c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn partial_contraction_matches_loops_and_fills_hole() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseTensor::random_normal(&[2, 3, 4], &mut rng);
        let us: Vec<_> = a
            .shape()
            .iter()
            .map(|&n| ComplexVector::random_unit(n, false, &mut rng))
            .collect();
        let v = partial_contraction(&a, &us, 1).unwrap();
        for j in 0..3 {
            let mut expect = c(0.0, 0.0);
            for i in 0..2 {
                for k in 0..4 {
                    expect += a.get(&[i, j, k]) * us[0].as_slice()[i] * us[2].as_slice()[k];
                }
            }
            assert!((v.as_slice()[j] - expect).norm() < 1e-13);
        }
        for hole in 0..3 {
            let v = partial_contraction(&a, &us, hole).unwrap();
            let full = multilinear_form(&a, &us).unwrap();
            assert!((v.dot(&us[hole]) - full).norm() < 1e-13);
        }
    }

    #[test]
    fn unfold_matrix_and_transpose() {
        let a = DenseTensor::new(vec![2, 3], (0..6).map(f64::from).collect()).unwrap();
        let m = unfold(&a, &UnfoldingSpec::new(vec![0], vec![1])).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert_eq!(m.data(), a.data());
        let t = unfold(&a, &UnfoldingSpec::new(vec![1], vec![0])).unwrap();
        assert_eq!((t.rows(), t.cols()), (3, 2));
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(t[(j, i)], a.get(&[i, j]));
            }
        }
    }

    #[test]
    fn gap_kernel_display_via_reversed_column_axes() {
        let k = gap_kernel();
        let spec = UnfoldingSpec::row_major_split(4, 1);
        assert_eq!(spec, UnfoldingSpec::new(vec![0], vec![3, 2, 1]));
        let m = unfold(&k, &spec).unwrap();
        let expect = [
            [2.0, 0.0, 0.0, -2.0, 0.0, -2.0, -2.0, 0.0],
            [0.0, -2.0, -2.0, 0.0, -2.0, 0.0, 0.0, 2.0],
        ];
        for (r, row) in expect.iter().enumerate() {
            for (col, &v) in row.iter().enumerate() {
                assert_eq!(m[(r, col)], v);
            }
        }
    }

    #[test]
    fn row_major_split_equals_plain_reshape() {
        // order='c' reshape of a non-symmetric tensor is the raw buffer
        let a = DenseTensor::new(vec![2, 3, 4], (0..24).map(f64::from).collect()).unwrap();
        let m = unfold(&a, &UnfoldingSpec::row_major_split(3, 1)).unwrap();
        assert_eq!(m.data(), a.data());
        let m = unfold(&a, &UnfoldingSpec::row_major_split(3, 2)).unwrap();
        assert_eq!(m.data(), a.data());
    }

    #[test]
    fn column_major_convention() {
        // A_(1;23) of a 2x3x4 tensor: column index j + 3k
        let a = DenseTensor::new(vec![2, 3, 4], (0..24).map(f64::from).collect()).unwrap();
        let m = unfold(&a, &UnfoldingSpec::new(vec![0], vec![1, 2])).unwrap();
        assert_eq!(m[(1, 2 + 3 * 3)], a.get(&[1, 2, 3]));
    }

    #[test]
    fn invalid_specs() {
        let a = DenseTensor::zeros(&[2, 2, 2]);
        for spec in [
            UnfoldingSpec::new(vec![0], vec![1]),
            UnfoldingSpec::new(vec![0, 0], vec![1, 2]),
            UnfoldingSpec::new(vec![0], vec![1, 3]),
        ] {
            assert!(matches!(unfold(&a, &spec), Err(Error::InvalidUnfolding(_))));
        }
    }

    #[test]
    fn frobenius_values() {
        assert_eq!(DenseTensor::zeros(&[3, 2]).frobenius(), 0.0);
        assert!((gap_kernel().frobenius() - 32f64.sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = DenseTensor::random_normal(&[3, 4, 2], &mut rng);
        let inner = a.frobenius_inner(&a).unwrap();
        assert!((inner - a.frobenius().powi(2)).abs() < 1e-13);
        assert!(a.frobenius_inner(&DenseTensor::zeros(&[3, 4])).is_err());
    }

    #[test]
    fn permute_axes_moves_entries() {
        let a = DenseTensor::new(vec![2, 3, 4], (0..24).map(f64::from).collect()).unwrap();
        let p = a.permute_axes(&[2, 0, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 3]);
        assert_eq!(p.get(&[3, 1, 2]), a.get(&[1, 2, 3]));
        assert!(a.permute_axes(&[0, 0, 1]).is_err());
    }
}
