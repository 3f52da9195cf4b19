//! Reference values for `‖T‖₂`: explicit Jacobians, a matrix-free
//! convolution operator with the power method, the spectral density matrix
//! `F(τ)`, and the exact norm of circular convolutions.
//!
//! Vectorization order of inputs and outputs is channel-fastest, then the
//! last spatial axis, up to the first spatial axis (for 2-D: channel, then
//! width, then height). Singular values do not depend on it.

use nalgebra::{ComplexField, DMatrix};
use ndarray::linalg::general_mat_mul;
use ndarray::{ArrayView2, ArrayViewMut2, ShapeBuilder};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::{ConvConfig, Padding};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Matrix, RealMatrix, Scalar};
use crate::seed::stream_rng;
use crate::tensor::{increment, row_major_strides, DenseTensor};

pub const DEFAULT_DENSE_CAP: usize = 40_000_000;

pub trait LinearOperator: Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn forward(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;
}

impl LinearOperator for RealMatrix {
    fn input_len(&self) -> usize {
        self.cols()
    }
    fn output_len(&self) -> usize {
        self.rows()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.matvec_transpose(y)
    }
}

fn check_kernel(k: &DenseTensor, config: &ConvConfig) -> Result<()> {
    config.validate(k.shape())
}

/// Input position on one axis read by output position `p` (stride applied) at tap `t`.
fn source_index(p: usize, t: usize, before: usize, n: usize, padding: Padding) -> Option<usize> {
    let q = p as isize + t as isize - before as isize;
    match padding {
        Padding::Zero => (0..n as isize).contains(&q).then_some(q as usize),
        Padding::Circular => Some(q.rem_euclid(n as isize) as usize),
    }
}

/// The Jacobian `T` as a dense `c_out·(n/s)^d × c_in·n^d` matrix.
pub fn build_dense_jacobian(k: &DenseTensor, config: &ConvConfig) -> Result<RealMatrix> {
    build_dense_jacobian_capped(k, config, DEFAULT_DENSE_CAP)
}

pub fn build_dense_jacobian_capped(
    k: &DenseTensor,
    config: &ConvConfig,
    cap: usize,
) -> Result<RealMatrix> {
    check_kernel(k, config)?;
    let shape = k.shape();
    let (c_out, c_in) = (shape[0], shape[1]);
    let spatial = &shape[2..];
    let d = spatial.len();
    let n = config.input_size;
    let s = config.stride;
    let m = config.output_size();
    let rows = c_out * m.pow(d as u32);
    let cols = c_in * n.pow(d as u32);
    let entries = rows.saturating_mul(cols);
    if entries > cap {
        return Err(Error::SizeCap { entries, cap });
    }
    let taps: usize = spatial.iter().product();
    let out_shape = vec![m; d];
    let mut jac = RealMatrix::zeros(rows, cols);
    let mut o = vec![0usize; d];
    let mut t = vec![0usize; d];
    for out_pos in 0..m.pow(d as u32) {
        t.iter_mut().for_each(|v| *v = 0);
        'taps: for tap in 0..taps {
            let mut in_pos = 0;
            for a in 0..d {
                match source_index(o[a] * s, t[a], config.offsets[a].0, n, config.padding) {
                    Some(q) => in_pos = in_pos * n + q,
                    None => {
                        increment(&mut t, spatial);
                        continue 'taps;
                    }
                }
            }
            for co in 0..c_out {
                for ci in 0..c_in {
                    jac[(out_pos * c_out + co, in_pos * c_in + ci)] +=
                        k.data()[(co * c_in + ci) * taps + tap];
                }
            }
            increment(&mut t, spatial);
        }
        increment(&mut o, &out_shape);
    }
    Ok(jac)
}

/// Matrix-free convolution operator.
///
/// The input is copied onto a padded grid (zeros or wrapped values), and the
/// stride-1 output is accumulated tap by tap as one GEMM per tap over a
/// "wide" row range of the padded grid; strided outputs are read off at
/// multiples of the stride. The adjoint runs the same steps transposed.
#[derive(Debug, Clone)]
pub struct ConvOperator {
    c_out: usize,
    c_in: usize,
    input_size: usize,
    output_size: usize,
    spatial_dims: usize,
    /// For each padded grid position, the input position it copies.
    pad_source: Vec<Option<usize>>,
    /// Row offset of each tap within the padded grid, and its `c_in × c_out` block.
    taps: Vec<(usize, Vec<f64>)>,
    wide_rows: usize,
    /// Wide-grid row of each output position.
    out_rows: Vec<usize>,
    stride: usize,
    /// For stride > 1: padded-grid row of the first output of each line
    /// along the last axis.
    line_rows: Vec<usize>,
}

pub fn conv_operator(k: &DenseTensor, config: &ConvConfig) -> Result<ConvOperator> {
    check_kernel(k, config)?;
    let shape = k.shape();
    let (c_out, c_in) = (shape[0], shape[1]);
    let spatial = &shape[2..];
    let d = spatial.len();
    let n = config.input_size;
    let s = config.stride;
    let m = config.output_size();

    let padded: Vec<usize> = spatial.iter().map(|&kk| n + kk - 1).collect();
    let pstride = row_major_strides(&padded);
    let total: usize = padded.iter().product();

    let mut pad_source = Vec::with_capacity(total);
    let mut q = vec![0usize; d];
    for _ in 0..total {
        let mut src = Some(0usize);
        for a in 0..d {
            src = src.and_then(|acc| {
                source_index(q[a], 0, config.offsets[a].0, n, config.padding).map(|i| acc * n + i)
            });
        }
        pad_source.push(src);
        increment(&mut q, &padded);
    }

    let n_taps: usize = spatial.iter().product();
    let mut taps = Vec::with_capacity(n_taps);
    let mut t = vec![0usize; d];
    for tap in 0..n_taps {
        let off: usize = t.iter().zip(&pstride).map(|(a, b)| a * b).sum();
        let mut block = vec![0.0; c_in * c_out];
        for co in 0..c_out {
            for ci in 0..c_in {
                block[ci * c_out + co] = k.data()[(co * c_in + ci) * n_taps + tap];
            }
        }
        taps.push((off, block));
        increment(&mut t, spatial);
    }

    let wide_rows = pstride.iter().map(|&ps| (n - 1) * ps).sum::<usize>() + 1;
    let out_shape = vec![m; d];
    let mut out_rows = Vec::with_capacity(m.pow(d as u32));
    let mut o = vec![0usize; d];
    for _ in 0..m.pow(d as u32) {
        out_rows.push(o.iter().zip(&pstride).map(|(&oi, &ps)| oi * s * ps).sum());
        increment(&mut o, &out_shape);
    }
    let line_rows = out_rows.iter().step_by(m).copied().collect();

    Ok(ConvOperator {
        c_out,
        c_in,
        input_size: n,
        output_size: m,
        spatial_dims: d,
        pad_source,
        taps,
        wide_rows,
        out_rows,
        stride: s,
        line_rows,
    })
}

impl ConvOperator {
    /// `(c_in, n, …, n)`.
    pub fn input_dims(&self) -> Vec<usize> {
        std::iter::once(self.c_in)
            .chain(std::iter::repeat_n(self.input_size, self.spatial_dims))
            .collect()
    }

    /// `(c_out, n/s, …, n/s)`.
    pub fn output_dims(&self) -> Vec<usize> {
        std::iter::once(self.c_out)
            .chain(std::iter::repeat_n(self.output_size, self.spatial_dims))
            .collect()
    }
}

impl LinearOperator for ConvOperator {
    fn input_len(&self) -> usize {
        self.c_in * self.input_size.pow(self.spatial_dims as u32)
    }

    fn output_len(&self) -> usize {
        self.c_out * self.out_rows.len()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_len());
        let (ci, co) = (self.c_in, self.c_out);
        let mut xpad = vec![0.0; self.pad_source.len() * ci];
        for (dst, src) in xpad.chunks_exact_mut(ci).zip(&self.pad_source) {
            if let Some(p) = src {
                dst.copy_from_slice(&x[p * ci..(p + 1) * ci]);
            }
        }
        if self.stride > 1 {
            return self.forward_strided(&xpad);
        }
        let r = self.wide_rows;
        let mut wide = vec![0.0; r * co];
        {
            let mut yv = ArrayViewMut2::from_shape((r, co), &mut wide).expect("wide shape");
            for (off, block) in &self.taps {
                let xv = ArrayView2::from_shape((r, ci), &xpad[off * ci..(off + r) * ci])
                    .expect("tap window");
                let wv = ArrayView2::from_shape((ci, co), block).expect("tap block");
                general_mat_mul(1.0, &xv, &wv, 1.0, &mut yv);
            }
        }
        let mut y = vec![0.0; self.output_len()];
        for (dst, &row) in y.chunks_exact_mut(co).zip(&self.out_rows) {
            dst.copy_from_slice(&wide[row * co..(row + 1) * co]);
        }
        y
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.output_len());
        let ci = self.c_in;
        let gpad = if self.stride > 1 {
            self.adjoint_strided(y)
        } else {
            self.adjoint_wide(y)
        };
        let mut x = vec![0.0; self.input_len()];
        for (src, dst) in gpad.chunks_exact(ci).zip(&self.pad_source) {
            if let Some(p) = dst {
                for (a, b) in x[p * ci..(p + 1) * ci].iter_mut().zip(src) {
                    *a += b;
                }
            }
        }
        x
    }
}

impl ConvOperator {
    fn adjoint_wide(&self, y: &[f64]) -> Vec<f64> {
        let (ci, co) = (self.c_in, self.c_out);
        let r = self.wide_rows;
        let mut wide = vec![0.0; r * co];
        for (src, &row) in y.chunks_exact(co).zip(&self.out_rows) {
            wide[row * co..(row + 1) * co].copy_from_slice(src);
        }
        let mut gpad = vec![0.0; self.pad_source.len() * ci];
        let yv = ArrayView2::from_shape((r, co), &wide).expect("wide shape");
        for (off, block) in &self.taps {
            let mut gv = ArrayViewMut2::from_shape((r, ci), &mut gpad[off * ci..(off + r) * ci])
                .expect("tap window");
            let wv = ArrayView2::from_shape((ci, co), block).expect("tap block");
            general_mat_mul(1.0, &yv, &wv.t(), 1.0, &mut gv);
        }
        gpad
    }

    /// Strided forward: one GEMM per (tap, output line), reading every
    /// `s`-th padded row so skipped outputs are never computed.
    fn forward_strided(&self, xpad: &[f64]) -> Vec<f64> {
        let (ci, co, m, s) = (self.c_in, self.c_out, self.output_size, self.stride);
        let mut y = vec![0.0; self.output_len()];
        for (off, block) in &self.taps {
            let wv = ArrayView2::from_shape((ci, co), block).expect("tap block");
            for (line, &base) in self.line_rows.iter().enumerate() {
                let start = (base + off) * ci;
                let xv = ArrayView2::from_shape((m, ci).strides((s * ci, 1)), &xpad[start..])
                    .expect("strided window");
                let mut yv =
                    ArrayViewMut2::from_shape((m, co), &mut y[line * m * co..(line + 1) * m * co])
                        .expect("output line");
                general_mat_mul(1.0, &xv, &wv, 1.0, &mut yv);
            }
        }
        y
    }

    fn adjoint_strided(&self, y: &[f64]) -> Vec<f64> {
        let (ci, co, m, s) = (self.c_in, self.c_out, self.output_size, self.stride);
        let mut gpad = vec![0.0; self.pad_source.len() * ci];
        for (off, block) in &self.taps {
            let wv = ArrayView2::from_shape((ci, co), block).expect("tap block");
            for (line, &base) in self.line_rows.iter().enumerate() {
                let start = (base + off) * ci;
                let yv = ArrayView2::from_shape((m, co), &y[line * m * co..(line + 1) * m * co])
                    .expect("output line");
                let mut gv =
                    ArrayViewMut2::from_shape((m, ci).strides((s * ci, 1)), &mut gpad[start..])
                        .expect("strided window");
                general_mat_mul(1.0, &yv, &wv.t(), 1.0, &mut gv);
            }
        }
        gpad
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSettings {
    pub iters: usize,
    /// Relative change of the estimate that stops the iteration; 0 runs all `iters`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            iters: 500,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Power method on `TᵀT`: `x ← TᵀTx / ‖TᵀTx‖`, returning `√⟨x, TᵀTx⟩`.
/// The estimate never exceeds `‖T‖₂`.
pub fn power_method_norm(op: &dyn LinearOperator, settings: &PowerSettings) -> PowerEstimate {
    let mut rng = stream_rng(settings.seed, "power", 0);
    let mut x: Vec<f64> = (0..op.input_len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let nx = l2(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut norm = 0.0f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.iters.max(1) {
        let z = op.adjoint(&op.forward(&x));
        iterations += 1;
        let rq: f64 = x.iter().zip(&z).map(|(a, b)| a * b).sum();
        let next = rq.max(0.0).sqrt();
        let nz = l2(&z);
        let change = (next - norm).abs();
        norm = next;
        if nz == 0.0 {
            converged = true;
            break;
        }
        if change <= settings.tol * next {
            converged = true;
            break;
        }
        x = z.into_iter().map(|v| v / nz).collect();
    }
    PowerEstimate {
        norm,
        iterations,
        converged,
    }
}

/// Largest singular value from a symmetric eigendecomposition of the
/// smaller Gram matrix. Exact up to rounding; for small matrices only.
pub fn exact_spectral_norm<T>(m: &Matrix<T>) -> f64
where
    T: Scalar + ComplexField<RealField = f64>,
{
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let g = m.small_gram();
    let n = g.rows();
    let gm = DMatrix::from_row_slice(n, n, g.data());
    gm.symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v))
        .sqrt()
}

fn check_offsets(k: &DenseTensor, offsets: &[(usize, usize)]) -> Result<usize> {
    if k.ndim() < 3 {
        return Err(Error::ShapeMismatch(format!(
            "kernel needs spatial axes, got {:?}",
            k.shape()
        )));
    }
    let spatial = &k.shape()[2..];
    if offsets.len() != spatial.len() {
        return Err(Error::InvalidConfig(format!(
            "{} offset pairs for {} spatial axes",
            offsets.len(),
            spatial.len()
        )));
    }
    for (a, (&kk, &(b, e))) in spatial.iter().zip(offsets).enumerate() {
        if b + e + 1 != kk {
            return Err(Error::InvalidConfig(format!(
                "axis {a}: offsets ({b}, {e}) do not match kernel size {kk}"
            )));
        }
    }
    Ok(spatial.len())
}

/// `F(τ) = Σ_t K[:, :, t] e^{i⟨t − before, τ⟩}`, a `c_out × c_in` complex matrix.
pub fn spectral_density(
    k: &DenseTensor,
    taus: &[f64],
    offsets: &[(usize, usize)],
) -> Result<ComplexMatrix> {
    let d = check_offsets(k, offsets)?;
    if taus.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "{} frequencies for {d} spatial axes",
            taus.len()
        )));
    }
    let spatial = &k.shape()[2..];
    let n_taps: usize = spatial.iter().product();
    let mut phase = Vec::with_capacity(n_taps);
    let mut t = vec![0usize; d];
    for _ in 0..n_taps {
        let angle: f64 = (0..d)
            .map(|a| (t[a] as f64 - offsets[a].0 as f64) * taus[a])
            .sum();
        phase.push(Complex64::from_polar(1.0, angle));
        increment(&mut t, spatial);
    }
    let (c_out, c_in) = (k.shape()[0], k.shape()[1]);
    let data = k
        .data()
        .chunks_exact(n_taps)
        .map(|taps| {
            taps.iter()
                .zip(&phase)
                .map(|(&v, z)| z * v)
                .sum::<Complex64>()
        })
        .collect();
    ComplexMatrix::from_vec(c_out, c_in, data)
}

/// `max_τ ‖F(τ)‖₂` over the uniform grid with `points` samples `2πj/points` per axis.
pub fn density_grid_max(k: &DenseTensor, offsets: &[(usize, usize)], points: usize) -> Result<f64> {
    let d = check_offsets(k, offsets)?;
    let grid = vec![points; d];
    let mut j = vec![0usize; d];
    let mut best = 0.0f64;
    for _ in 0..points.pow(d as u32) {
        let taus: Vec<f64> = j
            .iter()
            .map(|&ji| 2.0 * std::f64::consts::PI * ji as f64 / points as f64)
            .collect();
        let f = spectral_density(k, &taus, offsets)?;
        best = best.max(exact_spectral_norm(&f));
        increment(&mut j, &grid);
    }
    Ok(best)
}

/// Exact `‖T‖₂` of the stride-1 circular convolution on `n^d` inputs: the
/// largest `‖F(τ)‖₂` over the grid `τ_a = 2πj/n`.
pub fn circular_exact_norm(k: &DenseTensor, n: usize, offsets: &[(usize, usize)]) -> Result<f64> {
    check_offsets(k, offsets)?;
    if n == 0 {
        return Err(Error::InvalidConfig("n must be positive".into()));
    }
    density_grid_max(k, offsets, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::default_offsets;
    use crate::kernels::{delta, gap_kernel, gaussian};

    #[test]
    fn one_dimensional_displays() {
        // n=4, w=3, before=1
        let k = DenseTensor::new(vec![1, 1, 3], vec![10.0, 11.0, 12.0]).unwrap();
        let zero = ConvConfig::same(k.shape(), Padding::Zero, 1, 4);
        let t = build_dense_jacobian(&k, &zero).unwrap();
        let (k0, k1, k2) = (10.0, 11.0, 12.0);
        let expect_zero = [
            [k1, k2, 0.0, 0.0],
            [k0, k1, k2, 0.0],
            [0.0, k0, k1, k2],
            [0.0, 0.0, k0, k1],
        ];
        let circ = ConvConfig::same(k.shape(), Padding::Circular, 1, 4);
        let c = build_dense_jacobian(&k, &circ).unwrap();
        let expect_circ = [
            [k1, k2, 0.0, k0],
            [k0, k1, k2, 0.0],
            [0.0, k0, k1, k2],
            [k2, 0.0, k0, k1],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(t[(i, j)], expect_zero[i][j]);
                assert_eq!(c[(i, j)], expect_circ[i][j]);
            }
        }
    }

    #[test]
    fn delta_kernel_is_identity() {
        let k = delta(&[1, 1, 3, 3]);
        for padding in [Padding::Zero, Padding::Circular] {
            let cfg = ConvConfig::same(k.shape(), padding, 1, 5);
            assert_eq!(
                build_dense_jacobian(&k, &cfg).unwrap(),
                RealMatrix::identity(25)
            );
        }
    }

    #[test]
    fn circulant_columns_are_cyclic_shifts() {
        let k = gaussian(&[2, 3, 3, 3], 4);
        let n = 6;
        let cfg = ConvConfig::same(k.shape(), Padding::Circular, 1, n);
        let t = build_dense_jacobian(&k, &cfg).unwrap();
        let (co, ci) = (2, 3);
        // shifting the input by one column shifts the output by one column
        for i in 0..n {
            for j in 0..n {
                for i2 in 0..n {
                    for j2 in 0..n {
                        for a in 0..co {
                            for b in 0..ci {
                                let r = (i * n + j) * co + a;
                                let c = (i2 * n + j2) * ci + b;
                                let r1 = (i * n + (j + 1) % n) * co + a;
                                let c1 = (i2 * n + (j2 + 1) % n) * ci + b;
                                assert_eq!(t[(r, c)], t[(r1, c1)]);
                                let r2 = (((i + 1) % n) * n + j) * co + a;
                                let c2 = (((i2 + 1) % n) * n + j2) * ci + b;
                                assert_eq!(t[(r, c)], t[(r2, c2)]);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn size_cap() {
        let k = gaussian(&[4, 4, 3, 3], 1);
        let cfg = ConvConfig::same(k.shape(), Padding::Zero, 1, 16);
        assert!(matches!(
            build_dense_jacobian_capped(&k, &cfg, 1000),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn forward_on_delta_input_copies_kernel_slice() {
        let k = gaussian(&[2, 1, 3, 3], 6);
        let n = 5;
        let op = conv_operator(&k, &ConvConfig::same(k.shape(), Padding::Zero, 1, n)).unwrap();
        let mut x = vec![0.0; n * n];
        x[2 * n + 2] = 1.0;
        let y = op.forward(&x);
        // y[p] = K[:, :, 2 - p + 1] for |p - 2| <= 1
        for i in 0..n {
            for j in 0..n {
                for c in 0..2 {
                    let v = y[(i * n + j) * 2 + c];
                    let (ti, tj) = (2 + 1 - i as isize, 2 + 1 - j as isize);
                    let expect = if (0..3).contains(&ti) && (0..3).contains(&tj) {
                        k.get(&[c, 0, ti as usize, tj as usize])
                    } else {
                        0.0
                    };
                    assert_eq!(v, expect);
                }
            }
        }
    }

    #[test]
    fn operator_matches_dense_and_adjoint() {
        let cases = [
            (vec![2, 3, 3, 3], Padding::Zero, 1, 6),
            (vec![2, 3, 3, 2], Padding::Circular, 1, 5),
            (vec![3, 2, 5, 3], Padding::Zero, 2, 8),
            (vec![2, 2, 3, 3], Padding::Circular, 2, 6),
            (vec![1, 2, 4, 4], Padding::Zero, 4, 8),
            (vec![2, 2, 3], Padding::Zero, 1, 9),
            (vec![2, 1, 3, 2, 3], Padding::Circular, 1, 4),
        ];
        for (seed, (shape, padding, s, n)) in cases.into_iter().enumerate() {
            let k = gaussian(&shape, seed as u64);
            let cfg = ConvConfig::same(&shape, padding, s, n);
            let t = build_dense_jacobian(&k, &cfg).unwrap();
            let op = conv_operator(&k, &cfg).unwrap();
            assert_eq!((op.output_len(), op.input_len()), (t.rows(), t.cols()));
            let mut rng = stream_rng(seed as u64, "test", 0);
            for _ in 0..20 {
                let x: Vec<f64> = (0..op.input_len())
                    .map(|_| rng.sample(StandardNormal))
                    .collect();
                let y: Vec<f64> = (0..op.output_len())
                    .map(|_| rng.sample(StandardNormal))
                    .collect();
                let fx = op.forward(&x);
                let err = l2(&fx
                    .iter()
                    .zip(t.matvec(&x))
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>());
                assert!(
                    err <= 1e-12 * l2(&x).max(1.0),
                    "{shape:?} {padding:?}: {err}"
                );
                let aty = op.adjoint(&y);
                let lhs: f64 = y.iter().zip(&fx).map(|(a, b)| a * b).sum();
                let rhs: f64 = aty.iter().zip(&x).map(|(a, b)| a * b).sum();
                assert!((lhs - rhs).abs() <= 1e-10 * l2(&x) * l2(&y));
            }
        }
    }

    #[test]
    fn identity_operator_norm() {
        let est = power_method_norm(&RealMatrix::identity(7), &PowerSettings::default());
        assert!((est.norm - 1.0).abs() < 1e-14);
        assert!(est.converged);
        let zero = power_method_norm(&RealMatrix::zeros(3, 3), &PowerSettings::default());
        assert_eq!(zero.norm, 0.0);
    }

    #[test]
    fn density_at_zero_frequency_is_tap_sum() {
        let k = gaussian(&[2, 3, 3, 2], 9);
        let offs = default_offsets(k.shape());
        let f = spectral_density(&k, &[0.0, 0.0], &offs).unwrap();
        for a in 0..2 {
            for b in 0..3 {
                let sum: f64 = (0..3)
                    .flat_map(|i| (0..2).map(move |j| (i, j)))
                    .map(|(i, j)| k.get(&[a, b, i, j]))
                    .sum();
                assert!((f[(a, b)] - Complex64::new(sum, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn one_by_one_density_is_constant() {
        let k = gaussian(&[3, 2, 1, 1], 1);
        let f = spectral_density(&k, &[0.7, -2.1], &[(0, 0), (0, 0)]).unwrap();
        for (z, &v) in f.data().iter().zip(k.data()) {
            assert!((z - Complex64::new(v, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn gap_kernel_circular_norm() {
        let k = gap_kernel();
        let v = circular_exact_norm(&k, 4, &default_offsets(k.shape())).unwrap();
        assert!((v - 8.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn delta_circular_norm() {
        let k = delta(&[1, 1, 3, 3]);
        for n in [3, 4, 7] {
            let v = circular_exact_norm(&k, n, &default_offsets(k.shape())).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_norm_on_diagonal() {
        let m = RealMatrix::from_vec(2, 3, vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((exact_spectral_norm(&m) - 3.0).abs() < 1e-14);
    }
}
