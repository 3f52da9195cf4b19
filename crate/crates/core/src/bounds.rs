//! Convolution configuration, the F4 bound, strided and d-dimensional TN
//! bounds, and the per-kernel [`BoundReport`].

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopm::{scaled_bound, HopmConfig, SigmaEstimate, TnBound};
use crate::matrix::{matrix_spectral_norm, DEFAULT_MATRIX_ITERS, DEFAULT_MATRIX_TOL};
use crate::oracle::{conv_operator, power_method_norm, PowerSettings};
use crate::tensor::{unfold, DenseTensor, UnfoldingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Zero,
    Circular,
}

impl std::str::FromStr for Padding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "circular" => Ok(Self::Circular),
            other => Err(Error::InvalidConfig(format!("unknown padding {other:?}"))),
        }
    }
}

impl std::fmt::Display for Padding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::Circular => "circular",
        })
    }
}

/// Which Jacobian `T` a kernel denotes.
///
/// Per spatial axis, `offsets[a] = (before, after)` with
/// `before + after + 1` equal to the kernel size: output position `p` reads
/// input positions `p·stride + t − before` for taps `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvConfig {
    pub padding: Padding,
    pub offsets: Vec<(usize, usize)>,
    pub stride: usize,
    /// Input size `n`, the same on every spatial axis.
    pub input_size: usize,
}

impl ConvConfig {
    /// Size-preserving offsets `before = ⌊k/2⌋`, `after = k − 1 − ⌊k/2⌋`.
    pub fn same(
        kernel_shape: &[usize],
        padding: Padding,
        stride: usize,
        input_size: usize,
    ) -> Self {
        Self {
            padding,
            offsets: default_offsets(kernel_shape),
            stride,
            input_size,
        }
    }

    pub fn spatial_dims(&self) -> usize {
        self.offsets.len()
    }

    pub fn output_size(&self) -> usize {
        self.input_size / self.stride
    }

    /// Checks the configuration against a kernel shape, including the
    /// restrictions the oracles need: `stride | n`, and `n ≥` every kernel
    /// size for circular padding.
    pub fn validate(&self, kernel_shape: &[usize]) -> Result<()> {
        if kernel_shape.len() < 3 {
            return Err(Error::ShapeMismatch(format!(
                "kernel needs (c_out, c_in, spatial…) axes, got {kernel_shape:?}"
            )));
        }
        let spatial = &kernel_shape[2..];
        if spatial.len() != self.offsets.len() {
            return Err(Error::InvalidConfig(format!(
                "{} offset pairs for {} spatial axes",
                self.offsets.len(),
                spatial.len()
            )));
        }
        for (a, (&k, &(b, e))) in spatial.iter().zip(&self.offsets).enumerate() {
            if b + e + 1 != k {
                return Err(Error::InvalidConfig(format!(
                    "axis {a}: offsets ({b}, {e}) do not match kernel size {k}"
                )));
            }
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be positive".into()));
        }
        if self.input_size == 0 {
            return Err(Error::InvalidConfig("input size must be positive".into()));
        }
        if !self.input_size.is_multiple_of(self.stride) {
            return Err(Error::Unsupported(format!(
                "input size {} is not divisible by stride {}",
                self.input_size, self.stride
            )));
        }
        if self.padding == Padding::Circular {
            if let Some(&k) = spatial.iter().find(|&&k| k > self.input_size) {
                return Err(Error::Unsupported(format!(
                    "circular padding needs n >= kernel size ({} < {k})",
                    self.input_size
                )));
            }
        }
        Ok(())
    }
}

pub fn default_offsets(kernel_shape: &[usize]) -> Vec<(usize, usize)> {
    kernel_shape
        .iter()
        .skip(2)
        .map(|&k| (k / 2, k - 1 - k / 2))
        .collect()
}

fn require_4d(k: &DenseTensor) -> Result<()> {
    if k.ndim() != 4 {
        return Err(Error::ShapeMismatch(format!(
            "expected a (c_out, c_in, h, w) kernel, got shape {:?}",
            k.shape()
        )));
    }
    Ok(())
}

/// The four unfoldings `(13;24)`, `(14;23)`, `(1;234)`, `(2;134)` of a 4-axis kernel.
pub fn f4_unfoldings() -> [UnfoldingSpec; 4] {
    [
        UnfoldingSpec::new(vec![0, 2], vec![1, 3]),
        UnfoldingSpec::new(vec![0, 3], vec![1, 2]),
        UnfoldingSpec::new(vec![0], vec![1, 2, 3]),
        UnfoldingSpec::new(vec![1], vec![0, 2, 3]),
    ]
}

/// `√(hw)·min` of the spectral norms of the four F4 unfoldings.
pub fn f4_bound(k: &DenseTensor) -> Result<f64> {
    f4_bound_with(k, DEFAULT_MATRIX_ITERS, DEFAULT_MATRIX_TOL, 0)
}

pub fn f4_bound_with(k: &DenseTensor, iters: usize, tol: f64, seed: u64) -> Result<f64> {
    require_4d(k)?;
    let mut best = f64::INFINITY;
    for spec in f4_unfoldings() {
        let m = unfold(k, &spec)?;
        best = best.min(matrix_spectral_norm(&m, iters, tol, seed));
    }
    let (h, w) = (k.shape()[2], k.shape()[3]);
    Ok(((h * w) as f64).sqrt() * best)
}

/// Regroups a stride-`s` kernel into the stride-1 kernel `Q` of shape
/// `(c_out, c_in·s², ⌈h/s⌉, ⌈w/s⌉)` with
/// `K[c, d, a, b] = Q[c, d·s² + s·(a mod s) + (b mod s), ⌊a/s⌋, ⌊b/s⌋]`.
/// Spatial axes are zero-padded up to multiples of `s` first.
pub fn strided_kernel_transform(k: &DenseTensor, s: usize) -> Result<DenseTensor> {
    require_4d(k)?;
    if s == 0 {
        return Err(Error::InvalidConfig("stride must be positive".into()));
    }
    if s == 1 {
        return Ok(k.clone());
    }
    let (c_out, c_in, h, w) = (k.shape()[0], k.shape()[1], k.shape()[2], k.shape()[3]);
    let (hq, wq) = (h.div_ceil(s), w.div_ceil(s));
    let mut q = DenseTensor::zeros(&[c_out, c_in * s * s, hq, wq]);
    for c in 0..c_out {
        for d in 0..c_in {
            for a in 0..h {
                for b in 0..w {
                    let ch = d * s * s + s * (a % s) + b % s;
                    q.set(&[c, ch, a / s, b / s], k.get(&[c, d, a, b]));
                }
            }
        }
    }
    Ok(q)
}

/// `‖Q‖_σ ≤ ‖T_s‖₂ ≤ √(⌈h/s⌉⌈w/s⌉)·‖Q‖_σ`.
pub fn tn_bound_strided(k: &DenseTensor, s: usize, config: &HopmConfig) -> Result<TnBound> {
    let q = strided_kernel_transform(k, s)?;
    scaled_bound(&q, config)
}

/// `‖K‖_σ ≤ ‖T‖₂ ≤ √(k_1⋯k_d)·‖K‖_σ` for a `(c_out, c_in, k_1, …, k_d)` kernel.
pub fn tn_bound_ddim(k: &DenseTensor, config: &HopmConfig) -> Result<TnBound> {
    if k.ndim() < 3 {
        return Err(Error::ShapeMismatch(format!(
            "expected (c_out, c_in, k_1, …) with at least one spatial axis, got {:?}",
            k.shape()
        )));
    }
    scaled_bound(k, config)
}

/// Reference-norm request attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub settings: PowerSettings,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub tn_ms: f64,
    pub f4_ms: f64,
    pub oracle_ms: Option<f64>,
}

/// Bound values for one kernel under one configuration. Ratios are derived
/// on demand rather than stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kernel_shape: Vec<usize>,
    pub config: ConvConfig,
    pub lower_sigma: f64,
    pub tn_upper: f64,
    /// `None` for kernels without exactly two spatial axes.
    pub f4_upper: Option<f64>,
    pub oracle_norm: Option<f64>,
    pub oracle_iterations: Option<usize>,
    pub hopm: SigmaEstimate,
    pub timings: Timings,
}

impl BoundReport {
    pub fn ratio_tn(&self) -> Option<f64> {
        self.oracle_norm.map(|o| self.tn_upper / o)
    }

    pub fn ratio_f4(&self) -> Option<f64> {
        match (self.f4_upper, self.oracle_norm) {
            (Some(f), Some(o)) => Some(f / o),
            _ => None,
        }
    }
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Lower σ, TN and F4 for `k` under `config`, plus the power-method
/// reference norm when `oracle` is given.
///
/// For stride `s > 1` both TN and F4 are evaluated on the regrouped kernel
/// `Q`, so they bound the strided Jacobian.
pub fn bound_report(
    k: &DenseTensor,
    config: &ConvConfig,
    hopm_config: &HopmConfig,
    oracle: Option<&OracleRequest>,
) -> Result<BoundReport> {
    config.validate(k.shape())?;
    if config.stride > 1 && k.ndim() != 4 {
        return Err(Error::Unsupported(
            "strided bounds need a (c_out, c_in, h, w) kernel".into(),
        ));
    }
    let effective = strided_kernel_transform_any(k, config.stride)?;

    let start = Instant::now();
    let tn = scaled_bound(&effective, hopm_config)?;
    let tn_ms = millis(start);

    let start = Instant::now();
    let f4_upper = if effective.ndim() == 4 {
        Some(f4_bound(&effective)?)
    } else {
        None
    };
    let f4_ms = millis(start);

    let mut oracle_norm = None;
    let mut oracle_iterations = None;
    let mut oracle_ms = None;
    if let Some(req) = oracle {
        let start = Instant::now();
        let op = conv_operator(k, config)?;
        let est = power_method_norm(&op, &req.settings);
        oracle_ms = Some(millis(start));
        oracle_norm = Some(est.norm);
        oracle_iterations = Some(est.iterations);
    }

    Ok(BoundReport {
        kernel_shape: k.shape().to_vec(),
        config: config.clone(),
        lower_sigma: tn.lower,
        tn_upper: tn.upper,
        f4_upper,
        oracle_norm,
        oracle_iterations,
        hopm: tn.estimate,
        timings: Timings {
            tn_ms,
            f4_ms,
            oracle_ms,
        },
    })
}

fn strided_kernel_transform_any(k: &DenseTensor, s: usize) -> Result<DenseTensor> {
    if s == 1 {
        Ok(k.clone())
    } else {
        strided_kernel_transform(k, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopm::tn_bound;
    use crate::kernels::{gap_kernel, gaussian};

    #[test]
    fn default_offsets_are_size_preserving() {
        assert_eq!(default_offsets(&[1, 1, 3, 2]), vec![(1, 1), (1, 0)]);
        assert_eq!(default_offsets(&[1, 1, 1]), vec![(0, 0)]);
    }

    #[test]
    fn config_validation() {
        let shape = [2, 2, 3, 3];
        assert!(ConvConfig::same(&shape, Padding::Zero, 1, 8)
            .validate(&shape)
            .is_ok());
        assert!(ConvConfig::same(&shape, Padding::Zero, 3, 8)
            .validate(&shape)
            .is_err());
        assert!(ConvConfig::same(&shape, Padding::Circular, 1, 2)
            .validate(&shape)
            .is_err());
        let mut c = ConvConfig::same(&shape, Padding::Zero, 1, 8);
        c.offsets[0] = (2, 1);
        assert!(matches!(c.validate(&shape), Err(Error::InvalidConfig(_))));
        assert!(ConvConfig::same(&shape, Padding::Zero, 1, 8)
            .validate(&[2, 2, 3])
            .is_err());
    }

    #[test]
    fn padding_parses() {
        assert_eq!("zero".parse::<Padding>().unwrap(), Padding::Zero);
        assert_eq!("circular".parse::<Padding>().unwrap(), Padding::Circular);
        assert!("reflect".parse::<Padding>().is_err());
    }

    #[test]
    fn f4_on_one_by_one_is_matrix_norm() {
        let k = gaussian(&[3, 4, 1, 1], 2);
        let m = crate::matrix::RealMatrix::from_vec(3, 4, k.data().to_vec()).unwrap();
        let expect = matrix_spectral_norm(&m, 2000, 1e-15, 0);
        assert!((f4_bound_with(&k, 2000, 1e-15, 0).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn f4_of_gap_kernel_is_eight() {
        assert!((f4_bound(&gap_kernel()).unwrap() - 8.0).abs() < 1e-10);
    }

    #[test]
    fn stride_one_transform_is_identity() {
        let k = gaussian(&[2, 3, 3, 3], 1);
        assert_eq!(strided_kernel_transform(&k, 1).unwrap(), k);
    }

    #[test]
    fn stride_two_on_two_by_two() {
        let k = DenseTensor::new(vec![1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let q = strided_kernel_transform(&k, 2).unwrap();
        assert_eq!(q.shape(), &[1, 4, 1, 1]);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(q.get(&[0, 2 * (a % 2) + b % 2, 0, 0]), k.get(&[0, 0, a, b]));
            }
        }
    }

    #[test]
    fn transform_pads_to_multiples_of_stride() {
        let k = gaussian(&[2, 3, 5, 3], 4);
        for s in [2, 3, 4] {
            let q = strided_kernel_transform(&k, s).unwrap();
            assert_eq!(
                q.shape(),
                &[2, 3 * s * s, 5usize.div_ceil(s), 3usize.div_ceil(s)]
            );
            assert!((q.frobenius() - k.frobenius()).abs() < 1e-12);
        }
    }

    #[test]
    fn strided_bound_with_unit_stride_is_tn_bound() {
        let k = gaussian(&[2, 2, 3, 3], 3);
        let cfg = HopmConfig::default();
        assert_eq!(
            tn_bound_strided(&k, 1, &cfg).unwrap(),
            tn_bound(&k, &cfg).unwrap()
        );
        assert_eq!(
            tn_bound_ddim(&k, &cfg).unwrap(),
            tn_bound(&k, &cfg).unwrap()
        );
    }

    #[test]
    fn report_rejects_strided_non_4d() {
        let k = gaussian(&[2, 2, 3], 1);
        let cfg = ConvConfig::same(k.shape(), Padding::Zero, 2, 8);
        assert!(bound_report(&k, &cfg, &HopmConfig::default(), None).is_err());
        let cfg = ConvConfig::same(k.shape(), Padding::Zero, 1, 8);
        let r = bound_report(&k, &cfg, &HopmConfig::default(), None).unwrap();
        assert!(r.f4_upper.is_none());
        assert!((r.tn_upper - 3f64.sqrt() * r.lower_sigma).abs() < 1e-12);
    }
}
