//! Kernel generators.

use rand::Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::seed::stream_rng;
use crate::tensor::DenseTensor;

/// `Re((e1 + i e2)^{⊗d})`: entry `Re(i^{Σ idx})` on the `2^d` cube.
pub fn sign_tensor_real(d: usize) -> DenseTensor {
    DenseTensor::from_fn(&vec![2; d], |idx| match idx.iter().sum::<usize>() % 4 {
        0 => 1.0,
        2 => -1.0,
        _ => 0.0,
    })
}

/// `Im((e1 + i e2)^{⊗d})`.
pub fn sign_tensor_imag(d: usize) -> DenseTensor {
    DenseTensor::from_fn(&vec![2; d], |idx| match idx.iter().sum::<usize>() % 4 {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    })
}

/// The 2×2×2×2 tensor `(e1 + i e2)^{⊗4} + (e1 − i e2)^{⊗4}`, whose real and
/// complex spectral norms differ (2 vs 4).
pub fn gap_kernel() -> DenseTensor {
    sign_tensor_real(4).scaled(2.0)
}

/// Identity in the channel axes at the spatial center tap `⌊k/2⌋` of each
/// spatial axis. Requires `shape[0] == shape[1]` for a true identity; otherwise
/// the diagonal `min(c_out, c_in)` channels are set.
pub fn delta(shape: &[usize]) -> DenseTensor {
    assert!(shape.len() >= 2, "kernel needs channel axes");
    DenseTensor::from_fn(shape, |idx| {
        let center = idx[2..].iter().zip(&shape[2..]).all(|(&i, &k)| i == k / 2);
        if center && idx[0] == idx[1] {
            1.0
        } else {
            0.0
        }
    })
}

/// N(0, 1) entries from the "kernel" stream of `seed`.
pub fn gaussian(shape: &[usize], seed: u64) -> DenseTensor {
    gaussian_indexed(shape, seed, 0)
}

/// U(−1, 1) entries from the "kernel" stream of `seed`.
pub fn uniform(shape: &[usize], seed: u64) -> DenseTensor {
    let mut rng = stream_rng(seed, "kernel", 0);
    let dist = Uniform::new(-1.0, 1.0).expect("valid range");
    DenseTensor::from_fn(shape, |_| rng.sample(dist))
}

/// Gaussian kernel from an explicit sub-stream index, used by suites that
/// draw many kernels from one seed.
pub fn gaussian_indexed(shape: &[usize], seed: u64, index: u64) -> DenseTensor {
    let mut rng = stream_rng(seed, "kernel", index);
    DenseTensor::from_fn(shape, |_| rng.sample(StandardNormal))
}
