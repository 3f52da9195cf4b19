#![allow(dead_code)]

use convnorm::bounds::default_offsets;
use convnorm::kernels::gaussian_indexed;
use convnorm::oracle::exact_spectral_norm;
use convnorm::{build_dense_jacobian, ConvConfig, DenseTensor, HopmConfig, Padding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// HOPM settings converged far past the tolerances checked in the tests.
pub fn tight_hopm() -> HopmConfig {
    HopmConfig {
        n_iters: 3000,
        tol: 1e-14,
        restarts: 10,
        ..HopmConfig::default()
    }
}

/// Exact `‖T‖₂` from the dense Jacobian.
pub fn dense_norm(k: &DenseTensor, cfg: &ConvConfig) -> f64 {
    exact_spectral_norm(&build_dense_jacobian(k, cfg).unwrap())
}

/// Some output position on each axis reads every tap without leaving the
/// input. Without one, zero padding hides part of the kernel and `‖K‖_σ`
/// need not be a lower bound.
pub fn has_full_window(kernel_shape: &[usize], n: usize, s: usize) -> bool {
    default_offsets(kernel_shape)
        .iter()
        .zip(&kernel_shape[2..])
        .all(|(&(before, _), &k)| (0..n / s).any(|o| o * s >= before && o * s - before + k <= n))
}

#[derive(Debug, Clone)]
pub struct Case {
    pub kernel: DenseTensor,
    pub config: ConvConfig,
}

/// Random 2-D cases: `c ≤ 4`, `h, w ≤ 5`, `n ≤ 12`, strides {1, 2, 4},
/// alternating paddings.
pub fn sandwich_suite(count: usize, seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strides = [1, 2, 4];
    (0..count)
        .map(|i| {
            let padding = if i % 2 == 0 {
                Padding::Zero
            } else {
                Padding::Circular
            };
            let s = strides[(i / 2) % 3];
            let shape = vec![
                rng.random_range(1..=4),
                rng.random_range(1..=4),
                rng.random_range(1..=5),
                rng.random_range(1..=5),
            ];
            let candidates: Vec<usize> = (1..=12)
                .filter(|&n| n % s == 0)
                .filter(|&n| match padding {
                    Padding::Circular => n >= shape[2].max(shape[3]),
                    Padding::Zero => has_full_window(&shape, n, s),
                })
                .collect();
            let n = candidates[rng.random_range(0..candidates.len())];
            Case {
                kernel: gaussian_indexed(&shape, seed, i as u64),
                config: ConvConfig::same(&shape, padding, s, n),
            }
        })
        .collect()
}
