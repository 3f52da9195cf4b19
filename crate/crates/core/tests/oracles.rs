mod common;

use common::{dense_norm, has_full_window, sandwich_suite, tight_hopm};
use convnorm::bounds::default_offsets;
use convnorm::kernels::{delta, gap_kernel, gaussian, gaussian_indexed};
use convnorm::oracle::{density_grid_max, exact_spectral_norm};
use convnorm::*;

#[test]
fn power_method_agrees_with_dense() {
    let k = gaussian(&[2, 2, 3, 3], 5);
    for padding in [Padding::Zero, Padding::Circular] {
        let cfg = ConvConfig::same(k.shape(), padding, 1, 8);
        let op = conv_operator(&k, &cfg).unwrap();
        let est = power_method_norm(
            &op,
            &PowerSettings {
                iters: 20_000,
                tol: 1e-15,
                seed: 1,
            },
        );
        let dense = dense_norm(&k, &cfg);
        assert!(
            (est.norm - dense).abs() <= 1e-8 * dense,
            "{padding}: {} vs {dense}",
            est.norm
        );
        assert!(est.norm <= dense * (1.0 + 1e-12));
    }
}

#[test]
fn delta_kernel_has_unit_norm_everywhere() {
    let k = delta(&[1, 1, 3, 3]);
    for padding in [Padding::Zero, Padding::Circular] {
        let cfg = ConvConfig::same(k.shape(), padding, 1, 6);
        assert!((dense_norm(&k, &cfg) - 1.0).abs() < 1e-12);
        let est = power_method_norm(&conv_operator(&k, &cfg).unwrap(), &PowerSettings::default());
        assert!((est.norm - 1.0).abs() < 1e-12);
    }
    let c = circular_exact_norm(&k, 6, &default_offsets(k.shape())).unwrap();
    assert!((c - 1.0).abs() < 1e-12);
}

#[test]
fn gap_kernel_report() {
    let k = gap_kernel();
    let cfg = ConvConfig::same(k.shape(), Padding::Circular, 1, 4);
    let req = OracleRequest {
        settings: PowerSettings::default(),
    };
    let r = bound_report(&k, &cfg, &HopmConfig::default(), Some(&req)).unwrap();
    assert!((r.lower_sigma - 4.0).abs() < 1e-8);
    assert!((r.tn_upper - 8.0).abs() < 1e-7);
    assert!((r.f4_upper.unwrap() - 8.0).abs() < 1e-7);
    assert!((r.oracle_norm.unwrap() - 8.0).abs() < 1e-6);
    assert!((dense_norm(&k, &cfg) - 8.0).abs() < 1e-10);
}

#[test]
fn one_by_one_bounds_coincide() {
    let k = gaussian(&[5, 3, 1, 1], 2);
    let cfg = ConvConfig::same(k.shape(), Padding::Zero, 1, 4);
    let r = bound_report(&k, &cfg, &tight_hopm(), None).unwrap();
    let exact = dense_norm(&k, &cfg);
    assert!((r.lower_sigma - exact).abs() <= 1e-9 * exact);
    assert!((r.tn_upper - exact).abs() <= 1e-9 * exact);
    assert!((r.f4_upper.unwrap() - exact).abs() <= 1e-9 * exact);
}

#[test]
fn small_sandwich_suite() {
    for (i, case) in sandwich_suite(60, 99).iter().enumerate() {
        let r = bound_report(&case.kernel, &case.config, &tight_hopm(), None).unwrap();
        let oracle = dense_norm(&case.kernel, &case.config);
        assert!(r.lower_sigma <= oracle + 1e-8, "case {i}");
        assert!(oracle <= r.tn_upper * (1.0 + 1e-6), "case {i}");
    }
}

#[test]
fn lower_bound_can_fail_without_a_full_window() {
    // n = 1 with zero padding keeps only the center tap
    let k = DenseTensor::from_fn(&[1, 1, 3, 3], |i| {
        if i[2] == 1 && i[3] == 1 {
            0.1
        } else {
            1.0
        }
    });
    assert!(!has_full_window(k.shape(), 1, 1));
    let cfg = ConvConfig::same(k.shape(), Padding::Zero, 1, 1);
    let sigma = hopm(&k, &tight_hopm()).unwrap().sigma;
    assert!(dense_norm(&k, &cfg) < sigma);
}

#[test]
fn stride_bound_sandwich() {
    for (i, (shape, s, n)) in [
        (vec![3, 2, 3, 3], 2, 8),
        (vec![2, 2, 5, 5], 2, 10),
        (vec![2, 3, 3, 3], 4, 8),
        (vec![2, 2, 5, 4], 4, 12),
        (vec![1, 2, 2, 2], 2, 6),
    ]
    .into_iter()
    .enumerate()
    {
        let k = gaussian_indexed(&shape, 4, i as u64);
        let b = tn_bound_strided(&k, s, &tight_hopm()).unwrap();
        for padding in [Padding::Zero, Padding::Circular] {
            let cfg = ConvConfig::same(&shape, padding, s, n);
            let oracle = dense_norm(&k, &cfg);
            assert!(b.lower <= oracle + 1e-8, "{shape:?} s={s} {padding}");
            assert!(
                oracle <= b.upper * (1.0 + 1e-6),
                "{shape:?} s={s} {padding}"
            );
        }
    }
}

#[test]
fn ddim_bound_matches_2d_bound() {
    let k = gaussian(&[3, 2, 3, 2], 8);
    let a = tn_bound(&k, &tight_hopm()).unwrap();
    let b = tn_bound_ddim(&k, &tight_hopm()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn density_sup_bounds_zero_padding_norm() {
    // the grid maximum approaches the supremum from below; a fine grid and
    // a small relative slack cover the gap for 3×3 kernels
    for i in 0..5u64 {
        let k = gaussian_indexed(&[2, 3, 3, 3], 6, i);
        let offs = default_offsets(k.shape());
        let sup = density_grid_max(&k, &offs, 128).unwrap();
        let cfg = ConvConfig::same(k.shape(), Padding::Zero, 1, 7);
        assert!(dense_norm(&k, &cfg) <= sup * (1.0 + 1e-3));
    }
}

#[test]
fn density_is_hermitian_symmetric_in_frequency() {
    // K real, so F(−τ) = conj(F(τ))
    let k = gaussian(&[2, 3, 3, 2], 1);
    let offs = default_offsets(k.shape());
    let f = spectral_density(&k, &[0.4, -1.1], &offs).unwrap();
    let g = spectral_density(&k, &[-0.4, 1.1], &offs).unwrap();
    for (a, b) in f.data().iter().zip(g.data()) {
        assert!((a - b.conj()).norm() < 1e-13);
    }
    assert!((exact_spectral_norm(&f) - exact_spectral_norm(&g)).abs() < 1e-12);
}

#[test]
fn dense_cap_is_enforced() {
    let k = gaussian(&[64, 64, 3, 3], 0);
    let cfg = ConvConfig::same(k.shape(), Padding::Zero, 1, 32);
    assert!(matches!(
        build_dense_jacobian(&k, &cfg),
        Err(Error::SizeCap { .. })
    ));
}
