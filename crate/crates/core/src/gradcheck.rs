//! Central finite-difference checks of the regularizer gradients.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hopm::HopmConfig;
use crate::regularizers::{evaluate, regularizer_value, Regularizer};
use crate::tensor::DenseTensor;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

/// Entries whose analytic and numeric magnitudes are both below this are
/// skipped by the relative-error maximum.
pub const RELATIVE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub which: Regularizer,
    pub step: f64,
    pub value: f64,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub gradient_norm: f64,
    /// `⟨∇L, K⟩`; zero for degree-0 homogeneous losses such as ratio.
    pub inner_with_kernel: f64,
    pub passed: bool,
}

/// Tighter HOPM settings so σ is converged well past the finite-difference
/// resolution.
fn refined(config: &HopmConfig) -> HopmConfig {
    HopmConfig {
        n_iters: config.n_iters.max(20_000),
        tol: config.tol.min(1e-15),
        ..config.clone()
    }
}

pub fn gradcheck(
    which: Regularizer,
    k: &DenseTensor,
    config: &HopmConfig,
    step: f64,
    tolerance: f64,
) -> Result<GradcheckReport> {
    let base_cfg = refined(config);
    let eval = evaluate(which, k, &base_cfg)?;
    // perturbed σ values start from the base maximizer
    let probe_cfg = HopmConfig {
        restarts: 1,
        warm_start: eval.factors.clone(),
        ..base_cfg
    };
    let mut max_rel: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for i in 0..k.len() {
        let mut plus = k.data().to_vec();
        let mut minus = plus.clone();
        plus[i] += step;
        minus[i] -= step;
        let plus = DenseTensor::new(k.shape().to_vec(), plus)?;
        let minus = DenseTensor::new(k.shape().to_vec(), minus)?;
        let numeric = (regularizer_value(which, &plus, &probe_cfg)?
            - regularizer_value(which, &minus, &probe_cfg)?)
            / (2.0 * step);
        let analytic = eval.gradient.data()[i];
        let err = (numeric - analytic).abs();
        max_abs = max_abs.max(err);
        let scale = numeric.abs().max(analytic.abs());
        if scale > RELATIVE_FLOOR {
            max_rel = max_rel.max(err / scale);
        }
    }
    Ok(GradcheckReport {
        which,
        step,
        value: eval.value,
        max_rel_error: max_rel,
        max_abs_error: max_abs,
        gradient_norm: eval.gradient.frobenius(),
        inner_with_kernel: eval.gradient.frobenius_inner(k)?,
        passed: max_rel <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{delta, gaussian};

    #[test]
    fn all_regularizers_pass_on_a_random_kernel() {
        let k = gaussian(&[2, 2, 3, 3], 21);
        for which in Regularizer::ALL {
            let r = gradcheck(
                which,
                &k,
                &HopmConfig::default(),
                DEFAULT_STEP,
                DEFAULT_TOLERANCE,
            )
            .unwrap();
            assert!(r.passed, "{which}: {}", r.max_rel_error);
        }
    }

    #[test]
    fn ocnn_at_delta() {
        let r = gradcheck(
            Regularizer::Ocnn,
            &delta(&[2, 2, 3, 3]),
            &HopmConfig::default(),
            DEFAULT_STEP,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert!(r.gradient_norm <= 1e-10);
        assert_eq!(r.value, 0.0);
    }
}
