//! Complex higher-order power method (HOPM) for the tensor spectral norm
//! `‖K‖_σ = sup |⟦K; u_1, …, u_d⟧|` over complex unit vectors, the TN bound
//! `√(hw)·‖K‖_σ`, and its gradient.
//!
//! Every tuple of unit vectors is feasible, so whatever HOPM returns is a
//! valid lower bound on `‖K‖_σ` whether or not it converged. Restarts push
//! it toward the global maximum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{sign_tensor_imag, sign_tensor_real};
use crate::seed::stream_rng;
use crate::tensor::{multilinear_form, partial_contraction, ComplexVector, DenseTensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopmConfig {
    /// Hard cap on full sweeps per restart.
    pub n_iters: usize,
    /// Relative change of the objective between sweeps that counts as converged.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Used as the starting point of restart 0 only.
    pub warm_start: Option<Rank1Factors>,
    /// Restrict the search to real unit vectors. Only useful to exhibit the
    /// gap between real and complex spectral norms; never a valid TN bound.
    pub real_restricted: bool,
}

impl Default for HopmConfig {
    fn default() -> Self {
        Self {
            n_iters: 100,
            tol: 1e-10,
            restarts: 10,
            seed: 0,
            warm_start: None,
            real_restricted: false,
        }
    }
}

impl HopmConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iters == 0 {
            return Err(Error::InvalidConfig("n_iters must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tol must be >= 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Unit factors `u_1, …, u_d` and `σ = |⟦K; u_1, …, u_d⟧|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank1Factors {
    pub sigma: f64,
    pub factors: Vec<ComplexVector>,
}

impl Rank1Factors {
    /// Normalizes `factors` and evaluates `σ` on `k`.
    pub fn new(k: &DenseTensor, factors: Vec<ComplexVector>) -> Result<Self> {
        let factors = factors
            .into_iter()
            .enumerate()
            .map(|(axis, u)| {
                u.normalized().ok_or_else(|| {
                    Error::InvalidConfig(format!("factor for axis {axis} is the zero vector"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sigma = multilinear_form(k, &factors)?.norm();
        Ok(Self { sigma, factors })
    }

    /// `⟦K; u_1, …, u_d⟧` including its phase.
    pub fn value(&self, k: &DenseTensor) -> Result<Complex64> {
        multilinear_form(k, &self.factors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub sigma: f64,
    pub factors: Rank1Factors,
    /// Sweeps run by the winning restart.
    pub iterations_used: usize,
    pub restarts_used: usize,
    /// Whether the winning restart met the tolerance before the sweep cap.
    pub converged: bool,
}

/// One full sweep: for each axis, `u_i ← conj(⟦K; …, I, …⟧) / ‖·‖`.
/// Returns `|⟦K; u⟧|` afterwards. After updating axis `i` the objective
/// equals the norm of the contraction, so it cannot decrease within a sweep.
pub fn hopm_sweep(k: &DenseTensor, us: &mut [ComplexVector]) -> Result<f64> {
    for axis in 0..k.ndim() {
        let v = partial_contraction(k, us, axis)?;
        if let Some(u) = v.conj().normalized() {
            us[axis] = u;
        }
    }
    Ok(multilinear_form(k, us)?.norm())
}

struct RestartOutcome {
    factors: Vec<ComplexVector>,
    sigma: f64,
    iterations: usize,
    converged: bool,
}

fn run_restart(k: &DenseTensor, config: &HopmConfig, restart: usize) -> Result<RestartOutcome> {
    let mut us = match (&config.warm_start, restart) {
        (Some(w), 0) => w.factors.clone(),
        _ => {
            let mut rng = stream_rng(config.seed, "hopm", restart as u64);
            k.shape()
                .iter()
                .map(|&n| ComplexVector::random_unit(n, config.real_restricted, &mut rng))
                .collect()
        }
    };
    let mut prev = multilinear_form(k, &us)?.norm();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.n_iters {
        let cur = hopm_sweep(k, &mut us)?;
        iterations += 1;
        let change = (cur - prev).abs();
        prev = cur;
        if change <= config.tol * cur {
            converged = true;
            break;
        }
    }
    Ok(RestartOutcome {
        factors: us,
        sigma: prev,
        iterations,
        converged,
    })
}

pub fn hopm(k: &DenseTensor, config: &HopmConfig) -> Result<SigmaEstimate> {
    config.validate()?;
    if k.ndim() < 2 {
        return Err(Error::ShapeMismatch(format!(
            "HOPM needs at least 2 axes, got shape {:?}",
            k.shape()
        )));
    }
    if let Some(w) = &config.warm_start {
        let lens: Vec<usize> = w.factors.iter().map(ComplexVector::len).collect();
        if lens != k.shape() {
            return Err(Error::ShapeMismatch(format!(
                "warm start factor lengths {lens:?} do not match kernel shape {:?}",
                k.shape()
            )));
        }
    }
    if k.is_zero() {
        let factors: Vec<_> = k
            .shape()
            .iter()
            .map(|&n| ComplexVector::basis(n, 0))
            .collect();
        return Ok(SigmaEstimate {
            sigma: 0.0,
            factors: Rank1Factors {
                sigma: 0.0,
                factors,
            },
            iterations_used: 0,
            restarts_used: config.restarts,
            converged: true,
        });
    }

    let outcomes = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(k, config, r))
        .collect::<Result<Vec<_>>>()?;
    // strictly larger wins; ties keep the earliest restart
    let best = outcomes
        .into_iter()
        .reduce(|best, o| if o.sigma > best.sigma { o } else { best })
        .expect("restarts >= 1");
    Ok(SigmaEstimate {
        sigma: best.sigma,
        factors: Rank1Factors {
            sigma: best.sigma,
            factors: best.factors,
        },
        iterations_used: best.iterations,
        restarts_used: config.restarts,
        converged: best.converged,
    })
}

/// `lower ≤ ‖T‖₂ ≤ upper` with `upper = √(spatial volume)·lower`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnBound {
    pub lower: f64,
    pub upper: f64,
    pub estimate: SigmaEstimate,
}

/// Product of the spatial sizes (axes 2 onward).
pub fn spatial_volume(shape: &[usize]) -> usize {
    shape.iter().skip(2).product()
}

pub(crate) fn scaled_bound(k: &DenseTensor, config: &HopmConfig) -> Result<TnBound> {
    let estimate = hopm(k, config)?;
    let lower = estimate.sigma;
    let upper = (spatial_volume(k.shape()) as f64).sqrt() * lower;
    Ok(TnBound {
        lower,
        upper,
        estimate,
    })
}

/// TN bound for a `(c_out, c_in, h, w)` kernel.
pub fn tn_bound(k: &DenseTensor, config: &HopmConfig) -> Result<TnBound> {
    if k.ndim() != 4 {
        return Err(Error::ShapeMismatch(format!(
            "expected a (c_out, c_in, h, w) kernel, got shape {:?}",
            k.shape()
        )));
    }
    scaled_bound(k, config)
}

/// Real tensor `M_c = ⟦K; [a_1 b_1], …, [a_d b_d]⟧` on the `2^d` cube, with
/// `c_j = 0` selecting `a_j = Re u_j` and `c_j = 1` selecting `b_j = Im u_j`.
fn contract_with_pairs(k: &DenseTensor, pairs: &[[Vec<f64>; 2]]) -> DenseTensor {
    let shape = k.shape();
    let d = shape.len();
    let mut buf = k.data().to_vec();
    let mut tail = 1usize;
    for axis in (0..d).rev() {
        let n = shape[axis];
        let outer = buf.len() / (n * tail);
        let mut next = vec![0.0; outer * 2 * tail];
        for o in 0..outer {
            for c in 0..2 {
                let x = &pairs[axis][c];
                let dst = &mut next[(o * 2 + c) * tail..(o * 2 + c + 1) * tail];
                for (i, &xi) in x.iter().enumerate() {
                    let src = &buf[(o * n + i) * tail..(o * n + i + 1) * tail];
                    for (dv, &sv) in dst.iter_mut().zip(src) {
                        *dv += xi * sv;
                    }
                }
            }
        }
        buf = next;
        tail *= 2;
    }
    DenseTensor::new(vec![2; d], buf).expect("2^d entries")
}

/// `⟦W; [a_1 b_1]ᵀ, …, [a_d b_d]ᵀ⟧`: expands a `2^d` tensor back to `shape`.
fn expand_with_pairs(w: &DenseTensor, pairs: &[[Vec<f64>; 2]], shape: &[usize]) -> DenseTensor {
    let d = shape.len();
    let mut buf = w.data().to_vec();
    let mut head = 1usize;
    for axis in 0..d {
        let n = shape[axis];
        let tail = buf.len() / (head * 2);
        let mut next = vec![0.0; head * n * tail];
        for h in 0..head {
            for c in 0..2 {
                let src = &buf[(h * 2 + c) * tail..(h * 2 + c + 1) * tail];
                for (i, &xi) in pairs[axis][c].iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    let dst = &mut next[(h * n + i) * tail..(h * n + i + 1) * tail];
                    for (dv, &sv) in dst.iter_mut().zip(src) {
                        *dv += xi * sv;
                    }
                }
            }
        }
        buf = next;
        head *= n;
    }
    DenseTensor::new(shape.to_vec(), buf).expect("shape preserved")
}

fn real_imag_pairs(k: &DenseTensor, factors: &Rank1Factors) -> Result<Vec<[Vec<f64>; 2]>> {
    let lens: Vec<usize> = factors.factors.iter().map(ComplexVector::len).collect();
    if lens != k.shape() {
        return Err(Error::ShapeMismatch(format!(
            "factor lengths {lens:?} do not match kernel shape {:?}",
            k.shape()
        )));
    }
    Ok(factors.factors.iter().map(|u| [u.re(), u.im()]).collect())
}

/// `(real, im)` parts of `⟦K; u⟧` computed in real arithmetic as
/// `⟨P_part, ⟦K; [a_1 b_1], …⟧⟩_F`.
pub fn form_parts(k: &DenseTensor, factors: &Rank1Factors) -> Result<(f64, f64)> {
    let pairs = real_imag_pairs(k, factors)?;
    let m = contract_with_pairs(k, &pairs);
    let d = k.ndim();
    Ok((
        sign_tensor_real(d).frobenius_inner(&m)?,
        sign_tensor_imag(d).frobenius_inner(&m)?,
    ))
}

/// `∇_K ‖K‖_σ` at the maximizing factors (envelope theorem):
/// `(real·∇real + im·∇im)/σ` with `∇part = ⟦P_part; [a_1 b_1]ᵀ, …⟧`.
pub fn sigma_gradient(k: &DenseTensor, factors: &Rank1Factors) -> Result<DenseTensor> {
    let pairs = real_imag_pairs(k, factors)?;
    let d = k.ndim();
    let m = contract_with_pairs(k, &pairs);
    let p_re = sign_tensor_real(d);
    let p_im = sign_tensor_imag(d);
    let re = p_re.frobenius_inner(&m)?;
    let im = p_im.frobenius_inner(&m)?;
    let sigma = re.hypot(im);
    if sigma == 0.0 {
        return Err(Error::Undefined("gradient undefined at zero norm"));
    }
    let w = p_re.scaled(re / sigma).add_scaled(&p_im, im / sigma)?;
    Ok(expand_with_pairs(&w, &pairs, k.shape()))
}

/// Gradient of `√(hw)·‖K‖_σ` (or `√(k_1⋯k_d)·‖K‖_σ` for d spatial axes).
pub fn tn_gradient(k: &DenseTensor, factors: &Rank1Factors) -> Result<DenseTensor> {
    let g = sigma_gradient(k, factors)?;
    Ok(g.scaled((spatial_volume(k.shape()) as f64).sqrt()))
}
