//! Orthogonality and spectral-norm regularizers with their gradients.
//!
//! `OCNN = ‖K'' − E‖_F`, `2norm = ‖K'' − E‖_σ` and `Ratio = √(hw)‖K‖_σ/‖K‖_F`,
//! where `K''` is the self-gram kernel generating `TᵀT` for circular padding
//! and `E` is the delta kernel at its spatial center. All values are free of
//! any weighting factor; callers multiply by their own β.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{ConvConfig, Padding};
use crate::error::{Error, Result};
use crate::hopm::{
    hopm, sigma_gradient, spatial_volume, tn_gradient, HopmConfig, Rank1Factors, SigmaEstimate,
};
use crate::tensor::DenseTensor;

fn check_4d(k: &DenseTensor) -> Result<(usize, usize, usize, usize)> {
    match *k.shape() {
        [a, b, h, w] => Ok((a, b, h, w)),
        _ => Err(Error::ShapeMismatch(format!(
            "expected a (c_out, c_in, h, w) kernel, got shape {:?}",
            k.shape()
        ))),
    }
}

/// `K''` of shape `(c_in, c_in, 2h−1, 2w−1)` with center `(h−1, w−1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfGramKernel {
    pub kernel: DenseTensor,
    pub center: (usize, usize),
}

impl SelfGramKernel {
    /// `K'' − E`.
    pub fn minus_identity(&self) -> DenseTensor {
        let mut r = self.kernel.clone();
        let c = r.shape()[0];
        let (ch, cw) = self.center;
        for a in 0..c {
            let v = r.get(&[a, a, ch, cw]);
            r.set(&[a, a, ch, cw], v - 1.0);
        }
        r
    }

    /// Circular stride-1 configuration on `n × n` inputs under which the
    /// convolution with `K''` equals `TᵀT`.
    pub fn circular_config(&self, n: usize) -> ConvConfig {
        let (ch, cw) = self.center;
        ConvConfig {
            padding: Padding::Circular,
            offsets: vec![(ch, ch), (cw, cw)],
            stride: 1,
            input_size: n,
        }
    }
}

/// Full cross-correlation of `K` with itself over the output-channel axis.
pub fn self_gram_kernel(k: &DenseTensor) -> Result<SelfGramKernel> {
    let (c_out, c_in, h, w) = check_4d(k)?;
    let (gh, gw) = (2 * h - 1, 2 * w - 1);
    let mut g = DenseTensor::zeros(&[c_in, c_in, gh, gw]);
    for a in 0..c_in {
        for b in 0..c_in {
            for u in 0..gh {
                for v in 0..gw {
                    let mut acc = 0.0;
                    for c in 0..c_out {
                        for p in 0..h {
                            let Some(p2) = (p + u).checked_sub(h - 1).filter(|&x| x < h) else {
                                continue;
                            };
                            for q in 0..w {
                                let Some(q2) = (q + v).checked_sub(w - 1).filter(|&x| x < w) else {
                                    continue;
                                };
                                acc += k.get(&[c, a, p, q]) * k.get(&[c, b, p2, q2]);
                            }
                        }
                    }
                    g.set(&[a, b, u, v], acc);
                }
            }
        }
    }
    Ok(SelfGramKernel {
        kernel: g,
        center: (h - 1, w - 1),
    })
}

/// Adjoint of the derivative of `K ↦ K''` at `K`, applied to `G`:
/// returns `∇_K ⟨G, K''⟩`.
fn self_gram_pullback(k: &DenseTensor, g: &DenseTensor) -> Result<DenseTensor> {
    let (c_out, c_in, h, w) = check_4d(k)?;
    let (gh, gw) = (2 * h - 1, 2 * w - 1);
    if g.shape() != [c_in, c_in, gh, gw] {
        return Err(Error::ShapeMismatch(format!(
            "self-gram cotangent has shape {:?}, expected {:?}",
            g.shape(),
            [c_in, c_in, gh, gw]
        )));
    }
    let (hi, wi) = (h as isize, w as isize);
    let mut out = DenseTensor::zeros(k.shape());
    for c in 0..c_out {
        for x in 0..c_in {
            for p in 0..hi {
                for q in 0..wi {
                    let mut acc = 0.0;
                    for b in 0..c_in {
                        for u in 0..gh as isize {
                            let du = u - (hi - 1);
                            for v in 0..gw as isize {
                                let dv = v - (wi - 1);
                                let (u_, v_) = (u as usize, v as usize);
                                // K[c,x,·] as the first factor of K''[x,b,u,v]
                                let (p1, q1) = (p + du, q + dv);
                                if (0..hi).contains(&p1) && (0..wi).contains(&q1) {
                                    acc += g.get(&[x, b, u_, v_])
                                        * k.get(&[c, b, p1 as usize, q1 as usize]);
                                }
                                // and as the second factor of K''[b,x,u,v]
                                let (p2, q2) = (p - du, q - dv);
                                if (0..hi).contains(&p2) && (0..wi).contains(&q2) {
                                    acc += g.get(&[b, x, u_, v_])
                                        * k.get(&[c, b, p2 as usize, q2 as usize]);
                                }
                            }
                        }
                    }
                    out.set(&[c, x, p as usize, q as usize], acc);
                }
            }
        }
    }
    Ok(out)
}

/// `‖K'' − E‖_F`.
pub fn ocnn_loss(k: &DenseTensor) -> Result<f64> {
    Ok(self_gram_kernel(k)?.minus_identity().frobenius())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoNormLoss {
    /// `‖K'' − E‖_σ` estimate; a lower bound on `‖TᵀT − I‖₂`.
    pub sigma: f64,
    /// `√((2h−1)(2w−1))·sigma`, an upper bound on `‖TᵀT − I‖₂`.
    pub certified: f64,
    pub estimate: SigmaEstimate,
}

pub fn twonorm_loss(k: &DenseTensor, config: &HopmConfig) -> Result<TwoNormLoss> {
    let r = self_gram_kernel(k)?.minus_identity();
    let estimate = hopm(&r, config)?;
    let sigma = estimate.sigma;
    Ok(TwoNormLoss {
        sigma,
        certified: (spatial_volume(r.shape()) as f64).sqrt() * sigma,
        estimate,
    })
}

/// `√(hw)·‖K‖_σ / ‖K‖_F`, never above `√(hw)`.
pub fn ratio_loss(k: &DenseTensor, config: &HopmConfig) -> Result<f64> {
    check_4d(k)?;
    let f = k.frobenius();
    if f == 0.0 {
        return Err(Error::Undefined("ratio undefined for a zero kernel"));
    }
    let sigma = hopm(k, config)?.sigma;
    Ok((spatial_volume(k.shape()) as f64).sqrt() * sigma / f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    /// The TN bound `√(hw)‖K‖_σ`.
    Tn,
    Ocnn,
    Ratio,
    #[serde(rename = "2norm")]
    TwoNorm,
}

impl Regularizer {
    pub const ALL: [Regularizer; 4] = [Self::Tn, Self::Ocnn, Self::Ratio, Self::TwoNorm];
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tn => "tn",
            Self::Ocnn => "ocnn",
            Self::Ratio => "ratio",
            Self::TwoNorm => "2norm",
        })
    }
}

impl FromStr for Regularizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tn" => Ok(Self::Tn),
            "ocnn" => Ok(Self::Ocnn),
            "ratio" => Ok(Self::Ratio),
            "2norm" | "twonorm" => Ok(Self::TwoNorm),
            _ => Err(Error::InvalidConfig(format!(
                "unknown regularizer {s:?} (expected tn, ocnn, ratio or 2norm)"
            ))),
        }
    }
}

/// Loss value, gradient, and the rank-1 factors the gradient was taken at
/// (of `K` for tn and ratio, of `K'' − E` for 2norm, none for ocnn).
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerEval {
    pub value: f64,
    pub gradient: DenseTensor,
    pub factors: Option<Rank1Factors>,
}

/// Loss value only. σ-based losses run HOPM under `config`.
pub fn regularizer_value(which: Regularizer, k: &DenseTensor, config: &HopmConfig) -> Result<f64> {
    check_4d(k)?;
    match which {
        Regularizer::Tn => Ok((spatial_volume(k.shape()) as f64).sqrt() * hopm(k, config)?.sigma),
        Regularizer::Ocnn => ocnn_loss(k),
        Regularizer::Ratio => ratio_loss(k, config),
        Regularizer::TwoNorm => Ok(twonorm_loss(k, config)?.sigma),
    }
}

pub fn regularizer_gradient(
    which: Regularizer,
    k: &DenseTensor,
    config: &HopmConfig,
) -> Result<DenseTensor> {
    Ok(evaluate(which, k, config)?.gradient)
}

pub fn evaluate(
    which: Regularizer,
    k: &DenseTensor,
    config: &HopmConfig,
) -> Result<RegularizerEval> {
    check_4d(k)?;
    let root_hw = (spatial_volume(k.shape()) as f64).sqrt();
    match which {
        Regularizer::Tn => {
            let est = hopm(k, config)?;
            let gradient = tn_gradient(k, &est.factors)?;
            Ok(RegularizerEval {
                value: root_hw * est.sigma,
                gradient,
                factors: Some(est.factors),
            })
        }
        Regularizer::Ocnn => {
            let r = self_gram_kernel(k)?.minus_identity();
            let value = r.frobenius();
            let gradient = if value == 0.0 {
                DenseTensor::zeros(k.shape())
            } else {
                self_gram_pullback(k, &r.scaled(1.0 / value))?
            };
            Ok(RegularizerEval {
                value,
                gradient,
                factors: None,
            })
        }
        Regularizer::Ratio => {
            let f = k.frobenius();
            if f == 0.0 {
                return Err(Error::Undefined("ratio undefined for a zero kernel"));
            }
            let est = hopm(k, config)?;
            let tn = root_hw * est.sigma;
            let gradient = tn_gradient(k, &est.factors)?
                .scaled(1.0 / f)
                .add_scaled(k, -tn / (f * f * f))?;
            Ok(RegularizerEval {
                value: tn / f,
                gradient,
                factors: Some(est.factors),
            })
        }
        Regularizer::TwoNorm => {
            let r = self_gram_kernel(k)?.minus_identity();
            let est = hopm(&r, config)?;
            let d = sigma_gradient(&r, &est.factors)?;
            Ok(RegularizerEval {
                value: est.sigma,
                gradient: self_gram_pullback(k, &d)?,
                factors: Some(est.factors),
            })
        }
    }
}
