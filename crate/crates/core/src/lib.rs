//! Certified bounds on the spectral norm of convolutional layers computed
//! from the kernel tensor alone.
//!
//! The central quantity is the TN bound `‖K‖_σ ≤ ‖T‖₂ ≤ √(hw)·‖K‖_σ`, where
//! `T` is the Jacobian of the convolution and `‖K‖_σ` is the (complex)
//! spectral norm of the kernel tensor, estimated by [`hopm::hopm`].

pub mod bounds;
pub mod error;
pub mod gradcheck;
pub mod hopm;
pub mod kernels;
pub mod matrix;
pub mod oracle;
pub mod regularizers;
pub mod seed;
pub mod tensor;

pub use bounds::{
    bound_report, f4_bound, strided_kernel_transform, tn_bound_ddim, tn_bound_strided, BoundReport,
    ConvConfig, OracleRequest, Padding,
};
pub use error::{Error, Result};
pub use hopm::{hopm, tn_bound, tn_gradient, HopmConfig, Rank1Factors, SigmaEstimate, TnBound};
pub use matrix::{matrix_spectral_norm, ComplexMatrix, RealMatrix};
pub use oracle::{
    build_dense_jacobian, circular_exact_norm, conv_operator, power_method_norm, spectral_density,
    LinearOperator, PowerEstimate, PowerSettings,
};
pub use regularizers::{
    ocnn_loss, ratio_loss, regularizer_gradient, self_gram_kernel, twonorm_loss, Regularizer,
    SelfGramKernel,
};
pub use tensor::{
    fold, multilinear_form, partial_contraction, unfold, ComplexVector, DenseTensor, UnfoldingSpec,
};
