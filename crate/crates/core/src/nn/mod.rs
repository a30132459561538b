//! Layer kernels with hand-written forward and backward passes.
//!
//! Every forward returns whatever its backward needs as an explicit cache
//! value; caches are valid only for the immediately preceding forward and are
//! consumed by value. All kernels are generic over the element type so the
//! finite-difference suite can run them at `f64`.

mod activation;
mod adam;
mod conv;
mod loss;
mod norm;
mod pool;

pub use activation::{relu_backward, relu_forward, sigmoid_backward, sigmoid_forward};
pub use adam::{AdamParams, AdamState};
pub use conv::{conv2d_backward, conv2d_forward};
pub use loss::{bce_backward, bce_loss, BCE_CLAMP};
pub use norm::{
    batchnorm_backward, batchnorm_eval, batchnorm_train, BatchNormCache, BN_EPS, BN_MOMENTUM,
};
pub use pool::{
    concat_channels, maxpool2_backward, maxpool2_forward, slice_channels, upsample2_backward,
    upsample2_forward, PoolIndices,
};

use crate::tensor::TensorError;

/// Forward-pass mode: training uses batch statistics and updates running
/// averages, evaluation uses the stored running statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("batch normalization in train mode needs a batch of at least 2, got {n}")]
    DegenerateBatch { n: usize },
    #[error("optimizer state misaligned at slot {index}: {reason}")]
    Misaligned { index: usize, reason: String },
}
