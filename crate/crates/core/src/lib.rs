//! Federated training of a convolutional segmentation network at desk scale.
//!
//! The crate is organized around a small dense [`tensor::Tensor`] type. On top
//! of it sit hand-written layer kernels ([`nn`]), a U-Net assembled from them
//! ([`unet`]), parameter-set algebra and the wire codec ([`federation`]), the
//! server/client round protocol over pluggable transports ([`runtime`]),
//! synthetic multi-domain dataset generation ([`data`]), and evaluation
//! metrics ([`metrics`]).
//!
//! With the default `parallel` feature the batch-level inner loops run on
//! rayon. Parallelism never changes reduction order: work is split across
//! independent output slices and every accumulation happens in a fixed
//! sequential order inside one task, so results are bit-identical with the
//! feature on or off and for any thread count.

pub mod data;
pub mod federation;
pub mod metrics;
pub mod nn;
pub(crate) mod parallel;
pub mod runtime;
pub mod tensor;
pub mod unet;

pub use tensor::{Rng, Tensor};
