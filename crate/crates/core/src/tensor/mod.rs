//! Dense row-major tensors with 1 to 4 dimensions.
//!
//! Image batches use NCHW layout (last dimension fastest). Tensors are
//! immutable once shared; every public operation allocates its result, so
//! read-only sharing across threads needs no locking.

mod fdt1;
mod rng;

pub use fdt1::{read_tensor, write_tensor, FdtError};
pub use rng::{node_seed, sample_seed, splitmix64, Rng};

use std::fmt;

/// Element dtype tag used by the FDT1 file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn tag(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Dtype::F32),
            1 => Some(Dtype::F64),
            _ => None,
        }
    }

    pub fn size_bytes(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// Scalar element type. Training state is `f32`; the gradient-check suite
/// instantiates every kernel at `f64`.
pub trait Element:
    Copy
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
{
    const DTYPE: Dtype;
    const ZERO: Self;
    const ONE: Self;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;
    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

impl Element for f32 {
    const DTYPE: Dtype = Dtype::F32;
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn exp(self) -> Self {
        f32::exp(self)
    }
    fn ln(self) -> Self {
        f32::ln(self)
    }
    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
    fn abs(self) -> Self {
        f32::abs(self)
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]])
    }
}

impl Element for f64 {
    const DTYPE: Dtype = Dtype::F64;
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes([
            bytes[0], bytes[1], bytes[2], bytes[3], bytes[4], bytes[5], bytes[6], bytes[7],
        ])
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: String },
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

fn check_shape(shape: &[usize]) -> Result<usize, TensorError> {
    if shape.is_empty() || shape.len() > 4 {
        return Err(TensorError::InvalidShape {
            shape: shape.to_vec(),
            reason: "rank must be between 1 and 4".into(),
        });
    }
    let mut count = 1usize;
    for &d in shape {
        if d == 0 {
            return Err(TensorError::InvalidShape {
                shape: shape.to_vec(),
                reason: "zero-sized dimension".into(),
            });
        }
        count = count.checked_mul(d).ok_or_else(|| TensorError::InvalidShape {
            shape: shape.to_vec(),
            reason: "element count overflow".into(),
        })?;
    }
    Ok(count)
}

/// Dense tensor: explicit shape plus a flat row-major value buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<E: Element = f32> {
    shape: Vec<usize>,
    data: Vec<E>,
}

impl<E: Element> Tensor<E> {
    pub fn zeros(shape: &[usize]) -> Result<Self, TensorError> {
        Self::full(shape, E::ZERO)
    }

    pub fn full(shape: &[usize], value: E) -> Result<Self, TensorError> {
        let count = check_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![value; count],
        })
    }

    pub fn from_vec(shape: &[usize], data: Vec<E>) -> Result<Self, TensorError> {
        let count = check_shape(shape)?;
        if data.len() != count {
            return Err(TensorError::InvalidShape {
                shape: shape.to_vec(),
                reason: format!("data length {} != element count {count}", data.len()),
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [E] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<E> {
        self.data
    }

    /// Same data, new shape. Element counts must match.
    pub fn reshape(&self, shape: &[usize]) -> Result<Self, TensorError> {
        let count = check_shape(shape)?;
        if count != self.data.len() {
            return Err(TensorError::ShapeMismatch {
                op: "reshape",
                left: self.shape.clone(),
                right: shape.to_vec(),
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: self.data.clone(),
        })
    }

    /// Value at a multi-dimensional index. Panics on rank or bounds violation;
    /// intended for tests and small-scale inspection.
    pub fn at(&self, index: &[usize]) -> E {
        assert_eq!(index.len(), self.shape.len(), "index rank mismatch");
        let mut flat = 0usize;
        for (i, (&ix, &dim)) in index.iter().zip(&self.shape).enumerate() {
            assert!(ix < dim, "index {ix} out of bounds for dim {i} (size {dim})");
            flat = flat * dim + ix;
        }
        self.data[flat]
    }

    fn binary_op(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(E, E) -> E,
    ) -> Result<Self, TensorError> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch {
                op,
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.binary_op(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.binary_op(other, "sub", |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, TensorError> {
        self.binary_op(other, "mul", |a, b| a * b)
    }

    pub fn scale(&self, factor: E) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&a| a * factor).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(E) -> E) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Stack equally shaped tensors along a new leading dimension.
    pub fn stack(parts: &[&Self]) -> Result<Self, TensorError> {
        let first = parts.first().ok_or_else(|| TensorError::InvalidShape {
            shape: vec![],
            reason: "stack of zero tensors".into(),
        })?;
        if first.shape.len() >= 4 {
            return Err(TensorError::InvalidShape {
                shape: first.shape.clone(),
                reason: "stack result would exceed 4 dimensions".into(),
            });
        }
        let mut data = Vec::with_capacity(first.len() * parts.len());
        for part in parts {
            if part.shape != first.shape {
                return Err(TensorError::ShapeMismatch {
                    op: "stack",
                    left: first.shape.clone(),
                    right: part.shape.clone(),
                });
            }
            data.extend_from_slice(&part.data);
        }
        let mut shape = vec![parts.len()];
        shape.extend_from_slice(&first.shape);
        Self::from_vec(&shape, data)
    }

    /// Tensor of i.i.d. Normal(mean, std) draws, consumed from `rng` in
    /// row-major order.
    pub fn normal(rng: &mut Rng, shape: &[usize], mean: f64, std: f64) -> Result<Self, TensorError> {
        if !(std >= 0.0) {
            return Err(TensorError::InvalidParameter {
                name: "std",
                reason: format!("must be >= 0, got {std}"),
            });
        }
        let count = check_shape(shape)?;
        let data = (0..count)
            .map(|_| E::from_f64(rng.normal(mean, std)))
            .collect();
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }
}
