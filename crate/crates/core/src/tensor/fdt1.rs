//! FDT1 tensor file format.
//!
//! Layout: magic `FDT1` (0x46 0x44 0x54 0x31), u8 dtype tag (0 = f32,
//! 1 = f64), u8 ndim, ndim little-endian u32 dims, then raw little-endian
//! element data. Round-trips are bit-exact.

use super::{check_shape, Dtype, Element, Tensor, TensorError};
use std::io::{Read, Write};

pub const FDT1_MAGIC: [u8; 4] = *b"FDT1";

#[derive(Debug, thiserror::Error)]
pub enum FdtError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt tensor record at byte {offset}: {reason}")]
    Corrupt { offset: usize, reason: String },
    #[error("tensor dtype mismatch: file holds {found:?}, caller expects {expected:?}")]
    DtypeMismatch { expected: Dtype, found: Dtype },
    #[error("tensor record declares invalid shape: {0}")]
    Shape(#[from] TensorError),
}

pub fn write_tensor<E: Element, W: Write>(tensor: &Tensor<E>, out: &mut W) -> Result<(), FdtError> {
    let mut buf = Vec::with_capacity(6 + 4 * tensor.shape().len() + tensor.len() * E::DTYPE.size_bytes());
    buf.extend_from_slice(&FDT1_MAGIC);
    buf.push(E::DTYPE.tag());
    buf.push(tensor.shape().len() as u8);
    for &dim in tensor.shape() {
        buf.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for &v in tensor.data() {
        v.write_le(&mut buf);
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_exact_at<R: Read>(r: &mut R, buf: &mut [u8], offset: usize) -> Result<(), FdtError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            FdtError::Corrupt {
                offset,
                reason: "truncated record".into(),
            }
        } else {
            FdtError::Io(e)
        }
    })
}

pub fn read_tensor<E: Element, R: Read>(r: &mut R) -> Result<Tensor<E>, FdtError> {
    let mut header = [0u8; 6];
    read_exact_at(r, &mut header, 0)?;
    if header[0..4] != FDT1_MAGIC {
        return Err(FdtError::Corrupt {
            offset: 0,
            reason: "bad magic".into(),
        });
    }
    let dtype = Dtype::from_tag(header[4]).ok_or(FdtError::Corrupt {
        offset: 4,
        reason: format!("unknown dtype tag {}", header[4]),
    })?;
    if dtype != E::DTYPE {
        return Err(FdtError::DtypeMismatch {
            expected: E::DTYPE,
            found: dtype,
        });
    }
    let ndim = header[5] as usize;
    if ndim == 0 || ndim > 4 {
        return Err(FdtError::Corrupt {
            offset: 5,
            reason: format!("ndim {ndim} outside 1..=4"),
        });
    }
    let mut dims = vec![0u8; 4 * ndim];
    read_exact_at(r, &mut dims, 6)?;
    let shape: Vec<usize> = dims
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let count = check_shape(&shape)?;
    let elem = E::DTYPE.size_bytes();
    let mut raw = vec![0u8; count * elem];
    read_exact_at(r, &mut raw, 6 + 4 * ndim)?;
    let data = raw.chunks_exact(elem).map(E::read_le).collect();
    Ok(Tensor::from_vec(&shape, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rng;

    fn round_trip<E: Element>(t: &Tensor<E>) -> Tensor<E> {
        let mut buf = Vec::new();
        write_tensor(t, &mut buf).unwrap();
        read_tensor(&mut buf.as_slice()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let t = Tensor::<f32>::normal(&mut Rng::from_seed(1), &[2, 3, 4], 0.0, 1.0).unwrap();
        let back = round_trip(&t);
        assert_eq!(back.shape(), t.shape());
        for (a, b) in t.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        let t64 = Tensor::<f64>::normal(&mut Rng::from_seed(2), &[7], 1.0, 2.0).unwrap();
        assert_eq!(round_trip(&t64), t64);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let t = Tensor::<f32>::zeros(&[2]).unwrap();
        let mut buf = Vec::new();
        write_tensor(&t, &mut buf).unwrap();
        buf[0] ^= 0xFF;
        let err = read_tensor::<f32, _>(&mut buf.as_slice()).unwrap_err();
        assert!(matches!(err, FdtError::Corrupt { offset: 0, .. }));
    }

    #[test]
    fn dtype_mismatch_is_rejected() {
        let t = Tensor::<f64>::zeros(&[2]).unwrap();
        let mut buf = Vec::new();
        write_tensor(&t, &mut buf).unwrap();
        let err = read_tensor::<f32, _>(&mut buf.as_slice()).unwrap_err();
        assert!(matches!(err, FdtError::DtypeMismatch { .. }));
    }

    #[test]
    fn truncation_is_reported() {
        let t = Tensor::<f32>::zeros(&[4]).unwrap();
        let mut buf = Vec::new();
        write_tensor(&t, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        let err = read_tensor::<f32, _>(&mut buf.as_slice()).unwrap_err();
        assert!(matches!(err, FdtError::Corrupt { .. }));
    }
}
