//! FDLC checkpoint format: a named, ordered sequence of FDT1 tensor records.
//!
//! Layout: magic `FDLC`, u16 version (= 1), u32 entry count, then per entry a
//! u16 name length, the UTF-8 name, and an embedded FDT1 record. All integers
//! little-endian; entries in the model's canonical parameter order.

use super::{FedError, ParameterSet};
use crate::tensor::{read_tensor, write_tensor, Element, FdtError};
use std::io::{Read, Write};
use std::path::Path;

pub const FDLC_MAGIC: [u8; 4] = *b"FDLC";
pub const FDLC_VERSION: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FdlcError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt checkpoint at byte {offset}: {reason}")]
    Corrupt { offset: usize, reason: String },
    #[error("checkpoint tensor entry '{name}': {source}")]
    Tensor { name: String, source: FdtError },
    #[error(transparent)]
    Params(#[from] FedError),
}

pub fn write_parameter_set<E: Element, W: Write>(
    params: &ParameterSet<E>,
    out: &mut W,
) -> Result<(), FdlcError> {
    out.write_all(&FDLC_MAGIC)?;
    out.write_all(&FDLC_VERSION.to_le_bytes())?;
    out.write_all(&(params.len() as u32).to_le_bytes())?;
    for (name, tensor) in params.iter() {
        out.write_all(&(name.len() as u16).to_le_bytes())?;
        out.write_all(name.as_bytes())?;
        write_tensor(tensor, out).map_err(|source| FdlcError::Tensor {
            name: name.to_string(),
            source,
        })?;
    }
    Ok(())
}

fn read_checked<R: Read>(r: &mut R, buf: &mut [u8], offset: usize) -> Result<(), FdlcError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            FdlcError::Corrupt {
                offset,
                reason: "truncated checkpoint".into(),
            }
        } else {
            FdlcError::Io(e)
        }
    })
}

pub fn read_parameter_set<E: Element, R: Read>(r: &mut R) -> Result<ParameterSet<E>, FdlcError> {
    let mut header = [0u8; 10];
    read_checked(r, &mut header, 0)?;
    if header[0..4] != FDLC_MAGIC {
        return Err(FdlcError::Corrupt {
            offset: 0,
            reason: "bad magic".into(),
        });
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != FDLC_VERSION {
        return Err(FdlcError::Corrupt {
            offset: 4,
            reason: format!("unsupported version {version}"),
        });
    }
    let count = u32::from_le_bytes([header[6], header[7], header[8], header[9]]) as usize;
    let mut params = ParameterSet::new();
    let mut offset = 10usize;
    for _ in 0..count {
        let mut len_buf = [0u8; 2];
        read_checked(r, &mut len_buf, offset)?;
        let name_len = u16::from_le_bytes(len_buf) as usize;
        offset += 2;
        let mut name_buf = vec![0u8; name_len];
        read_checked(r, &mut name_buf, offset)?;
        let name = String::from_utf8(name_buf).map_err(|_| FdlcError::Corrupt {
            offset,
            reason: "entry name is not UTF-8".into(),
        })?;
        offset += name_len;
        let tensor = read_tensor(r).map_err(|source| FdlcError::Tensor {
            name: name.clone(),
            source,
        })?;
        offset += 6 + 4 * tensor.shape().len() + tensor.len() * E::DTYPE.size_bytes();
        params.push(name, tensor)?;
    }
    Ok(params)
}

/// Serialize to an in-memory buffer (the FDLP payload encoding).
pub fn to_bytes<E: Element>(params: &ParameterSet<E>) -> Vec<u8> {
    let mut buf = Vec::new();
    write_parameter_set(params, &mut buf).expect("in-memory write cannot fail");
    buf
}

pub fn save_file<E: Element>(params: &ParameterSet<E>, path: &Path) -> Result<(), FdlcError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_parameter_set(params, &mut file)?;
    use std::io::Write as _;
    file.flush()?;
    Ok(())
}

pub fn load_file<E: Element>(path: &Path) -> Result<ParameterSet<E>, FdlcError> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_parameter_set(&mut file)
}
