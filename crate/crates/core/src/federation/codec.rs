//! FDLP wire protocol: length-prefixed binary frames carrying one
//! [`FedMessage`] each.
//!
//! Frame layout, all integers little-endian:
//!
//! | bytes  | field                                  |
//! |--------|----------------------------------------|
//! | 0..4   | u32 length of everything that follows  |
//! | 4..8   | magic `FDLP`                           |
//! | 8..10  | u16 version (= 1)                      |
//! | 10     | u8 message kind                        |
//! | 11..15 | u32 round                              |
//! | 15..19 | u32 node id                            |
//! | 19..27 | u64 sample count                       |
//! | 27..31 | u32 payload length                     |
//! | 31..   | payload                                |
//!
//! `GLOBAL_MODEL` and `LOCAL_UPDATE` carry an FDLC-encoded parameter set as
//! payload, `ERROR` carries UTF-8 text, `HELLO` and `DONE` carry nothing.

use super::fdlc;
use super::{FdlcError, ParameterSet};
use std::io::{Read, Write};

pub const FDLP_MAGIC: [u8; 4] = *b"FDLP";
pub const FDLP_VERSION: u16 = 1;
/// Frames above this size are refused outright.
pub const DEFAULT_FRAME_CAP: usize = 256 * 1024 * 1024;

const HEADER_LEN: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MessageKind {
    Hello = 1,
    GlobalModel = 2,
    LocalUpdate = 3,
    Done = 4,
    Error = 5,
}

impl MessageKind {
    pub fn from_u8(value: u8) -> Option<Self> {
        match value {
            1 => Some(Self::Hello),
            2 => Some(Self::GlobalModel),
            3 => Some(Self::LocalUpdate),
            4 => Some(Self::Done),
            5 => Some(Self::Error),
            _ => None,
        }
    }

    fn carries_model(self) -> bool {
        matches!(self, Self::GlobalModel | Self::LocalUpdate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FedMessage {
    pub kind: MessageKind,
    pub round: u32,
    pub node_id: u32,
    pub sample_count: u64,
    pub payload: Option<ParameterSet<f32>>,
    pub error_text: Option<String>,
}

impl FedMessage {
    pub fn hello(node_id: u32, sample_count: u64) -> Self {
        Self {
            kind: MessageKind::Hello,
            round: 0,
            node_id,
            sample_count,
            payload: None,
            error_text: None,
        }
    }

    pub fn global_model(round: u32, params: ParameterSet<f32>) -> Self {
        Self {
            kind: MessageKind::GlobalModel,
            round,
            node_id: 0,
            sample_count: 0,
            payload: Some(params),
            error_text: None,
        }
    }

    pub fn local_update(round: u32, node_id: u32, sample_count: u64, params: ParameterSet<f32>) -> Self {
        Self {
            kind: MessageKind::LocalUpdate,
            round,
            node_id,
            sample_count,
            payload: Some(params),
            error_text: None,
        }
    }

    pub fn done(round: u32) -> Self {
        Self {
            kind: MessageKind::Done,
            round,
            node_id: 0,
            sample_count: 0,
            payload: None,
            error_text: None,
        }
    }

    pub fn error(round: u32, node_id: u32, text: impl Into<String>) -> Self {
        Self {
            kind: MessageKind::Error,
            round,
            node_id,
            sample_count: 0,
            payload: None,
            error_text: Some(text.into()),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("frame truncated at byte {offset}: need {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("bad magic at byte {offset}")]
    BadMagic { offset: usize },
    #[error("unsupported protocol version {found} at byte {offset}")]
    UnsupportedVersion { found: u16, offset: usize },
    #[error("unknown message kind {value} at byte {offset}")]
    UnknownKind { value: u8, offset: usize },
    #[error("declared length {declared} disagrees with actual {actual} at byte {offset}")]
    LengthMismatch {
        declared: usize,
        actual: usize,
        offset: usize,
    },
    #[error("frame of {len} bytes exceeds cap {cap}")]
    FrameTooLarge { len: usize, cap: usize },
    #[error("{kind:?} message must not carry a payload")]
    UnexpectedPayload { kind: MessageKind },
    #[error("{kind:?} message requires a payload")]
    MissingPayload { kind: MessageKind },
    #[error("payload is not a valid parameter set: {0}")]
    Payload(#[from] FdlcError),
    #[error("error text at byte {offset} is not UTF-8")]
    BadErrorText { offset: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Encode a message into a complete frame (length prefix included).
pub fn encode(msg: &FedMessage) -> Result<Vec<u8>, CodecError> {
    let payload: Vec<u8> = match msg.kind {
        MessageKind::GlobalModel | MessageKind::LocalUpdate => {
            let params = msg
                .payload
                .as_ref()
                .ok_or(CodecError::MissingPayload { kind: msg.kind })?;
            fdlc::to_bytes(params)
        }
        MessageKind::Error => msg
            .error_text
            .as_deref()
            .unwrap_or("")
            .as_bytes()
            .to_vec(),
        MessageKind::Hello | MessageKind::Done => {
            if msg.payload.is_some() {
                return Err(CodecError::UnexpectedPayload { kind: msg.kind });
            }
            Vec::new()
        }
    };

    let body_len = HEADER_LEN - 4 + payload.len();
    let mut frame = Vec::with_capacity(4 + body_len);
    frame.extend_from_slice(&(body_len as u32).to_le_bytes());
    frame.extend_from_slice(&FDLP_MAGIC);
    frame.extend_from_slice(&FDLP_VERSION.to_le_bytes());
    frame.push(msg.kind as u8);
    frame.extend_from_slice(&msg.round.to_le_bytes());
    frame.extend_from_slice(&msg.node_id.to_le_bytes());
    frame.extend_from_slice(&msg.sample_count.to_le_bytes());
    frame.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    frame.extend_from_slice(&payload);
    Ok(frame)
}

/// Decode one complete frame produced by [`encode`].
pub fn decode(frame: &[u8]) -> Result<FedMessage, CodecError> {
    decode_with_cap(frame, DEFAULT_FRAME_CAP)
}

pub fn decode_with_cap(frame: &[u8], cap: usize) -> Result<FedMessage, CodecError> {
    if frame.len() < 4 {
        return Err(CodecError::Truncated {
            offset: frame.len(),
            needed: 4 - frame.len(),
        });
    }
    let declared = u32::from_le_bytes([frame[0], frame[1], frame[2], frame[3]]) as usize;
    if declared > cap {
        return Err(CodecError::FrameTooLarge {
            len: declared,
            cap,
        });
    }
    if frame.len() < 4 + declared {
        return Err(CodecError::Truncated {
            offset: frame.len(),
            needed: 4 + declared - frame.len(),
        });
    }
    if frame.len() != 4 + declared {
        return Err(CodecError::LengthMismatch {
            declared,
            actual: frame.len() - 4,
            offset: 0,
        });
    }
    if declared < HEADER_LEN - 4 {
        return Err(CodecError::Truncated {
            offset: frame.len(),
            needed: HEADER_LEN - 4 - declared,
        });
    }
    if frame[4..8] != FDLP_MAGIC {
        return Err(CodecError::BadMagic { offset: 4 });
    }
    let version = u16::from_le_bytes([frame[8], frame[9]]);
    if version != FDLP_VERSION {
        return Err(CodecError::UnsupportedVersion {
            found: version,
            offset: 8,
        });
    }
    let kind = MessageKind::from_u8(frame[10]).ok_or(CodecError::UnknownKind {
        value: frame[10],
        offset: 10,
    })?;
    let round = u32::from_le_bytes([frame[11], frame[12], frame[13], frame[14]]);
    let node_id = u32::from_le_bytes([frame[15], frame[16], frame[17], frame[18]]);
    let sample_count = u64::from_le_bytes([
        frame[19], frame[20], frame[21], frame[22], frame[23], frame[24], frame[25], frame[26],
    ]);
    let payload_len = u32::from_le_bytes([frame[27], frame[28], frame[29], frame[30]]) as usize;
    if HEADER_LEN + payload_len != frame.len() {
        return Err(CodecError::LengthMismatch {
            declared: payload_len,
            actual: frame.len() - HEADER_LEN,
            offset: 27,
        });
    }
    let payload_bytes = &frame[HEADER_LEN..];

    let (payload, error_text) = match kind {
        MessageKind::GlobalModel | MessageKind::LocalUpdate => {
            let params = super::read_parameter_set::<f32, _>(&mut &payload_bytes[..])?;
            (Some(params), None)
        }
        MessageKind::Error => {
            let text = std::str::from_utf8(payload_bytes)
                .map_err(|_| CodecError::BadErrorText { offset: HEADER_LEN })?;
            (None, Some(text.to_string()))
        }
        MessageKind::Hello | MessageKind::Done => {
            if payload_len != 0 {
                return Err(CodecError::UnexpectedPayload { kind });
            }
            (None, None)
        }
    };

    Ok(FedMessage {
        kind,
        round,
        node_id,
        sample_count,
        payload,
        error_text,
    })
}

/// Read one frame (prefix included) from a byte stream.
pub fn read_frame<R: Read>(r: &mut R, cap: usize) -> Result<Vec<u8>, CodecError> {
    let mut prefix = [0u8; 4];
    r.read_exact(&mut prefix)?;
    let declared = u32::from_le_bytes(prefix) as usize;
    if declared > cap {
        return Err(CodecError::FrameTooLarge {
            len: declared,
            cap,
        });
    }
    let mut frame = vec![0u8; 4 + declared];
    frame[..4].copy_from_slice(&prefix);
    r.read_exact(&mut frame[4..])?;
    Ok(frame)
}

/// Encode and write one frame.
pub fn write_frame<W: Write>(w: &mut W, msg: &FedMessage) -> Result<(), CodecError> {
    let frame = encode(msg)?;
    w.write_all(&frame)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Rng, Tensor};

    fn three_tensor_params() -> ParameterSet<f32> {
        let mut rng = Rng::from_seed(8);
        let mut p = ParameterSet::new();
        p.push("w1", Tensor::normal(&mut rng, &[4, 3], 0.0, 1.0).unwrap())
            .unwrap();
        p.push("w2", Tensor::normal(&mut rng, &[2, 2, 2], 0.0, 1.0).unwrap())
            .unwrap();
        p.push("b", Tensor::normal(&mut rng, &[5], 0.0, 1.0).unwrap())
            .unwrap();
        p
    }

    #[test]
    fn global_model_round_trip_is_byte_exact() {
        let msg = FedMessage::global_model(3, three_tensor_params());
        let frame = encode(&msg).unwrap();
        let back = decode(&frame).unwrap();
        assert_eq!(back, msg);
        assert_eq!(encode(&back).unwrap(), frame);
    }

    #[test]
    fn corrupted_magic_reports_offset_4() {
        let mut frame = encode(&FedMessage::done(1)).unwrap();
        frame[4] ^= 0x01;
        match decode(&frame).unwrap_err() {
            CodecError::BadMagic { offset } => assert_eq!(offset, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn done_frame_has_zero_payload_length() {
        let frame = encode(&FedMessage::done(7)).unwrap();
        assert_eq!(frame.len(), HEADER_LEN);
        assert_eq!(&frame[27..31], &[0, 0, 0, 0]);
    }

    #[test]
    fn hello_with_payload_is_rejected() {
        let mut msg = FedMessage::hello(1, 10);
        msg.payload = Some(three_tensor_params());
        assert!(matches!(
            encode(&msg).unwrap_err(),
            CodecError::UnexpectedPayload { .. }
        ));
    }

    #[test]
    fn error_message_text_survives() {
        let msg = FedMessage::error(2, 1, "node 1 exploded");
        let back = decode(&encode(&msg).unwrap()).unwrap();
        assert_eq!(back.error_text.as_deref(), Some("node 1 exploded"));
    }

    #[test]
    fn oversize_frame_is_refused() {
        let msg = FedMessage::global_model(1, three_tensor_params());
        let frame = encode(&msg).unwrap();
        assert!(matches!(
            decode_with_cap(&frame, 16).unwrap_err(),
            CodecError::FrameTooLarge { .. }
        ));
    }

    #[test]
    fn length_lie_is_detected() {
        let mut frame = encode(&FedMessage::hello(0, 4)).unwrap();
        frame[0] = frame[0].wrapping_add(1);
        assert!(decode(&frame).is_err());
        let mut frame2 = encode(&FedMessage::hello(0, 4)).unwrap();
        frame2[27] = 9;
        assert!(matches!(
            decode(&frame2).unwrap_err(),
            CodecError::LengthMismatch { offset: 27, .. }
        ));
    }
}
