//! RTP packet parsing and (for fixture generation) serialization.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RtpParseError {
    #[error("packet shorter than the 12-byte fixed header")]
    TooShort,
    #[error("version {0}, expected 2")]
    BadVersion(u8),
    #[error("csrc, extension, or padding lengths exceed the packet")]
    BadLengths,
}

/// One parsed RTP packet plus when it was captured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtpPacket {
    pub seq: u16,
    pub timestamp: u32,
    pub ssrc: u32,
    pub payload_type: u8,
    pub marker: bool,
    pub payload: Vec<u8>,
    /// Capture timestamp of the frame that carried this packet, microseconds.
    pub arrival_us: u64,
}

pub fn parse_rtp(data: &[u8], arrival_us: u64) -> Result<RtpPacket, RtpParseError> {
    if data.len() < 12 {
        return Err(RtpParseError::TooShort);
    }
    let version = data[0] >> 6;
    if version != 2 {
        return Err(RtpParseError::BadVersion(version));
    }
    let has_padding = data[0] & 0x20 != 0;
    let has_extension = data[0] & 0x10 != 0;
    let csrc_count = (data[0] & 0x0f) as usize;
    let marker = data[1] & 0x80 != 0;
    let payload_type = data[1] & 0x7f;
    let seq = u16::from_be_bytes([data[2], data[3]]);
    let timestamp = u32::from_be_bytes([data[4], data[5], data[6], data[7]]);
    let ssrc = u32::from_be_bytes([data[8], data[9], data[10], data[11]]);

    let mut offset = 12 + csrc_count * 4;
    if data.len() < offset {
        return Err(RtpParseError::BadLengths);
    }
    if has_extension {
        if data.len() < offset + 4 {
            return Err(RtpParseError::BadLengths);
        }
        let words = u16::from_be_bytes([data[offset + 2], data[offset + 3]]) as usize;
        offset += 4 + words * 4;
        if data.len() < offset {
            return Err(RtpParseError::BadLengths);
        }
    }
    let mut end = data.len();
    if has_padding {
        let pad = data[end - 1] as usize;
        if pad == 0 || offset + pad > end {
            return Err(RtpParseError::BadLengths);
        }
        end -= pad;
    }

    Ok(RtpPacket {
        seq,
        timestamp,
        ssrc,
        payload_type,
        marker,
        payload: data[offset..end].to_vec(),
        arrival_us,
    })
}

/// Serialize a plain packet (no CSRCs, extension, or padding). Fixture
/// generation and the parser round-trip through this.
pub fn encode_rtp(seq: u16, timestamp: u32, ssrc: u32, payload_type: u8, marker: bool, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + payload.len());
    out.push(0x80); // version 2
    out.push((payload_type & 0x7f) | if marker { 0x80 } else { 0 });
    out.extend_from_slice(&seq.to_be_bytes());
    out.extend_from_slice(&timestamp.to_be_bytes());
    out.extend_from_slice(&ssrc.to_be_bytes());
    out.extend_from_slice(payload);
    out
}
