//! Debug-recording encapsulation carried over UDP.
//!
//! The canonical layout, written and read by this module (integers
//! big-endian):
//!
//! ```text
//! offset  size  field
//! 0       1     version, currently 1
//! 1       8     timestamp, microseconds
//! 9       1     session-id length n
//! 10      n     session id, UTF-8
//! 10+n    1     trace point
//! 11+n    1     source id
//! 12+n    1     media type (1 = RTP, anything else = other)
//! 13+n    ..    encapsulated payload
//! ```
//!
//! Vendor layouts differ; `parse_acdr_with` accepts any decoder with the
//! same shape, so a real-device adapter slots in without touching the
//! stream logic downstream.

use serde::{Deserialize, Serialize};

use crate::capture::{IpProto, PacketRecord};

pub const ACDR_DEFAULT_PORT: u16 = 925;
const ACDR_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcdrMediaType {
    Rtp,
    Other,
}

/// One decoded debug-recording frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcdrFrame {
    /// Timestamp from the encapsulation header, microseconds.
    pub ts_us: u64,
    /// Capture timestamp of the carrying UDP packet, microseconds.
    pub arrival_us: u64,
    pub trace_pt: u8,
    pub src_id: u8,
    pub full_session_id: String,
    pub media_type: AcdrMediaType,
    pub payload: Vec<u8>,
}

/// Serialize a frame in the canonical layout.
pub fn encode_acdr(frame: &AcdrFrame) -> Vec<u8> {
    let sid = frame.full_session_id.as_bytes();
    assert!(sid.len() <= 255, "session id longer than one length byte");
    let mut out = Vec::with_capacity(13 + sid.len() + frame.payload.len());
    out.push(ACDR_VERSION);
    out.extend_from_slice(&frame.ts_us.to_be_bytes());
    out.push(sid.len() as u8);
    out.extend_from_slice(sid);
    out.push(frame.trace_pt);
    out.push(frame.src_id);
    out.push(match frame.media_type {
        AcdrMediaType::Rtp => 1,
        AcdrMediaType::Other => 0,
    });
    out.extend_from_slice(&frame.payload);
    out
}

/// Decode one canonical frame. `None` means the header failed validation.
pub fn decode_acdr(data: &[u8], arrival_us: u64) -> Option<AcdrFrame> {
    if data.len() < 13 || data[0] != ACDR_VERSION {
        return None;
    }
    let ts_us = u64::from_be_bytes(data[1..9].try_into().unwrap());
    let sid_len = data[9] as usize;
    if data.len() < 13 + sid_len {
        return None;
    }
    let sid = std::str::from_utf8(&data[10..10 + sid_len]).ok()?;
    let trace_pt = data[10 + sid_len];
    let src_id = data[11 + sid_len];
    let media_type = if data[12 + sid_len] == 1 {
        AcdrMediaType::Rtp
    } else {
        AcdrMediaType::Other
    };
    let payload = data[13 + sid_len..].to_vec();
    if media_type == AcdrMediaType::Rtp && payload.is_empty() {
        return None;
    }
    Some(AcdrFrame {
        ts_us,
        arrival_us,
        trace_pt,
        src_id,
        full_session_id: sid.to_string(),
        media_type,
        payload,
    })
}

/// Extract debug-recording frames from captured packets: UDP traffic to
/// `listen_port`, decoded with `decode`. Returns the frames in capture order
/// plus how many candidate payloads failed validation and were skipped.
pub fn parse_acdr_with<D>(packets: &[PacketRecord], listen_port: u16, decode: D) -> (Vec<AcdrFrame>, u64)
where
    D: Fn(&[u8], u64) -> Option<AcdrFrame>,
{
    let mut frames = Vec::new();
    let mut skipped = 0u64;
    for p in packets {
        let Some(ip) = p.ip.as_ref() else { continue };
        if ip.proto != IpProto::Udp || ip.dst_port != Some(listen_port) {
            continue;
        }
        match decode(&ip.payload, p.ts_us) {
            Some(frame) => frames.push(frame),
            None => skipped += 1,
        }
    }
    (frames, skipped)
}

/// `parse_acdr_with` using the canonical layout.
pub fn parse_acdr(packets: &[PacketRecord], listen_port: u16) -> (Vec<AcdrFrame>, u64) {
    parse_acdr_with(packets, listen_port, decode_acdr)
}

#[cfg(test)]
mod tests {
    use std::net::Ipv4Addr;

    use super::*;
    use crate::capture::IpLayer;

    fn frame() -> AcdrFrame {
        AcdrFrame {
            ts_us: 1_234_567,
            arrival_us: 1_234_600,
            trace_pt: 35,
            src_id: 36,
            full_session_id: "1f9a8b7c:65".into(),
            media_type: AcdrMediaType::Rtp,
            payload: vec![0x80, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1, 0xff],
        }
    }

    fn carry(payload: Vec<u8>, dport: u16) -> PacketRecord {
        PacketRecord {
            index: 0,
            ts_us: 1_234_600,
            src_mac: None,
            dst_mac: None,
            ip: Some(IpLayer {
                src_ip: Ipv4Addr::new(10, 8, 6, 55),
                dst_ip: Ipv4Addr::new(10, 8, 6, 10),
                proto: IpProto::Udp,
                src_port: Some(5000),
                dst_port: Some(dport),
                payload,
            }),
            wire_len: 0,
        }
    }

    #[test]
    fn encode_decode_round_trips_field_exact() {
        let f = frame();
        let decoded = decode_acdr(&encode_acdr(&f), f.arrival_us).unwrap();
        assert_eq!(decoded, f);
    }

    #[test]
    fn listens_only_on_the_given_port() {
        let f = frame();
        let packets = vec![carry(encode_acdr(&f), ACDR_DEFAULT_PORT), carry(encode_acdr(&f), 926)];
        let (frames, skipped) = parse_acdr(&packets, ACDR_DEFAULT_PORT);
        assert_eq!(frames.len(), 1);
        assert_eq!(skipped, 0);
    }

    #[test]
    fn invalid_payloads_are_skipped_and_counted() {
        let f = frame();
        let mut rtp_empty = frame();
        rtp_empty.payload.clear();
        let packets = vec![
            carry(Vec::new(), ACDR_DEFAULT_PORT),
            carry(vec![9, 9, 9], ACDR_DEFAULT_PORT),
            carry(encode_acdr(&rtp_empty), ACDR_DEFAULT_PORT),
            carry(encode_acdr(&f), ACDR_DEFAULT_PORT),
        ];
        let (frames, skipped) = parse_acdr(&packets, ACDR_DEFAULT_PORT);
        assert_eq!(frames.len(), 1);
        assert_eq!(skipped, 3);
    }

    #[test]
    fn a_non_rtp_frame_may_be_empty() {
        let mut f = frame();
        f.media_type = AcdrMediaType::Other;
        f.payload.clear();
        let decoded = decode_acdr(&encode_acdr(&f), f.arrival_us).unwrap();
        assert_eq!(decoded.media_type, AcdrMediaType::Other);
        assert!(decoded.payload.is_empty());
    }
}
