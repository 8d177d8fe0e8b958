//! Detecting SIP signalling inside a capture.

use crate::capture::{IpProto, PacketRecord};

const MAX_EXEMPLARS: usize = 10;
const FIRST_LINE_LIMIT: usize = 1024;

/// Result of scanning a capture for SIP message starts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SipScan {
    pub count: u64,
    /// Packet indices of up to the first ten matches.
    pub exemplars: Vec<u64>,
}

/// True when the payload begins with a SIP request line
/// (`METHOD SP URI SP SIP/2.0`) or status line (`SIP/2.0 SP code`).
pub fn is_sip_start(payload: &[u8]) -> bool {
    let window = &payload[..payload.len().min(FIRST_LINE_LIMIT)];
    let line_end = window
        .iter()
        .position(|&b| b == b'\r' || b == b'\n')
        .unwrap_or(window.len());
    let Ok(line) = std::str::from_utf8(&window[..line_end]) else {
        return false;
    };

    if let Some(rest) = line.strip_prefix("SIP/2.0 ") {
        let code: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        return code.len() == 3;
    }

    let mut parts = line.split(' ');
    let (Some(method), Some(uri), Some(version), None) =
        (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return false;
    };
    !method.is_empty()
        && method.len() <= 16
        && method.bytes().all(|b| b.is_ascii_uppercase())
        && !uri.is_empty()
        && version == "SIP/2.0"
}

/// Count packets whose transport payload starts a SIP message.
pub fn detect_sip(packets: &[PacketRecord]) -> SipScan {
    let mut scan = SipScan::default();
    for p in packets {
        let Some(ip) = p.ip.as_ref() else { continue };
        if !matches!(ip.proto, IpProto::Udp | IpProto::Tcp) || ip.payload.is_empty() {
            continue;
        }
        if is_sip_start(&ip.payload) {
            scan.count += 1;
            if scan.exemplars.len() < MAX_EXEMPLARS {
                scan.exemplars.push(p.index);
            }
        }
    }
    scan
}

#[cfg(test)]
mod tests {
    use std::net::Ipv4Addr;

    use super::*;
    use crate::capture::IpLayer;

    fn payload_packet(index: u64, proto: IpProto, payload: &[u8]) -> PacketRecord {
        PacketRecord {
            index,
            ts_us: index * 1000,
            src_mac: None,
            dst_mac: None,
            ip: Some(IpLayer {
                src_ip: Ipv4Addr::new(10, 0, 0, 1),
                dst_ip: Ipv4Addr::new(10, 0, 0, 2),
                proto,
                src_port: Some(5060),
                dst_port: Some(5060),
                payload: payload.to_vec(),
            }),
            wire_len: 0,
        }
    }

    #[test]
    fn matches_request_and_status_lines() {
        assert!(is_sip_start(b"INVITE sip:+390412207@host SIP/2.0\r\nVia: x\r\n"));
        assert!(is_sip_start(b"BYE sip:user@host SIP/2.0"));
        assert!(is_sip_start(b"SIP/2.0 200 OK\r\n"));
        assert!(is_sip_start(b"SIP/2.0 180 Ringing"));
    }

    #[test]
    fn requires_token_boundaries() {
        assert!(!is_sip_start(b"SIPHON is not a protocol"));
        assert!(!is_sip_start(b"SIP/2.0x 200"));
        assert!(!is_sip_start(b"SIP/2.0 xx OK"));
        assert!(!is_sip_start(b"invite sip:user@host SIP/2.0"));
        assert!(!is_sip_start(b"INVITE SIP/2.0"));
        assert!(!is_sip_start(b"GET /index.html HTTP/1.1"));
        assert!(!is_sip_start(b""));
    }

    #[test]
    fn counts_matches_and_caps_exemplars() {
        let mut packets: Vec<PacketRecord> = (0..15)
            .map(|i| payload_packet(i, IpProto::Udp, b"INVITE sip:a@b SIP/2.0\r\n"))
            .collect();
        packets.push(payload_packet(15, IpProto::Tcp, b"SIP/2.0 486 Busy Here\r\n"));
        packets.push(payload_packet(16, IpProto::Udp, b"not sip"));

        let scan = detect_sip(&packets);
        assert_eq!(scan.count, 16);
        assert_eq!(scan.exemplars, (0..10).collect::<Vec<u64>>());
    }

    #[test]
    fn a_clean_capture_scans_to_zero() {
        let packets = vec![
            payload_packet(0, IpProto::Tcp, &[0x16, 0x03, 0x01, 0x02, 0x00]),
            payload_packet(1, IpProto::Udp, b"\x12\x34 binary"),
        ];
        assert_eq!(detect_sip(&packets), SipScan::default());
    }
}
