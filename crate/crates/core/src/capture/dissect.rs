use std::net::Ipv4Addr;

use super::{IpLayer, IpProto};

const ETHERTYPE_IPV4: u16 = 0x0800;
const ETHERTYPE_IPV6: u16 = 0x86dd;
const ETHERTYPE_VLAN: u16 = 0x8100;
const LINKTYPE_ETHERNET: u32 = 1;
const LINKTYPE_LINUX_SLL: u32 = 113;

pub(crate) enum LinkOutcome {
    Ok,
    UnsupportedLink,
    Ipv6,
    NonIp,
    Malformed,
    Fragment,
}

pub(crate) struct Dissected {
    pub src_mac: Option<[u8; 6]>,
    pub dst_mac: Option<[u8; 6]>,
    pub ip: Option<IpLayer>,
    pub note: LinkOutcome,
}

impl Dissected {
    fn bare(note: LinkOutcome) -> Self {
        Dissected { src_mac: None, dst_mac: None, ip: None, note }
    }
}

pub(crate) fn dissect_frame(link_type: u32, data: &[u8]) -> Dissected {
    match link_type {
        LINKTYPE_ETHERNET => dissect_ethernet(data),
        LINKTYPE_LINUX_SLL => dissect_sll(data),
        _ => Dissected::bare(LinkOutcome::UnsupportedLink),
    }
}

fn dissect_ethernet(data: &[u8]) -> Dissected {
    if data.len() < 14 {
        return Dissected::bare(LinkOutcome::Malformed);
    }
    let dst_mac: [u8; 6] = data[0..6].try_into().unwrap();
    let src_mac: [u8; 6] = data[6..12].try_into().unwrap();
    let mut ethertype = u16::from_be_bytes([data[12], data[13]]);
    let mut offset = 14;
    // One level of 802.1Q unwrapping.
    if ethertype == ETHERTYPE_VLAN {
        if data.len() < 18 {
            return Dissected::bare(LinkOutcome::Malformed);
        }
        ethertype = u16::from_be_bytes([data[16], data[17]]);
        offset = 18;
    }
    let (ip, note) = match ethertype {
        ETHERTYPE_IPV4 => dissect_ipv4(&data[offset..]),
        ETHERTYPE_IPV6 => (None, LinkOutcome::Ipv6),
        _ => (None, LinkOutcome::NonIp),
    };
    Dissected { src_mac: Some(src_mac), dst_mac: Some(dst_mac), ip, note }
}

fn dissect_sll(data: &[u8]) -> Dissected {
    if data.len() < 16 {
        return Dissected::bare(LinkOutcome::Malformed);
    }
    let addr_len = u16::from_be_bytes([data[4], data[5]]) as usize;
    let src_mac = if addr_len == 6 {
        Some(data[6..12].try_into().unwrap())
    } else {
        None
    };
    let proto = u16::from_be_bytes([data[14], data[15]]);
    let (ip, note) = match proto {
        ETHERTYPE_IPV4 => dissect_ipv4(&data[16..]),
        ETHERTYPE_IPV6 => (None, LinkOutcome::Ipv6),
        _ => (None, LinkOutcome::NonIp),
    };
    Dissected { src_mac, dst_mac: None, ip, note }
}

fn dissect_ipv4(data: &[u8]) -> (Option<IpLayer>, LinkOutcome) {
    if data.len() < 20 {
        return (None, LinkOutcome::Malformed);
    }
    let version = data[0] >> 4;
    if version != 4 {
        return (None, LinkOutcome::Malformed);
    }
    let header_len = ((data[0] & 0x0f) as usize) * 4;
    if header_len < 20 || data.len() < header_len {
        return (None, LinkOutcome::Malformed);
    }
    // Bound by total length so Ethernet trailer padding never leaks into the
    // transport payload; snaplen truncation may leave fewer bytes than stated.
    let total_len = u16::from_be_bytes([data[2], data[3]]) as usize;
    let end = total_len.clamp(header_len, data.len().max(header_len)).min(data.len());
    if end < header_len {
        return (None, LinkOutcome::Malformed);
    }
    let frag_offset = u16::from_be_bytes([data[6], data[7]]) & 0x1fff;
    let proto_num = data[9];
    let src_ip = Ipv4Addr::new(data[12], data[13], data[14], data[15]);
    let dst_ip = Ipv4Addr::new(data[16], data[17], data[18], data[19]);
    let ip_payload = &data[header_len..end];

    if frag_offset != 0 {
        // Non-first fragment: no transport header to read.
        let layer = IpLayer {
            src_ip,
            dst_ip,
            proto: IpProto::Other,
            src_port: None,
            dst_port: None,
            payload: ip_payload.to_vec(),
        };
        return (Some(layer), LinkOutcome::Fragment);
    }

    let layer = match proto_num {
        6 => match dissect_tcp(ip_payload) {
            Some((sp, dp, payload)) => IpLayer {
                src_ip,
                dst_ip,
                proto: IpProto::Tcp,
                src_port: Some(sp),
                dst_port: Some(dp),
                payload,
            },
            None => return (None, LinkOutcome::Malformed),
        },
        17 => match dissect_udp(ip_payload) {
            Some((sp, dp, payload)) => IpLayer {
                src_ip,
                dst_ip,
                proto: IpProto::Udp,
                src_port: Some(sp),
                dst_port: Some(dp),
                payload,
            },
            None => return (None, LinkOutcome::Malformed),
        },
        _ => IpLayer {
            src_ip,
            dst_ip,
            proto: IpProto::Other,
            src_port: None,
            dst_port: None,
            payload: ip_payload.to_vec(),
        },
    };
    (Some(layer), LinkOutcome::Ok)
}

fn dissect_tcp(data: &[u8]) -> Option<(u16, u16, Vec<u8>)> {
    if data.len() < 20 {
        return None;
    }
    let sp = u16::from_be_bytes([data[0], data[1]]);
    let dp = u16::from_be_bytes([data[2], data[3]]);
    let data_offset = ((data[12] >> 4) as usize) * 4;
    if data_offset < 20 || data.len() < data_offset {
        return None;
    }
    Some((sp, dp, data[data_offset..].to_vec()))
}

fn dissect_udp(data: &[u8]) -> Option<(u16, u16, Vec<u8>)> {
    if data.len() < 8 {
        return None;
    }
    let sp = u16::from_be_bytes([data[0], data[1]]);
    let dp = u16::from_be_bytes([data[2], data[3]]);
    let udp_len = u16::from_be_bytes([data[4], data[5]]) as usize;
    let end = udp_len.clamp(8, data.len().max(8)).min(data.len());
    Some((sp, dp, data[8..end].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::wire;

    #[test]
    fn unwraps_one_vlan_tag() {
        let ip = wire::ipv4_packet(
            Ipv4Addr::new(10, 1, 1, 1),
            Ipv4Addr::new(10, 1, 1, 2),
            17,
            &wire::udp_datagram(5000, 6000, b"tagged"),
        );
        let mut inner = Vec::new();
        inner.extend_from_slice(&[0x00, 0x64]); // priority 0, VLAN 100
        inner.extend_from_slice(&0x0800u16.to_be_bytes());
        inner.extend_from_slice(&ip);
        let frame = wire::eth_frame([1; 6], [2; 6], 0x8100, &inner);

        let d = dissect_frame(LINKTYPE_ETHERNET, &frame);
        let layer = d.ip.expect("vlan frame should dissect");
        assert_eq!(layer.src_port, Some(5000));
        assert_eq!(layer.payload, b"tagged");
    }

    #[test]
    fn parses_linux_cooked_frames() {
        let ip = wire::ipv4_packet(
            Ipv4Addr::new(192, 168, 1, 5),
            Ipv4Addr::new(8, 8, 8, 8),
            17,
            &wire::udp_datagram(40000, 53, b"q"),
        );
        let mut frame = Vec::new();
        frame.extend_from_slice(&0u16.to_be_bytes()); // packet type: to us
        frame.extend_from_slice(&1u16.to_be_bytes()); // ARPHRD_ETHER
        frame.extend_from_slice(&6u16.to_be_bytes()); // address length
        frame.extend_from_slice(&[0x80, 0x58, 0xf8, 0x13, 0x2b, 0x5c, 0, 0]);
        frame.extend_from_slice(&0x0800u16.to_be_bytes());
        frame.extend_from_slice(&ip);

        let d = dissect_frame(LINKTYPE_LINUX_SLL, &frame);
        assert_eq!(d.src_mac, Some([0x80, 0x58, 0xf8, 0x13, 0x2b, 0x5c]));
        let layer = d.ip.expect("sll frame should dissect");
        assert_eq!(layer.dst_port, Some(53));
    }

    #[test]
    fn trailer_padding_stays_out_of_the_payload() {
        let ip = wire::ipv4_packet(
            Ipv4Addr::new(10, 1, 1, 1),
            Ipv4Addr::new(10, 1, 1, 2),
            17,
            &wire::udp_datagram(5000, 6000, b"tiny"),
        );
        let mut padded = ip.clone();
        padded.extend_from_slice(&[0u8; 14]); // Ethernet minimum-size trailer
        let frame = wire::eth_frame([1; 6], [2; 6], 0x0800, &padded);

        let d = dissect_frame(LINKTYPE_ETHERNET, &frame);
        assert_eq!(d.ip.unwrap().payload, b"tiny");
    }

    #[test]
    fn non_first_fragments_have_no_ports() {
        let mut ip = wire::ipv4_packet(
            Ipv4Addr::new(10, 1, 1, 1),
            Ipv4Addr::new(10, 1, 1, 2),
            17,
            &[0xaa; 16],
        );
        ip[6..8].copy_from_slice(&0x00b9u16.to_be_bytes()); // fragment offset 185
        let csum = wire::ipv4_checksum(&{
            let mut h = ip[..20].to_vec();
            h[10] = 0;
            h[11] = 0;
            h
        });
        ip[10..12].copy_from_slice(&csum.to_be_bytes());
        let frame = wire::eth_frame([1; 6], [2; 6], 0x0800, &ip);

        let d = dissect_frame(LINKTYPE_ETHERNET, &frame);
        assert!(matches!(d.note, LinkOutcome::Fragment));
        let layer = d.ip.unwrap();
        assert_eq!(layer.proto, IpProto::Other);
        assert_eq!(layer.src_port, None);
    }

    #[test]
    fn sized_tcp_frames_hit_their_exact_wire_length() {
        for len in [54usize, 60, 433, 1514] {
            let frame = wire::tcp_frame_sized(
                Ipv4Addr::new(192, 168, 1, 5),
                Ipv4Addr::new(52, 114, 104, 172),
                48851,
                443,
                1,
                len,
                0x5a,
            );
            assert_eq!(frame.len(), len);
            let d = dissect_frame(LINKTYPE_ETHERNET, &frame);
            let layer = d.ip.expect("sized frame should dissect");
            assert_eq!(layer.proto, IpProto::Tcp);
            assert_eq!(layer.payload.len(), len - 54);
        }
    }
}
