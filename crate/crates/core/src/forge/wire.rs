//! Byte-level builders for synthetic captures: classic pcap framing,
//! Ethernet/IPv4/UDP/TCP frames, and minimal DNS messages.

use std::io::{self, Write};
use std::net::Ipv4Addr;

pub const LINKTYPE_ETHERNET: u32 = 1;
pub const TCP_ACK: u8 = 0x10;
pub const TCP_PSH_ACK: u8 = 0x18;

/// Classic pcap writer (microsecond timestamps).
pub struct PcapWriter<W: Write> {
    w: W,
    big_endian: bool,
}

impl<W: Write> PcapWriter<W> {
    pub fn new(w: W) -> io::Result<Self> {
        Self::with_endianness(w, false)
    }

    pub fn with_endianness(mut w: W, big_endian: bool) -> io::Result<Self> {
        let mut hdr = Vec::with_capacity(24);
        put_u32(&mut hdr, 0xa1b2_c3d4, big_endian);
        put_u16(&mut hdr, 2, big_endian); // version major
        put_u16(&mut hdr, 4, big_endian); // version minor
        put_u32(&mut hdr, 0, big_endian); // thiszone
        put_u32(&mut hdr, 0, big_endian); // sigfigs
        put_u32(&mut hdr, 65535, big_endian); // snaplen
        put_u32(&mut hdr, LINKTYPE_ETHERNET, big_endian);
        w.write_all(&hdr)?;
        Ok(PcapWriter { w, big_endian })
    }

    pub fn record(&mut self, ts_us: u64, frame: &[u8]) -> io::Result<()> {
        self.record_with_orig(ts_us, frame, frame.len() as u32)
    }

    pub fn record_with_orig(&mut self, ts_us: u64, frame: &[u8], orig_len: u32) -> io::Result<()> {
        let mut hdr = Vec::with_capacity(16);
        put_u32(&mut hdr, (ts_us / 1_000_000) as u32, self.big_endian);
        put_u32(&mut hdr, (ts_us % 1_000_000) as u32, self.big_endian);
        put_u32(&mut hdr, frame.len() as u32, self.big_endian);
        put_u32(&mut hdr, orig_len, self.big_endian);
        self.w.write_all(&hdr)?;
        self.w.write_all(frame)
    }

    pub fn into_inner(self) -> W {
        self.w
    }
}

fn put_u16(buf: &mut Vec<u8>, v: u16, big_endian: bool) {
    if big_endian {
        buf.extend_from_slice(&v.to_be_bytes());
    } else {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

fn put_u32(buf: &mut Vec<u8>, v: u32, big_endian: bool) {
    if big_endian {
        buf.extend_from_slice(&v.to_be_bytes());
    } else {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn eth_frame(dst_mac: [u8; 6], src_mac: [u8; 6], ethertype: u16, payload: &[u8]) -> Vec<u8> {
    let mut f = Vec::with_capacity(14 + payload.len());
    f.extend_from_slice(&dst_mac);
    f.extend_from_slice(&src_mac);
    f.extend_from_slice(&ethertype.to_be_bytes());
    f.extend_from_slice(payload);
    f
}

pub fn ipv4_packet(src: Ipv4Addr, dst: Ipv4Addr, proto: u8, payload: &[u8]) -> Vec<u8> {
    let total_len = (20 + payload.len()) as u16;
    let mut p = Vec::with_capacity(total_len as usize);
    p.push(0x45); // version 4, ihl 5
    p.push(0);
    p.extend_from_slice(&total_len.to_be_bytes());
    p.extend_from_slice(&[0, 0, 0x40, 0]); // id 0, DF
    p.push(64); // ttl
    p.push(proto);
    p.extend_from_slice(&[0, 0]); // checksum placeholder
    p.extend_from_slice(&src.octets());
    p.extend_from_slice(&dst.octets());
    let csum = ipv4_checksum(&p[..20]);
    p[10..12].copy_from_slice(&csum.to_be_bytes());
    p.extend_from_slice(payload);
    p
}

pub fn ipv4_checksum(header: &[u8]) -> u16 {
    let mut sum: u32 = 0;
    for chunk in header.chunks(2) {
        let word = if chunk.len() == 2 {
            u16::from_be_bytes([chunk[0], chunk[1]])
        } else {
            u16::from_be_bytes([chunk[0], 0])
        };
        sum += word as u32;
    }
    while sum > 0xffff {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    !(sum as u16)
}

pub fn udp_datagram(sport: u16, dport: u16, payload: &[u8]) -> Vec<u8> {
    let mut d = Vec::with_capacity(8 + payload.len());
    d.extend_from_slice(&sport.to_be_bytes());
    d.extend_from_slice(&dport.to_be_bytes());
    d.extend_from_slice(&((8 + payload.len()) as u16).to_be_bytes());
    d.extend_from_slice(&[0, 0]); // checksum omitted: synthetic traffic
    d.extend_from_slice(payload);
    d
}

pub fn tcp_segment(sport: u16, dport: u16, seq: u32, flags: u8, payload: &[u8]) -> Vec<u8> {
    let mut s = Vec::with_capacity(20 + payload.len());
    s.extend_from_slice(&sport.to_be_bytes());
    s.extend_from_slice(&dport.to_be_bytes());
    s.extend_from_slice(&seq.to_be_bytes());
    s.extend_from_slice(&0u32.to_be_bytes()); // ack
    s.push(5 << 4); // data offset 5 words
    s.push(flags);
    s.extend_from_slice(&1024u16.to_be_bytes()); // window
    s.extend_from_slice(&[0, 0, 0, 0]); // checksum + urgent: synthetic traffic
    s.extend_from_slice(payload);
    s
}

const DEFAULT_SRC_MAC: [u8; 6] = [0x80, 0x58, 0xf8, 0x13, 0x2b, 0x5c];
const DEFAULT_DST_MAC: [u8; 6] = [0x02, 0x42, 0xc0, 0xa8, 0x01, 0x01];

/// Ethernet II / IPv4 / UDP frame with default lab MAC addresses.
pub fn udp_frame(src: Ipv4Addr, dst: Ipv4Addr, sport: u16, dport: u16, payload: &[u8]) -> Vec<u8> {
    let udp = udp_datagram(sport, dport, payload);
    let ip = ipv4_packet(src, dst, 17, &udp);
    eth_frame(DEFAULT_DST_MAC, DEFAULT_SRC_MAC, 0x0800, &ip)
}

/// Ethernet II / IPv4 / TCP frame padded with `fill` bytes so the whole frame
/// is exactly `wire_len` bytes (minimum 54).
pub fn tcp_frame_sized(
    src: Ipv4Addr,
    dst: Ipv4Addr,
    sport: u16,
    dport: u16,
    seq: u32,
    wire_len: usize,
    fill: u8,
) -> Vec<u8> {
    assert!(wire_len >= 54, "minimum Ethernet+IPv4+TCP frame is 54 bytes");
    let payload = vec![fill; wire_len - 54];
    let flags = if payload.is_empty() { TCP_ACK } else { TCP_PSH_ACK };
    let tcp = tcp_segment(sport, dport, seq, flags, &payload);
    let ip = ipv4_packet(src, dst, 6, &tcp);
    eth_frame(DEFAULT_DST_MAC, DEFAULT_SRC_MAC, 0x0800, &ip)
}

fn encode_dns_name(name: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(name.len() + 2);
    for label in name.split('.').filter(|l| !l.is_empty()) {
        out.push(label.len() as u8);
        out.extend_from_slice(label.as_bytes());
    }
    out.push(0);
    out
}

/// Standard A-record query.
pub fn dns_query(txid: u16, name: &str) -> Vec<u8> {
    let mut m = Vec::new();
    m.extend_from_slice(&txid.to_be_bytes());
    m.extend_from_slice(&0x0100u16.to_be_bytes()); // RD
    m.extend_from_slice(&1u16.to_be_bytes()); // qdcount
    m.extend_from_slice(&[0, 0, 0, 0, 0, 0]);
    m.extend_from_slice(&encode_dns_name(name));
    m.extend_from_slice(&1u16.to_be_bytes()); // type A
    m.extend_from_slice(&1u16.to_be_bytes()); // class IN
    m
}

/// Response carrying a CNAME chain followed by A records, no compression.
pub fn dns_response(txid: u16, name: &str, cnames: &[&str], answers: &[Ipv4Addr]) -> Vec<u8> {
    let mut m = Vec::new();
    m.extend_from_slice(&txid.to_be_bytes());
    m.extend_from_slice(&0x8180u16.to_be_bytes()); // QR, RD, RA
    m.extend_from_slice(&1u16.to_be_bytes());
    m.extend_from_slice(&((cnames.len() + answers.len()) as u16).to_be_bytes());
    m.extend_from_slice(&[0, 0, 0, 0]);
    m.extend_from_slice(&encode_dns_name(name));
    m.extend_from_slice(&1u16.to_be_bytes());
    m.extend_from_slice(&1u16.to_be_bytes());

    let mut owner = name;
    for target in cnames {
        m.extend_from_slice(&encode_dns_name(owner));
        m.extend_from_slice(&5u16.to_be_bytes()); // CNAME
        m.extend_from_slice(&1u16.to_be_bytes());
        m.extend_from_slice(&60u32.to_be_bytes());
        let rdata = encode_dns_name(target);
        m.extend_from_slice(&(rdata.len() as u16).to_be_bytes());
        m.extend_from_slice(&rdata);
        owner = target;
    }
    for addr in answers {
        m.extend_from_slice(&encode_dns_name(owner));
        m.extend_from_slice(&1u16.to_be_bytes()); // A
        m.extend_from_slice(&1u16.to_be_bytes());
        m.extend_from_slice(&60u32.to_be_bytes());
        m.extend_from_slice(&4u16.to_be_bytes());
        m.extend_from_slice(&addr.octets());
    }
    m
}
