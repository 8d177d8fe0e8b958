//! Minimal DNS wire parsing: enough to pair A queries with their answers.

use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::capture::{IpProto, PacketRecord};

const TYPE_A: u16 = 1;
const MAX_POINTER_JUMPS: usize = 32;

/// One resolved (or unanswered) name lookup, anchored at the query time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnsObservation {
    /// Query capture timestamp, microseconds.
    pub ts_us: u64,
    /// Case-folded fully qualified name.
    pub query_name: String,
    pub answers: Vec<Ipv4Addr>,
    pub txid: u16,
}

/// Pair port-53 queries with responses by transaction id. Unanswered
/// queries come back with empty answers; responses whose query was not
/// captured are kept too, anchored at the response time. Malformed DNS
/// payloads are counted, never fatal.
pub fn extract_dns(packets: &[PacketRecord]) -> (Vec<DnsObservation>, u64) {
    let mut observations: Vec<DnsObservation> = Vec::new();
    let mut malformed = 0u64;

    for p in packets {
        let Some(ip) = p.ip.as_ref() else { continue };
        if ip.proto != IpProto::Udp {
            continue;
        }
        let is_query = ip.dst_port == Some(53);
        let is_response = ip.src_port == Some(53);
        if !is_query && !is_response {
            continue;
        }
        let Some(msg) = parse_message(&ip.payload) else {
            malformed += 1;
            continue;
        };
        if msg.is_response != is_response {
            malformed += 1;
            continue;
        }
        if msg.is_response {
            let unanswered = observations
                .iter_mut()
                .find(|o| o.txid == msg.txid && o.query_name == msg.qname && o.answers.is_empty());
            match unanswered {
                Some(o) => o.answers = msg.answers,
                None => observations.push(DnsObservation {
                    ts_us: p.ts_us,
                    query_name: msg.qname,
                    answers: msg.answers,
                    txid: msg.txid,
                }),
            }
        } else {
            observations.push(DnsObservation {
                ts_us: p.ts_us,
                query_name: msg.qname,
                answers: Vec::new(),
                txid: msg.txid,
            });
        }
    }
    (observations, malformed)
}

struct Message {
    txid: u16,
    is_response: bool,
    qname: String,
    answers: Vec<Ipv4Addr>,
}

fn parse_message(data: &[u8]) -> Option<Message> {
    if data.len() < 12 {
        return None;
    }
    let txid = u16::from_be_bytes([data[0], data[1]]);
    let is_response = data[2] & 0x80 != 0;
    let qdcount = u16::from_be_bytes([data[4], data[5]]);
    let ancount = u16::from_be_bytes([data[6], data[7]]);
    if qdcount == 0 {
        return None;
    }

    let mut pos = 12;
    let (qname, next) = read_name(data, pos)?;
    pos = next + 4; // qtype + qclass
    if pos > data.len() {
        return None;
    }
    // Further questions are skipped.
    for _ in 1..qdcount {
        let (_, next) = read_name(data, pos)?;
        pos = next + 4;
        if pos > data.len() {
            return None;
        }
    }

    let mut answers = Vec::new();
    for _ in 0..ancount {
        let (_, next) = read_name(data, pos)?;
        pos = next;
        if pos + 10 > data.len() {
            return None;
        }
        let rtype = u16::from_be_bytes([data[pos], data[pos + 1]]);
        let rdlen = u16::from_be_bytes([data[pos + 8], data[pos + 9]]) as usize;
        pos += 10;
        if pos + rdlen > data.len() {
            return None;
        }
        if rtype == TYPE_A && rdlen == 4 {
            answers.push(Ipv4Addr::new(data[pos], data[pos + 1], data[pos + 2], data[pos + 3]));
        }
        pos += rdlen;
    }

    Some(Message { txid, is_response, qname, answers })
}

/// Decode a possibly compressed name starting at `pos`. Returns the folded
/// name and the offset just past the name's in-place encoding.
fn read_name(data: &[u8], mut pos: usize) -> Option<(String, usize)> {
    let mut labels: Vec<String> = Vec::new();
    let mut end_after: Option<usize> = None;
    let mut jumps = 0;

    loop {
        let len = *data.get(pos)? as usize;
        if len & 0xc0 == 0xc0 {
            let low = *data.get(pos + 1)? as usize;
            if end_after.is_none() {
                end_after = Some(pos + 2);
            }
            pos = ((len & 0x3f) << 8) | low;
            jumps += 1;
            if jumps > MAX_POINTER_JUMPS {
                return None;
            }
            continue;
        }
        if len == 0 {
            let end = end_after.unwrap_or(pos + 1);
            return Some((labels.join(".").to_ascii_lowercase(), end));
        }
        if len > 63 {
            return None;
        }
        let bytes = data.get(pos + 1..pos + 1 + len)?;
        labels.push(String::from_utf8_lossy(bytes).into_owned());
        pos += 1 + len;
    }
}
