use std::collections::HashMap;
use std::io::Write;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use super::{IpProto, PacketRecord};

/// One side of a flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub addr: Ipv4Addr,
    pub port: u16,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.addr, self.port)
    }
}

/// Direction-independent flow identity. Construction orders the endpoints so
/// that `a` is the smaller (address, port) pair, making the key identical for
/// both directions of the same conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowKey {
    pub a: Endpoint,
    pub b: Endpoint,
    pub proto: IpProto,
}

impl FlowKey {
    pub fn new(x: Endpoint, y: Endpoint, proto: IpProto) -> FlowKey {
        if x <= y {
            FlowKey { a: x, b: y, proto }
        } else {
            FlowKey { a: y, b: x, proto }
        }
    }

    pub fn from_packet(p: &PacketRecord) -> Option<FlowKey> {
        let src = p.src_endpoint()?;
        let dst = p.dst_endpoint()?;
        Some(FlowKey::new(src, dst, p.ip.as_ref()?.proto))
    }
}

impl std::fmt::Display for FlowKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} <-> {}", self.proto, self.a, self.b)
    }
}

/// Aggregated bidirectional statistics for one conversation. The displayed
/// "A" side is the endpoint that sent the first observed packet, matching the
/// packet-analyzer convention the published tables use; `key` stays canonical
/// for grouping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConversationStats {
    pub key: FlowKey,
    pub addr_a: Ipv4Addr,
    pub port_a: u16,
    pub addr_b: Ipv4Addr,
    pub port_b: u16,
    pub packets_total: u64,
    pub bytes_total: u64,
    pub packets_ab: u64,
    pub bytes_ab: u64,
    pub packets_ba: u64,
    pub bytes_ba: u64,
    /// Seconds from the first packet of the whole capture.
    pub rel_start: f64,
    /// Seconds between the conversation's first and last packet.
    pub duration: f64,
}

impl ConversationStats {
    pub fn endpoint_a(&self) -> Endpoint {
        Endpoint { addr: self.addr_a, port: self.port_a }
    }

    pub fn endpoint_b(&self) -> Endpoint {
        Endpoint { addr: self.addr_b, port: self.port_b }
    }

    /// The non-`client` side, when one side is the given address.
    pub fn remote_of(&self, client: Ipv4Addr) -> Option<Endpoint> {
        if self.addr_a == client {
            Some(self.endpoint_b())
        } else if self.addr_b == client {
            Some(self.endpoint_a())
        } else {
            None
        }
    }
}

struct Acc {
    first_src: Endpoint,
    first_ts: u64,
    last_ts: u64,
    packets_ab: u64,
    bytes_ab: u64,
    packets_ba: u64,
    bytes_ba: u64,
}

/// Group packets with complete 5-tuples into per-flow conversation statistics.
/// `rel_start` is measured from the first packet of the capture, including
/// packets the filter rejects.
pub fn build_conversations_filtered<'a, I, F>(packets: I, mut filter: F) -> Vec<ConversationStats>
where
    I: IntoIterator<Item = &'a PacketRecord>,
    F: FnMut(&PacketRecord) -> bool,
{
    let mut capture_t0: Option<u64> = None;
    let mut accs: HashMap<FlowKey, Acc> = HashMap::new();

    for p in packets {
        if capture_t0.is_none() {
            capture_t0 = Some(p.ts_us);
        }
        if !filter(p) {
            continue;
        }
        let (src, dst, key) = match (p.src_endpoint(), p.dst_endpoint(), FlowKey::from_packet(p)) {
            (Some(s), Some(d), Some(k)) => (s, d, k),
            _ => continue,
        };
        let _ = dst;
        let wire = p.wire_len as u64;
        let acc = accs.entry(key).or_insert_with(|| Acc {
            first_src: src,
            first_ts: p.ts_us,
            last_ts: p.ts_us,
            packets_ab: 0,
            bytes_ab: 0,
            packets_ba: 0,
            bytes_ba: 0,
        });
        acc.last_ts = acc.last_ts.max(p.ts_us);
        if src == acc.first_src {
            acc.packets_ab += 1;
            acc.bytes_ab += wire;
        } else {
            acc.packets_ba += 1;
            acc.bytes_ba += wire;
        }
    }

    let t0 = capture_t0.unwrap_or(0);
    let mut stats: Vec<ConversationStats> = accs
        .into_iter()
        .map(|(key, acc)| {
            let first_dst = if acc.first_src == key.a { key.b } else { key.a };
            ConversationStats {
                key,
                addr_a: acc.first_src.addr,
                port_a: acc.first_src.port,
                addr_b: first_dst.addr,
                port_b: first_dst.port,
                packets_total: acc.packets_ab + acc.packets_ba,
                bytes_total: acc.bytes_ab + acc.bytes_ba,
                packets_ab: acc.packets_ab,
                bytes_ab: acc.bytes_ab,
                packets_ba: acc.packets_ba,
                bytes_ba: acc.bytes_ba,
                rel_start: (acc.first_ts.saturating_sub(t0)) as f64 / 1e6,
                duration: (acc.last_ts - acc.first_ts) as f64 / 1e6,
            }
        })
        .collect();
    stats.sort_by(|x, y| {
        x.rel_start
            .partial_cmp(&y.rel_start)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.key.cmp(&y.key))
    });
    stats
}

pub fn build_conversations<'a, I>(packets: I) -> Vec<ConversationStats>
where
    I: IntoIterator<Item = &'a PacketRecord>,
{
    build_conversations_filtered(packets, |_| true)
}

/// Serialize a conversation table as CSV in the column order the published
/// session tables use.
pub fn conversations_to_csv<W: Write>(stats: &[ConversationStats], w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "Address A",
        "Port A",
        "Address B",
        "Port B",
        "Packets",
        "Bytes",
        "Packets A → B",
        "Bytes A → B",
        "Packets B → A",
        "Bytes B → A",
        "Rel Start",
        "Duration",
    ])?;
    for s in stats {
        wtr.write_record([
            s.addr_a.to_string(),
            s.port_a.to_string(),
            s.addr_b.to_string(),
            s.port_b.to_string(),
            s.packets_total.to_string(),
            s.bytes_total.to_string(),
            s.packets_ab.to_string(),
            s.bytes_ab.to_string(),
            s.packets_ba.to_string(),
            s.bytes_ba.to_string(),
            format!("{:.6}", s.rel_start),
            format!("{:.4}", s.duration),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
