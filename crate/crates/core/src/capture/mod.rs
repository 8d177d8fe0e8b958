//! Packet-capture ingestion and flow statistics.
//!
//! Reads classic pcap files (both endiannesses, microsecond or nanosecond
//! magic), dissects Ethernet II / Linux cooked frames down to UDP/TCP, and
//! aggregates bidirectional conversation statistics keyed by canonical flow.

mod cidr;
mod dissect;
mod flow;
mod pcap;

pub use cidr::{CidrError, CidrRange};
pub use flow::{
    build_conversations, build_conversations_filtered, conversations_to_csv, ConversationStats,
    Endpoint, FlowKey,
};
pub use pcap::{open_capture, CaptureCounters, CaptureError, CaptureReader};

use std::net::Ipv4Addr;

/// Transport protocol of an IPv4 packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum IpProto {
    Tcp,
    Udp,
    Other,
}

impl std::fmt::Display for IpProto {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IpProto::Tcp => write!(f, "TCP"),
            IpProto::Udp => write!(f, "UDP"),
            IpProto::Other => write!(f, "OTHER"),
        }
    }
}

/// IPv4 layer of a dissected packet. Ports are present exactly when the
/// transport is TCP or UDP and its header was intact.
#[derive(Debug, Clone)]
pub struct IpLayer {
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub proto: IpProto,
    pub src_port: Option<u16>,
    pub dst_port: Option<u16>,
    /// Transport payload (IP payload when proto is `Other`).
    pub payload: Vec<u8>,
}

/// One captured frame, normalized. Link or IP fields are absent when the
/// corresponding layer could not be parsed; the reader counts those cases.
#[derive(Debug, Clone)]
pub struct PacketRecord {
    /// Ordinal within the capture, assigned in file order starting at 0.
    pub index: u64,
    /// Capture timestamp, microseconds since the epoch.
    pub ts_us: u64,
    pub src_mac: Option<[u8; 6]>,
    pub dst_mac: Option<[u8; 6]>,
    pub ip: Option<IpLayer>,
    /// Original length on the wire (may exceed the captured slice).
    pub wire_len: u32,
}

impl PacketRecord {
    pub fn src_endpoint(&self) -> Option<Endpoint> {
        let ip = self.ip.as_ref()?;
        Some(Endpoint { addr: ip.src_ip, port: ip.src_port? })
    }

    pub fn dst_endpoint(&self) -> Option<Endpoint> {
        let ip = self.ip.as_ref()?;
        Some(Endpoint { addr: ip.dst_ip, port: ip.dst_port? })
    }

    /// True when the packet has a complete UDP/TCP 5-tuple.
    pub fn has_five_tuple(&self) -> bool {
        self.src_endpoint().is_some() && self.dst_endpoint().is_some()
    }

    pub fn involves(&self, addr: Ipv4Addr) -> bool {
        self.ip
            .as_ref()
            .map(|ip| ip.src_ip == addr || ip.dst_ip == addr)
            .unwrap_or(false)
    }
}
