//! Three-way partition of conversations: service ranges, local gateway,
//! everything else.

use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use super::dns::DnsObservation;
use super::ranges::RangeSet;
use crate::capture::{ConversationStats, Endpoint, FlowKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowLabelKind {
    TeamsService,
    LocalGateway,
    ThirdParty,
    Unknown,
}

impl std::fmt::Display for FlowLabelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FlowLabelKind::TeamsService => "TEAMS_SERVICE",
            FlowLabelKind::LocalGateway => "LOCAL_GATEWAY",
            FlowLabelKind::ThirdParty => "THIRD_PARTY",
            FlowLabelKind::Unknown => "UNKNOWN",
        };
        f.write_str(s)
    }
}

/// Classification of one conversation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowLabel {
    pub key: FlowKey,
    pub label: FlowLabelKind,
    /// Label of the matched range; present exactly for TeamsService.
    pub matched_range: Option<String>,
    /// Names whose DNS answers include the remote address.
    pub dns_names: Vec<String>,
    /// The side treated as remote, when one could be determined.
    pub remote: Option<Endpoint>,
}

/// Pick the remote side of a conversation: the non-client side when the
/// client is known, otherwise whichever side a range or DNS answer points
/// at.
fn remote_side(
    stats: &ConversationStats,
    ranges: &RangeSet,
    dns: &[DnsObservation],
    client_addr: Option<Ipv4Addr>,
) -> Option<Endpoint> {
    if let Some(client) = client_addr {
        if let Some(remote) = stats.remote_of(client) {
            return Some(remote);
        }
    }
    for ep in [stats.endpoint_b(), stats.endpoint_a()] {
        if ranges.contains(ep.addr) {
            return Some(ep);
        }
    }
    for ep in [stats.endpoint_b(), stats.endpoint_a()] {
        if dns.iter().any(|o| o.answers.contains(&ep.addr)) {
            return Some(ep);
        }
    }
    None
}

/// Label every conversation. Each flow gets exactly one label:
/// `TeamsService` iff its remote lies in `ranges`, `LocalGateway` for
/// traffic with the gateway, `ThirdParty` when a remote is known but
/// matches neither, `Unknown` when no side can be called remote.
pub fn classify_flows(
    conversations: &[ConversationStats],
    ranges: &RangeSet,
    dns: &[DnsObservation],
    gateway_addr: Option<Ipv4Addr>,
    client_addr: Option<Ipv4Addr>,
) -> Vec<FlowLabel> {
    conversations
        .iter()
        .map(|stats| {
            let remote = remote_side(stats, ranges, dns, client_addr);
            let names = |addr: Ipv4Addr| {
                let mut v: Vec<String> = dns
                    .iter()
                    .filter(|o| o.answers.contains(&addr))
                    .map(|o| o.query_name.clone())
                    .collect();
                v.sort();
                v.dedup();
                v
            };
            let gateway_flow = gateway_addr
                .map(|gw| stats.addr_a == gw || stats.addr_b == gw)
                .unwrap_or(false);

            let (label, matched_range, dns_names) = match remote {
                Some(ep) => match ranges.match_addr(ep.addr) {
                    Some(range_label) => (
                        FlowLabelKind::TeamsService,
                        Some(range_label.to_string()),
                        names(ep.addr),
                    ),
                    None if gateway_flow => (FlowLabelKind::LocalGateway, None, names(ep.addr)),
                    None => (FlowLabelKind::ThirdParty, None, names(ep.addr)),
                },
                None if gateway_flow => (FlowLabelKind::LocalGateway, None, Vec::new()),
                None => (FlowLabelKind::Unknown, None, Vec::new()),
            };

            FlowLabel { key: stats.key, label, matched_range, dns_names, remote }
        })
        .collect()
}
