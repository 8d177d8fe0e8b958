//! Walkie-Talkie detection from capture evidence: DNS fingerprint, TLS
//! flows into the service ranges, SIP absence, and no direct peer traffic.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dns::{extract_dns, DnsObservation};
use super::ranges::RangeSet;
use super::sip_scan::detect_sip;
use crate::capture::{build_conversations, FlowKey, IpProto, PacketRecord};

pub const WT_REPORT_SCHEMA: &str = "wt-report/v1";
pub const DEFAULT_WT_NAME: &str = "walkietalkie.teams.microsoft.com";
pub const DEFAULT_IDLE_GAP_US: u64 = 30_000_000;

#[derive(Debug, Error)]
pub enum WtError {
    #[error("client address {0} appears in no packet")]
    ClientNotSeen(Ipv4Addr),
}

/// How DNS query names are matched against the app's fingerprint name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameMatch {
    Exact,
    /// Accept the name itself and any subdomain of it.
    Suffix,
}

#[derive(Debug, Clone)]
pub struct WtOptions {
    pub wt_name: String,
    pub name_match: NameMatch,
    /// Idle time that separates two sessions, microseconds.
    pub idle_gap_us: u64,
    /// Known conversation partner; any direct client↔peer packet
    /// contradicts cloud-relayed push-to-talk.
    pub peer_addr: Option<Ipv4Addr>,
}

impl Default for WtOptions {
    fn default() -> Self {
        WtOptions {
            wt_name: DEFAULT_WT_NAME.to_string(),
            name_match: NameMatch::Exact,
            idle_gap_us: DEFAULT_IDLE_GAP_US,
            peer_addr: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WtVerdict {
    Detected,
    NotDetected,
    Inconsistent,
}

impl std::fmt::Display for WtVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WtVerdict::Detected => "DETECTED",
            WtVerdict::NotDetected => "NOT_DETECTED",
            WtVerdict::Inconsistent => "INCONSISTENT",
        };
        f.write_str(s)
    }
}

/// One burst of service flows, bounded by the idle gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WtSession {
    /// Seconds from the first packet of the capture.
    pub start: f64,
    pub end: f64,
    pub flows: Vec<FlowKey>,
    /// Remote addresses that DNS resolved from the app's name.
    pub wt_hub_addrs: Vec<Ipv4Addr>,
    /// App-name DNS lookups within one idle gap of the session.
    pub dns_hits: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WtReport {
    pub schema: String,
    pub client_addr: Ipv4Addr,
    pub verdict: WtVerdict,
    pub sessions: Vec<WtSession>,
    pub sip_packets_found: u64,
    pub sip_exemplars: Vec<u64>,
    pub peer_direct_traffic_found: bool,
    pub notes: Vec<String>,
}

impl WtReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn name_matches(name: &str, options: &WtOptions) -> bool {
    match options.name_match {
        NameMatch::Exact => name == options.wt_name,
        NameMatch::Suffix => {
            name == options.wt_name || name.ends_with(&format!(".{}", options.wt_name))
        }
    }
}

/// Run the whole methodology over one capture.
pub fn detect_walkie_talkie(
    packets: &[PacketRecord],
    client_addr: Ipv4Addr,
    ranges: &RangeSet,
    options: &WtOptions,
) -> Result<WtReport, WtError> {
    if !packets.iter().any(|p| p.involves(client_addr)) {
        return Err(WtError::ClientNotSeen(client_addr));
    }
    let t0 = packets.first().map(|p| p.ts_us).unwrap_or(0);
    let rel = |ts_us: u64| (ts_us.saturating_sub(t0)) as f64 / 1e6;

    let (dns_obs, _) = extract_dns(packets);
    let wt_obs: Vec<&DnsObservation> = dns_obs
        .iter()
        .filter(|o| name_matches(&o.query_name, options))
        .collect();
    let wt_addrs: BTreeSet<Ipv4Addr> = wt_obs.iter().flat_map(|o| o.answers.iter().copied()).collect();

    let conversations = build_conversations(packets);
    let mut notes = Vec::new();
    let mut candidates = Vec::new();
    for stats in &conversations {
        let Some(remote) = stats.remote_of(client_addr) else { continue };
        if !ranges.contains(remote.addr) {
            continue;
        }
        match stats.key.proto {
            IpProto::Tcp if remote.port == 443 => candidates.push((stats, remote)),
            IpProto::Udp => notes.push(format!(
                "unclassified media candidate: UDP flow {} into service ranges",
                stats.key
            )),
            _ => {}
        }
    }

    let gap_s = options.idle_gap_us as f64 / 1e6;
    let mut sessions: Vec<WtSession> = Vec::new();
    let mut hub_flow_seen = false;
    for (stats, remote) in &candidates {
        let start = stats.rel_start;
        let end = stats.rel_start + stats.duration;
        let is_hub = wt_addrs.contains(&remote.addr);
        hub_flow_seen |= is_hub;
        match sessions.last_mut() {
            Some(s) if start <= s.end + gap_s => {
                s.end = s.end.max(end);
                s.flows.push(stats.key);
                if is_hub && !s.wt_hub_addrs.contains(&remote.addr) {
                    s.wt_hub_addrs.push(remote.addr);
                }
            }
            _ => sessions.push(WtSession {
                start,
                end,
                flows: vec![stats.key],
                wt_hub_addrs: if is_hub { vec![remote.addr] } else { Vec::new() },
                dns_hits: 0,
            }),
        }
    }
    for s in &mut sessions {
        s.dns_hits = wt_obs
            .iter()
            .filter(|o| {
                let t = rel(o.ts_us);
                t >= s.start - gap_s && t <= s.end + gap_s
            })
            .count() as u64;
    }

    let sip = detect_sip(packets);
    let peer_direct = options
        .peer_addr
        .map(|peer| {
            packets.iter().any(|p| {
                p.ip.as_ref()
                    .map(|ip| {
                        (ip.src_ip == client_addr && ip.dst_ip == peer)
                            || (ip.src_ip == peer && ip.dst_ip == client_addr)
                    })
                    .unwrap_or(false)
            })
        })
        .unwrap_or(false);

    let name_indicator = !wt_obs.is_empty() || hub_flow_seen;
    let verdict = if name_indicator && !sessions.is_empty() {
        if sip.count == 0 && !peer_direct {
            WtVerdict::Detected
        } else {
            WtVerdict::Inconsistent
        }
    } else {
        if name_indicator && sessions.is_empty() {
            notes.push(format!(
                "DNS lookup for {} observed, but no service flows followed",
                options.wt_name
            ));
        }
        if !name_indicator && !sessions.is_empty() {
            notes.push("service-range flows present without the app's DNS fingerprint".to_string());
        }
        WtVerdict::NotDetected
    };

    Ok(WtReport {
        schema: WT_REPORT_SCHEMA.to_string(),
        client_addr,
        verdict,
        sessions,
        sip_packets_found: sip.count,
        sip_exemplars: sip.exemplars,
        peer_direct_traffic_found: peer_direct,
        notes,
    })
}
