//! Synthetic client-side capture of one push-to-talk session.
//!
//! The client talks TLS to a handful of service addresses, resolves the
//! feature's hostname twice through the local gateway, and otherwise only
//! exchanges QUIC-style noise with Google addresses. The nine service flows
//! reproduce a reference conversation table byte for byte: per-direction
//! packet and byte counts, relative start times, and durations all match.
//! Optional contradicting evidence (a SIP packet, direct peer traffic) turns
//! the expected verdict from DETECTED into INCONSISTENT.

use std::net::Ipv4Addr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{DnsTruth, FlowTruth, Manifest};
use super::wire::{dns_query, dns_response, tcp_frame_sized, udp_frame, PcapWriter};

const EPOCH_US: u64 = 1_683_805_000_000_000;
const CLIENT: Ipv4Addr = Ipv4Addr::new(192, 168, 1, 5);
const GATEWAY: Ipv4Addr = Ipv4Addr::new(192, 168, 1, 1);
const PEER: Ipv4Addr = Ipv4Addr::new(192, 168, 1, 7);
const HUB: Ipv4Addr = Ipv4Addr::new(52, 114, 74, 99);

const WT_NAME: &str = "walkietalkie.teams.microsoft.com";
const WT_CNAMES: [&str; 2] = [
    "rtlswt-prod-global.trafficmanager.net",
    "ip-byoip-rtlclstr-prod-weu-01-rtls-wt-hub.westeurope.cloudapp.azure.com",
];

const GOOGLE_A: Ipv4Addr = Ipv4Addr::new(142, 250, 184, 35);
const GOOGLE_B: Ipv4Addr = Ipv4Addr::new(142, 250, 184, 67);
const GOOGLE_C: Ipv4Addr = Ipv4Addr::new(142, 250, 180, 131);

/// Reference conversation rows: client port, remote address, per-direction
/// packet and byte counts, relative start, duration.
#[allow(clippy::type_complexity)]
const FLOWS: [(u16, Ipv4Addr, u64, u64, u64, u64, &str, &str); 9] = [
    (48_851, Ipv4Addr::new(52, 114, 104, 172), 3, 433, 2, 250, "0.727369", "0.0779"),
    (38_078, Ipv4Addr::new(52, 114, 77, 33), 21, 20_000, 13, 2_538, "0.945041", "24.5994"),
    (42_429, HUB, 4, 354, 3, 225, "8.592562", "0.0777"),
    (42_428, HUB, 15, 2_501, 18, 3_528, "8.633261", "14.3282"),
    (37_038, Ipv4Addr::new(52, 114, 74, 97), 4, 620, 2, 624, "8.637498", "14.2181"),
    (42_472, HUB, 17, 4_186, 14, 7_265, "8.988481", "13.7996"),
    (42_473, HUB, 14, 3_944, 13, 7_214, "22.991771", "15.8236"),
    (46_095, Ipv4Addr::new(52, 114, 74, 181), 1, 330, 2, 443, "28.710377", "0.1775"),
    (42_433, Ipv4Addr::new(52, 114, 74, 211), 2, 172, 1, 101, "30.795856", "0.0316"),
];

const DNS_RELS: [(u16, u64, u64); 2] = [
    (0x0ed9, 8_874_450, 8_973_114),
    (0x683f, 22_924_822, 22_986_687),
];

#[derive(Debug, Clone)]
pub struct WtSessionSpec {
    pub seed: u64,
    /// Plant one SIP packet, contradicting the no-SIP expectation.
    pub include_sip_packet: bool,
    /// Plant direct client-to-peer datagrams, contradicting cloud relaying.
    pub include_peer_traffic: bool,
}

impl Default for WtSessionSpec {
    fn default() -> Self {
        WtSessionSpec { seed: 1, include_sip_packet: false, include_peer_traffic: false }
    }
}

fn split_bytes(total: u64, packets: u64) -> Vec<usize> {
    let base = total / packets;
    let rem = (total % packets) as usize;
    (0..packets as usize)
        .map(|i| {
            let size = base as usize + usize::from(i < rem);
            debug_assert!((54..=1514).contains(&size));
            size
        })
        .collect()
}

/// Interleave the two directions so transmission stays roughly proportional
/// and the first packet always comes from the client. `true` means
/// client to remote.
fn direction_order(ab: u64, ba: u64) -> Vec<bool> {
    let mut order = Vec::with_capacity((ab + ba) as usize);
    let (mut a, mut b) = (0u64, 0u64);
    for _ in 0..ab + ba {
        let take_a = a < ab && (b >= ba || a * ba <= b * ab);
        order.push(take_a);
        if take_a {
            a += 1;
        } else {
            b += 1;
        }
    }
    order
}

fn parse_rel_us(text: &str) -> u64 {
    let (secs, frac) = text.split_once('.').expect("table literals carry decimals");
    let micros = format!("{frac:0<6}");
    secs.parse::<u64>().unwrap() * 1_000_000 + micros.parse::<u64>().unwrap()
}

/// Generate the capture and its ground truth. Same spec, same bytes.
pub fn gen_wt_capture(spec: &WtSessionSpec) -> (Vec<u8>, Manifest) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut events: Vec<(u64, Vec<u8>)> = Vec::new();
    let mut push = |rel_us: u64, frame: Vec<u8>| events.push((rel_us, frame));

    // Background noise: QUIC-style chatter with Google addresses. The first
    // datagram anchors the capture clock at relative zero.
    let noise = [
        (GOOGLE_A, 51_000u16, [0u64, 5_000_000, 20_000_000]),
        (GOOGLE_B, 51_001, [2_500_000, 26_000_000, 33_500_000]),
        (GOOGLE_C, 51_002, [14_000_000, 33_000_000, 36_200_000]),
    ];
    for (addr, sport, rels) in noise {
        for rel in rels {
            let out_len = rng.gen_range(100..1200);
            let back_len = rng.gen_range(100..1200);
            push(rel, udp_frame(CLIENT, addr, sport, 443, &vec![0xA5; out_len]));
            push(rel + 30_000, udp_frame(addr, CLIENT, 443, sport, &vec![0x5A; back_len]));
        }
    }
    let google_txid: u16 = rng.gen();
    push(2_400_000, udp_frame(CLIENT, GATEWAY, 50_734, 53, &dns_query(google_txid, "www.google.com")));
    push(
        2_450_000,
        udp_frame(GATEWAY, CLIENT, 53, 50_734, &dns_response(google_txid, "www.google.com", &[], &[GOOGLE_B])),
    );

    let mut manifest = Manifest::new("WT_SESSION", spec.seed);
    manifest.peer_addr = Some(PEER);

    for (i, (txid, q_rel, r_rel)) in DNS_RELS.into_iter().enumerate() {
        let sport = 50_735 + i as u16;
        push(q_rel, udp_frame(CLIENT, GATEWAY, sport, 53, &dns_query(txid, WT_NAME)));
        push(
            r_rel,
            udp_frame(GATEWAY, CLIENT, 53, sport, &dns_response(txid, WT_NAME, &WT_CNAMES, &[HUB])),
        );
        manifest.dns_queries.push(DnsTruth {
            query_name: WT_NAME.to_string(),
            ts_rel: r_rel as f64 / 1e6,
            answers: vec![HUB],
        });
    }

    for (i, (port_a, remote, pkts_ab, bytes_ab, pkts_ba, bytes_ba, rel, dur)) in
        FLOWS.into_iter().enumerate()
    {
        let rel_us = parse_rel_us(rel);
        let dur_us = parse_rel_us(dur);
        let sizes_ab = split_bytes(bytes_ab, pkts_ab);
        let sizes_ba = split_bytes(bytes_ba, pkts_ba);
        let order = direction_order(pkts_ab, pkts_ba);
        let n = order.len() as u64;
        let fill = 0xC0 ^ i as u8;

        let (mut sent_ab, mut sent_ba) = (0usize, 0usize);
        let (mut seq_ab, mut seq_ba) = (0u32, 0u32);
        for (j, &client_side) in order.iter().enumerate() {
            let ts = rel_us + (j as u64 * dur_us + (n - 1) / 2) / (n - 1);
            let frame = if client_side {
                let size = sizes_ab[sent_ab];
                sent_ab += 1;
                let f = tcp_frame_sized(CLIENT, remote, port_a, 443, seq_ab, size, fill);
                seq_ab += (size - 54) as u32;
                f
            } else {
                let size = sizes_ba[sent_ba];
                sent_ba += 1;
                let f = tcp_frame_sized(remote, CLIENT, 443, port_a, seq_ba, size, fill);
                seq_ba += (size - 54) as u32;
                f
            };
            push(ts, frame);
        }

        manifest.flows.push(FlowTruth {
            addr_a: CLIENT,
            port_a,
            addr_b: remote,
            port_b: 443,
            packets: pkts_ab + pkts_ba,
            bytes: bytes_ab + bytes_ba,
            packets_ab: pkts_ab,
            bytes_ab,
            packets_ba: pkts_ba,
            bytes_ba,
            rel_start: rel.to_string(),
            duration: dur.to_string(),
        });
    }

    if spec.include_sip_packet {
        let invite = b"INVITE sip:+390415932000@10.8.6.10 SIP/2.0\r\nCall-ID: planted@lab\r\n\r\n";
        push(15_000_000, udp_frame(CLIENT, Ipv4Addr::new(10, 8, 6, 10), 5_070, 5_060, invite));
        manifest.sip_packets = 1;
    }
    if spec.include_peer_traffic {
        for k in 0..4u64 {
            let (src, dst) = if k % 2 == 0 { (CLIENT, PEER) } else { (PEER, CLIENT) };
            push(12_000_000 + k * 200_000, udp_frame(src, dst, 47_200, 47_200, &[0x33; 64]));
        }
    }
    manifest.expected_verdict = Some(
        if spec.include_sip_packet || spec.include_peer_traffic {
            "INCONSISTENT"
        } else {
            "DETECTED"
        }
        .to_string(),
    );

    events.sort_by_key(|&(rel_us, _)| rel_us);
    let mut writer = PcapWriter::new(Vec::new()).expect("in-memory write cannot fail");
    for (rel_us, frame) in &events {
        writer.record(EPOCH_US + rel_us, frame).expect("in-memory write cannot fail");
    }
    (writer.into_inner(), manifest)
}
