//! Grouping debug-recording frames into deduplicated RTP streams.

use std::collections::HashSet;
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::acdr::{AcdrFrame, AcdrMediaType};
use super::rtp::{parse_rtp, RtpPacket, RtpParseError};

/// Identity of one media stream inside a debug recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub ssrc: u32,
    pub trace_pt: u8,
    pub src_id: u8,
    pub payload_type: u8,
}

impl std::fmt::Display for StreamKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ssrc={:#010x} trace_pt={} src_id={} pt={}",
            self.ssrc, self.trace_pt, self.src_id, self.payload_type
        )
    }
}

/// A sequence gap: `missing_count` packets absent after `after_seq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqGap {
    pub after_seq: u16,
    pub missing_count: u64,
}

/// One deduplicated stream. `packets` stays in arrival order.
#[derive(Debug, Clone)]
pub struct RtpStream {
    pub key: StreamKey,
    pub packets: Vec<RtpPacket>,
    pub duplicates_removed: u64,
    pub gaps: Vec<SeqGap>,
}

impl RtpStream {
    /// Total payload bytes across the deduplicated packets.
    pub fn payload_bytes(&self) -> usize {
        self.packets.iter().map(|p| p.payload.len()).sum()
    }
}

/// Parse RTP out of the selected frames and group into streams.
///
/// Duplicates (repeated sequence number within one stream) are dropped and
/// counted; a stream outliving the 16-bit sequence space would see its
/// second cycle reported as duplicates. Gap positions honor wraparound.
/// Streams come back in first-seen order; parse failures are collected, not
/// fatal.
pub fn enumerate_streams<S>(frames: &[AcdrFrame], selector: S) -> (Vec<RtpStream>, Vec<RtpParseError>)
where
    S: Fn(u8, u8) -> bool,
{
    struct Acc {
        packets: Vec<RtpPacket>,
        seen: HashSet<u16>,
        duplicates: u64,
    }

    let mut accs: IndexMap<StreamKey, Acc> = IndexMap::new();
    let mut errors = Vec::new();

    for frame in frames {
        if frame.media_type != AcdrMediaType::Rtp || !selector(frame.trace_pt, frame.src_id) {
            continue;
        }
        let packet = match parse_rtp(&frame.payload, frame.arrival_us) {
            Ok(p) => p,
            Err(e) => {
                errors.push(e);
                continue;
            }
        };
        let key = StreamKey {
            ssrc: packet.ssrc,
            trace_pt: frame.trace_pt,
            src_id: frame.src_id,
            payload_type: packet.payload_type,
        };
        let acc = accs.entry(key).or_insert_with(|| Acc {
            packets: Vec::new(),
            seen: HashSet::new(),
            duplicates: 0,
        });
        if acc.seen.insert(packet.seq) {
            acc.packets.push(packet);
        } else {
            acc.duplicates += 1;
        }
    }

    let streams = accs
        .into_iter()
        .map(|(key, acc)| {
            let gaps = find_gaps(&acc.packets);
            RtpStream {
                key,
                packets: acc.packets,
                duplicates_removed: acc.duplicates,
                gaps,
            }
        })
        .collect();
    (streams, errors)
}

/// Extend 16-bit sequence numbers into a monotonic space. Packets come in
/// arrival order; each step takes the signed 16-bit difference from the
/// previous value, so wraparound and bounded reordering both land where
/// they belong.
pub fn extended_seqs(packets: &[RtpPacket]) -> Vec<i64> {
    let mut out = Vec::with_capacity(packets.len());
    let mut last_seq = 0u16;
    let mut last_ext = 0i64;
    for (i, p) in packets.iter().enumerate() {
        if i == 0 {
            last_seq = p.seq;
            last_ext = p.seq as i64;
        } else {
            let delta = p.seq.wrapping_sub(last_seq) as i16 as i64;
            last_ext += delta;
            last_seq = p.seq;
        }
        out.push(last_ext);
    }
    out
}

fn find_gaps(packets: &[RtpPacket]) -> Vec<SeqGap> {
    let mut exts: Vec<(i64, u16)> = extended_seqs(packets)
        .into_iter()
        .zip(packets.iter().map(|p| p.seq))
        .collect();
    exts.sort_unstable();
    let mut gaps = Vec::new();
    for w in exts.windows(2) {
        let missing = w[1].0 - w[0].0 - 1;
        if missing > 0 {
            gaps.push(SeqGap { after_seq: w[0].1, missing_count: missing as u64 });
        }
    }
    gaps
}

fn codec_name(payload_type: u8) -> String {
    match payload_type {
        0 => "G.711 mu-law".into(),
        8 => "G.711 A-law".into(),
        9 => "G.722 (not decoded)".into(),
        18 => "G.729 (not decoded)".into(),
        pt => format!("dynamic/unknown (PT {pt})"),
    }
}

/// Human-readable inventory of the streams found in a recording.
pub fn stream_inventory(streams: &[RtpStream], parse_errors: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "streams: {}", streams.len());
    for s in streams {
        let _ = writeln!(
            out,
            "  {} packets={} duplicates_removed={} gaps={} codec={}",
            s.key,
            s.packets.len(),
            s.duplicates_removed,
            s.gaps.len(),
            codec_name(s.key.payload_type),
        );
        for g in &s.gaps {
            let _ = writeln!(out, "    gap after seq {}: {} missing", g.after_seq, g.missing_count);
        }
    }
    if parse_errors > 0 {
        let _ = writeln!(out, "rtp parse failures: {parse_errors}");
    }
    out
}
