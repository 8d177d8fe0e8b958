//! Scenario specifications and ground-truth manifests.
//!
//! Every generator takes a spec (seed included) and returns artifact bytes
//! plus a manifest describing exactly what was written: stream keys and
//! tones, dialog call-ids and message counts, call outcomes, usage totals,
//! flow packet and byte counts. The same spec always yields the same bytes,
//! so the manifest doubles as a machine-checkable oracle.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MANIFEST_SCHEMA: &str = "manifest/v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InvalidSpec {
    #[error("{0}")]
    Reason(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> InvalidSpec {
    InvalidSpec::Reason(msg.into())
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Invalid(#[from] InvalidSpec),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToneSegment {
    pub freq_hz: f64,
    pub start_sample: u64,
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GapTruth {
    /// Sequence number after which packets are missing.
    pub after_seq: u16,
    pub missing: u16,
    pub silence_start_sample: u64,
    pub silence_samples: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StreamTruth {
    pub trace_pt: u8,
    pub src_id: u8,
    pub ssrc: u32,
    pub payload_type: u8,
    pub selected: bool,
    /// Distinct packets on the wire, not counting injected duplicates.
    pub packets: u64,
    pub duplicates: u64,
    pub seq_start: u16,
    /// Offset of the stream's first sample from the session start.
    pub start_offset_samples: u64,
    pub total_samples: u64,
    /// Source tone segments, before any packet loss. To reconstruct the
    /// expected audio, synthesize these and then zero the gap region.
    pub tones: Vec<ToneSegment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapTruth>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StereoTruth {
    /// (trace_pt, src_id) of the stream on each channel.
    pub channel_a: (u8, u8),
    pub channel_b: (u8, u8),
    pub sample_rate: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FlowTruth {
    pub addr_a: Ipv4Addr,
    pub port_a: u16,
    pub addr_b: Ipv4Addr,
    pub port_b: u16,
    pub packets: u64,
    pub bytes: u64,
    pub packets_ab: u64,
    pub bytes_ab: u64,
    pub packets_ba: u64,
    pub bytes_ba: u64,
    /// Rendered with the table's precision: six and four decimals.
    pub rel_start: String,
    pub duration: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DnsTruth {
    pub query_name: String,
    pub ts_rel: f64,
    pub answers: Vec<Ipv4Addr>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DialogTruth {
    pub call_id: String,
    pub messages: u64,
    pub completeness: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LogStats {
    pub records: u64,
    pub sip_records: u64,
    pub noise_records: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CdrTruth {
    pub legs: u64,
    pub calls: u64,
    pub orphans: u64,
    pub by_outcome: BTreeMap<String, u64>,
    pub by_direction: BTreeMap<String, u64>,
    pub total_duration_secs: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UsageWindowTruth {
    pub users: u64,
    pub one_to_one_calls: u64,
    pub audio_seconds: u64,
    pub video_seconds: u64,
    pub avg_audio_hours: u64,
    pub avg_video_hours: u64,
    pub device_counts: BTreeMap<String, u64>,
    pub pstn_calls: u64,
    pub pstn_seconds: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RankedTruth {
    pub user_id: String,
    pub audio_time: String,
    pub video_time: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct UsageTruth {
    pub windows: BTreeMap<String, UsageWindowTruth>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub top_audio: Vec<RankedTruth>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub schema: String,
    pub scenario: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub streams: Vec<StreamTruth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stereo: Option<StereoTruth>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flows: Vec<FlowTruth>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dns_queries: Vec<DnsTruth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_verdict: Option<String>,
    #[serde(default)]
    pub sip_packets: u64,
    /// Conversation partner whose absence from the wire the capture is
    /// supposed to demonstrate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peer_addr: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dialogs: Vec<DialogTruth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_stats: Option<LogStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdr: Option<CdrTruth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<UsageTruth>,
}

impl Manifest {
    pub fn new(scenario: &str, seed: u64) -> Self {
        Manifest {
            schema: MANIFEST_SCHEMA.to_string(),
            scenario: scenario.to_string(),
            seed,
            streams: Vec::new(),
            stereo: None,
            flows: Vec::new(),
            dns_queries: Vec::new(),
            expected_verdict: None,
            sip_packets: 0,
            peer_addr: None,
            dialogs: Vec::new(),
            log_stats: None,
            cdr: None,
            usage: None,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Manifest, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Synthesize the waveform a manifest's tone list describes: each segment is
/// a sine at `freq_hz`, phase-locked to the stream's own sample clock so a
/// segment starting at sample `s` begins at phase `2*pi*f*s/rate`. Samples
/// outside every segment are silence. Phase locking matters because packet
/// loss removes samples from the middle of a stream without shifting the
/// phase of what follows.
pub fn tone_samples(tones: &[ToneSegment], total_samples: u64, sample_rate: u32) -> Vec<i16> {
    const AMPLITUDE: f64 = 12_000.0;
    let mut out = vec![0i16; total_samples as usize];
    for seg in tones {
        for n in 0..seg.samples {
            let idx = (seg.start_sample + n) as usize;
            if idx >= out.len() {
                break;
            }
            let t = idx as f64 / sample_rate as f64;
            out[idx] = (AMPLITUDE * (2.0 * std::f64::consts::PI * seg.freq_hz * t).sin()) as i16;
        }
    }
    out
}

/// Pearson correlation over the overlapping prefix of two sample buffers.
/// Returns 0 when either side has no variance.
pub fn pearson(a: &[i16], b: &[i16]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let mean = |s: &[i16]| s.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let (ma, mb) = (mean(&a[..n]), mean(&b[..n]));
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for i in 0..n {
        let da = a[i] as f64 - ma;
        let db = b[i] as f64 - mb;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return 0.0;
    }
    cov / (var_a.sqrt() * var_b.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifests_round_trip_through_json() {
        let mut m = Manifest::new("PSTN_CALL", 7);
        m.streams.push(StreamTruth {
            trace_pt: 35,
            src_id: 36,
            ssrc: 0x1234,
            payload_type: 0,
            selected: true,
            packets: 50,
            duplicates: 2,
            seq_start: 100,
            start_offset_samples: 0,
            total_samples: 8_000,
            tones: vec![ToneSegment { freq_hz: 440.0, start_sample: 0, samples: 8_000 }],
            gap: None,
        });
        let text = m.to_json_string();
        assert!(text.starts_with("{\n"));
        assert!(text.ends_with('\n'));
        let back = Manifest::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.schema, MANIFEST_SCHEMA);
    }

    #[test]
    fn tone_synthesis_is_silent_outside_segments() {
        let tones = vec![ToneSegment { freq_hz: 440.0, start_sample: 100, samples: 200 }];
        let wave = tone_samples(&tones, 400, 8_000);
        assert_eq!(wave.len(), 400);
        assert!(wave[..100].iter().all(|&s| s == 0));
        assert!(wave[300..].iter().all(|&s| s == 0));
        assert!(wave[100..300].iter().any(|&s| s.unsigned_abs() > 8_000));
    }

    #[test]
    fn tone_phase_is_locked_to_the_sample_clock() {
        let tones = vec![
            ToneSegment { freq_hz: 440.0, start_sample: 0, samples: 50 },
            ToneSegment { freq_hz: 440.0, start_sample: 80, samples: 120 },
        ];
        let gapped = tone_samples(&tones, 200, 8_000);
        let solid = tone_samples(
            &[ToneSegment { freq_hz: 440.0, start_sample: 0, samples: 200 }],
            200,
            8_000,
        );
        assert_eq!(&gapped[80..], &solid[80..]);
        assert!(gapped[50..80].iter().all(|&s| s == 0));
    }

    #[test]
    fn pearson_behaves_at_the_edges() {
        let wave = tone_samples(
            &[ToneSegment { freq_hz: 440.0, start_sample: 0, samples: 800 }],
            800,
            8_000,
        );
        assert!((pearson(&wave, &wave) - 1.0).abs() < 1e-12);
        let inverted: Vec<i16> = wave.iter().map(|&s| -s).collect();
        assert!((pearson(&wave, &inverted) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&wave, &vec![0i16; 800]), 0.0);
        assert_eq!(pearson(&[], &[]), 0.0);
    }
}
