//! Synthetic gateway debug-recording capture for one two-party PSTN call.
//!
//! The capture carries four G.711 streams wrapped in debug-recording frames
//! on UDP port 925: the two legs of the call under test plus two bystander
//! streams that a correct trace-point selector must leave alone. One leg
//! begins near the top of the 16-bit sequence space so extraction has to
//! survive wraparound; the other loses a configurable run of packets and
//! gains seeded duplicates.

use std::collections::HashSet;
use std::ops::Range;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::media::{
    encode_acdr, encode_rtp, encode_sample, AcdrFrame, AcdrMediaType, Law, ACDR_DEFAULT_PORT,
    G711_SAMPLE_RATE,
};

use super::scenario::{
    invalid, tone_samples, GapTruth, InvalidSpec, Manifest, StereoTruth, StreamTruth, ToneSegment,
};
use super::wire::{udp_frame, PcapWriter};

pub const PACKET_SAMPLES: u64 = 160;
const PACKET_US: u64 = 20_000;
const SESSION_EPOCH_US: u64 = 1_683_799_200_000_000;
const GATEWAY_IP: std::net::Ipv4Addr = std::net::Ipv4Addr::new(10, 20, 0, 2);
const COLLECTOR_IP: std::net::Ipv4Addr = std::net::Ipv4Addr::new(10, 20, 0, 9);

#[derive(Debug, Clone)]
pub struct PstnCallSpec {
    pub seed: u64,
    /// Ring-back tone heard before the callee answers, seconds.
    pub ring_seconds: u32,
    /// Conversation length after answer, seconds.
    pub talk_seconds: u32,
    /// Fraction of each stream's packets to duplicate on the wire.
    pub duplicate_rate: f64,
    /// Consecutive packets dropped from the caller-side leg.
    pub gap_packets: u16,
}

impl Default for PstnCallSpec {
    fn default() -> Self {
        PstnCallSpec {
            seed: 1,
            ring_seconds: 4,
            talk_seconds: 30,
            duplicate_rate: 0.05,
            gap_packets: 3,
        }
    }
}

impl PstnCallSpec {
    fn validate(&self) -> Result<(), InvalidSpec> {
        if self.talk_seconds == 0 || self.talk_seconds > 600 {
            return Err(invalid("talk_seconds must be within 1..=600"));
        }
        if self.ring_seconds > 60 {
            return Err(invalid("ring_seconds must be at most 60"));
        }
        if !(0.0..=0.5).contains(&self.duplicate_rate) {
            return Err(invalid("duplicate_rate must be within 0.0..=0.5"));
        }
        let talk_packets = self.talk_seconds as u64 * 50;
        if self.gap_packets as u64 * 3 >= talk_packets {
            return Err(invalid("gap_packets must stay under a third of the talk packets"));
        }
        Ok(())
    }
}

struct StreamPlan {
    trace_pt: u8,
    src_id: u8,
    selected: bool,
    seq_start: u16,
    ssrc: u32,
    rtp_ts_base: u32,
    start_offset_samples: u64,
    tones: Vec<ToneSegment>,
    slots: u64,
    dropped: Option<Range<u64>>,
}

/// Generate the capture and its ground truth. Same spec, same bytes.
pub fn gen_pstn_call_capture(spec: &PstnCallSpec) -> Result<(Vec<u8>, Manifest), InvalidSpec> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let session_id = format!("fx{:07x}:1", rng.gen_range(0x10_0000..0xfff_ffffu32));

    let ring_samples = spec.ring_seconds as u64 * G711_SAMPLE_RATE as u64;
    let talk_samples = spec.talk_seconds as u64 * G711_SAMPLE_RATE as u64;
    let ring_packets = ring_samples / PACKET_SAMPLES;
    let talk_packets = talk_samples / PACKET_SAMPLES;

    let dropped = if spec.gap_packets == 0 {
        None
    } else {
        let first = rng.gen_range(talk_packets / 3..talk_packets * 2 / 3);
        Some(first..first + spec.gap_packets as u64)
    };

    let segments = |list: &[(f64, u64, u64)]| -> Vec<ToneSegment> {
        list.iter()
            .filter(|&&(_, _, samples)| samples > 0)
            .map(|&(freq_hz, start_sample, samples)| ToneSegment { freq_hz, start_sample, samples })
            .collect()
    };

    let mut plan_for = |trace_pt: u8,
                        src_id: u8,
                        selected: bool,
                        seq_start: Option<u16>,
                        offset: u64,
                        tones: Vec<ToneSegment>,
                        slots: u64,
                        dropped: Option<Range<u64>>| {
        StreamPlan {
            trace_pt,
            src_id,
            selected,
            seq_start: seq_start.unwrap_or_else(|| rng.gen()),
            ssrc: rng.gen(),
            rtp_ts_base: rng.gen_range(0..50_000),
            start_offset_samples: offset,
            tones,
            slots,
            dropped,
        }
    };

    let plans = vec![
        plan_for(
            21,
            38,
            true,
            Some(65_500),
            0,
            segments(&[(425.0, 0, ring_samples), (330.0, ring_samples, talk_samples)]),
            ring_packets + talk_packets,
            None,
        ),
        plan_for(
            35,
            36,
            true,
            None,
            ring_samples,
            segments(&[(440.0, 0, talk_samples)]),
            talk_packets,
            dropped,
        ),
        plan_for(35, 40, false, None, ring_samples, segments(&[(550.0, 0, talk_samples)]), talk_packets, None),
        plan_for(21, 42, false, None, ring_samples, segments(&[(660.0, 0, talk_samples)]), talk_packets, None),
    ];

    let mut manifest = Manifest::new("PSTN_CALL", spec.seed);
    manifest.stereo = Some(StereoTruth {
        channel_a: (21, 38),
        channel_b: (35, 36),
        sample_rate: G711_SAMPLE_RATE,
    });

    let mut events: Vec<(u64, Vec<u8>)> = Vec::new();
    for (idx, plan) in plans.iter().enumerate() {
        let total_samples = plan.slots * PACKET_SAMPLES;
        let wave = tone_samples(&plan.tones, total_samples, G711_SAMPLE_RATE);

        let wire_slots: Vec<u64> = (0..plan.slots)
            .filter(|s| plan.dropped.as_ref().is_none_or(|r| !r.contains(s)))
            .collect();
        let dup_count = (spec.duplicate_rate * wire_slots.len() as f64).floor() as usize;
        let dup_positions: HashSet<usize> =
            index::sample(&mut rng, wire_slots.len(), dup_count).into_iter().collect();

        let sport = 40_000 + idx as u16;
        let offset_us = plan.start_offset_samples * 1_000_000 / G711_SAMPLE_RATE as u64;
        for (wi, &slot) in wire_slots.iter().enumerate() {
            let arrival = SESSION_EPOCH_US + offset_us + slot * PACKET_US;
            let start = (slot * PACKET_SAMPLES) as usize;
            let payload: Vec<u8> = wave[start..start + PACKET_SAMPLES as usize]
                .iter()
                .map(|&s| encode_sample(s, Law::Mu))
                .collect();
            let rtp = encode_rtp(
                plan.seq_start.wrapping_add(slot as u16),
                plan.rtp_ts_base.wrapping_add((slot * PACKET_SAMPLES) as u32),
                plan.ssrc,
                0,
                slot == 0,
                &payload,
            );
            let frame = AcdrFrame {
                ts_us: arrival,
                arrival_us: arrival,
                trace_pt: plan.trace_pt,
                src_id: plan.src_id,
                full_session_id: session_id.clone(),
                media_type: AcdrMediaType::Rtp,
                payload: rtp,
            };
            let bytes = udp_frame(GATEWAY_IP, COLLECTOR_IP, sport, ACDR_DEFAULT_PORT, &encode_acdr(&frame));
            if dup_positions.contains(&wi) {
                events.push((arrival + 500, bytes.clone()));
            }
            events.push((arrival, bytes));
        }

        manifest.streams.push(StreamTruth {
            trace_pt: plan.trace_pt,
            src_id: plan.src_id,
            ssrc: plan.ssrc,
            payload_type: 0,
            selected: plan.selected,
            packets: wire_slots.len() as u64,
            duplicates: dup_count as u64,
            seq_start: plan.seq_start,
            start_offset_samples: plan.start_offset_samples,
            total_samples,
            tones: plan.tones.clone(),
            gap: plan.dropped.as_ref().map(|r| GapTruth {
                after_seq: plan.seq_start.wrapping_add((r.start - 1) as u16),
                missing: (r.end - r.start) as u16,
                silence_start_sample: r.start * PACKET_SAMPLES,
                silence_samples: (r.end - r.start) * PACKET_SAMPLES,
            }),
        });
    }

    events.sort_by_key(|&(arrival, _)| arrival);
    let mut writer = PcapWriter::new(Vec::new()).expect("in-memory write cannot fail");
    for (arrival, bytes) in &events {
        writer.record(*arrival, bytes).expect("in-memory write cannot fail");
    }
    Ok((writer.into_inner(), manifest))
}
