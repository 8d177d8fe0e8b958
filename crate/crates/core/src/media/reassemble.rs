//! Turning a deduplicated RTP stream into PCM and merging two legs into a
//! two-channel artifact.

use thiserror::Error;

use super::g711::{decode_g711, Law};
use super::stream::{extended_seqs, RtpStream, StreamKey};

pub const G711_SAMPLE_RATE: u32 = 8000;

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("payload type {0} is not a codec this tool decodes")]
    UnsupportedCodec(u8),
    #[error("stream has no packets")]
    EmptyStream,
    #[error("sample rates differ: {0} Hz vs {1} Hz")]
    RateMismatch(u32, u32),
}

/// One reassembled channel.
#[derive(Debug, Clone)]
pub struct MonoBuffer {
    pub source: StreamKey,
    pub sample_rate: u32,
    pub samples: Vec<i16>,
    /// Arrival time of the stream's first packet, microseconds.
    pub start_us: u64,
}

/// Two interleaved channels, A first.
#[derive(Debug, Clone)]
pub struct AudioArtifact {
    pub sample_rate: u32,
    /// Interleaved left/right 16-bit samples.
    pub samples: Vec<i16>,
    pub channel_sources: (StreamKey, StreamKey),
    /// Delay applied to the later-starting channel, seconds.
    pub alignment_offset: f64,
}

impl AudioArtifact {
    pub fn frames(&self) -> usize {
        self.samples.len() / 2
    }

    pub fn channel(&self, idx: usize) -> Vec<i16> {
        self.samples.iter().skip(idx).step_by(2).copied().collect()
    }
}

fn law_for(payload_type: u8) -> Result<Law, MediaError> {
    match payload_type {
        0 => Ok(Law::Mu),
        8 => Ok(Law::A),
        other => Err(MediaError::UnsupportedCodec(other)),
    }
}

/// Decode a stream into one contiguous PCM buffer. Packets are placed at
/// their RTP-timestamp offsets (one timestamp unit is one sample for G.711),
/// so lost packets leave exactly their duration as silence.
pub fn reassemble(stream: &RtpStream) -> Result<MonoBuffer, MediaError> {
    let law = law_for(stream.key.payload_type)?;
    if stream.packets.is_empty() {
        return Err(MediaError::EmptyStream);
    }

    let mut order: Vec<usize> = (0..stream.packets.len()).collect();
    let exts = extended_seqs(&stream.packets);
    order.sort_unstable_by_key(|&i| exts[i]);

    let base_ts = stream.packets[order[0]].timestamp;
    let total = stream
        .packets
        .iter()
        .map(|p| p.timestamp.wrapping_sub(base_ts) as usize + p.payload.len())
        .max()
        .unwrap();

    let mut samples = vec![0i16; total];
    for &i in &order {
        let p = &stream.packets[i];
        let offset = p.timestamp.wrapping_sub(base_ts) as usize;
        let decoded = decode_g711(&p.payload, law);
        samples[offset..offset + decoded.len()].copy_from_slice(&decoded);
    }

    let start_us = stream.packets.iter().map(|p| p.arrival_us).min().unwrap();
    Ok(MonoBuffer {
        source: stream.key,
        sample_rate: G711_SAMPLE_RATE,
        samples,
        start_us,
    })
}

/// Interleave two channels, delaying the later-starting one by the
/// arrival-time difference rounded to whole samples and padding both to a
/// common length. Channel A is always the first argument.
pub fn merge_stereo(a: &MonoBuffer, b: &MonoBuffer) -> Result<AudioArtifact, MediaError> {
    if a.sample_rate != b.sample_rate {
        return Err(MediaError::RateMismatch(a.sample_rate, b.sample_rate));
    }
    let rate = a.sample_rate as u64;
    let diff_us = a.start_us.abs_diff(b.start_us);
    let delay = ((diff_us * rate + 500_000) / 1_000_000) as usize;
    let (a_off, b_off) = if a.start_us <= b.start_us { (0, delay) } else { (delay, 0) };

    let frames = (a_off + a.samples.len()).max(b_off + b.samples.len());
    let mut samples = vec![0i16; frames * 2];
    for (i, &s) in a.samples.iter().enumerate() {
        samples[(a_off + i) * 2] = s;
    }
    for (i, &s) in b.samples.iter().enumerate() {
        samples[(b_off + i) * 2 + 1] = s;
    }

    Ok(AudioArtifact {
        sample_rate: a.sample_rate,
        samples,
        channel_sources: (a.source, b.source),
        alignment_offset: delay as f64 / a.sample_rate as f64,
    })
}
