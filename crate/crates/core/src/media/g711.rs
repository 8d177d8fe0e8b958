//! G.711 companding, both laws, using the classic segment/mantissa
//! algorithms. One encoded byte expands to one signed 16-bit sample.

use serde::{Deserialize, Serialize};

/// Companding law. RTP payload type 0 is μ-law, 8 is A-law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Law {
    Mu,
    A,
}

impl std::fmt::Display for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Law::Mu => write!(f, "mu-law"),
            Law::A => write!(f, "A-law"),
        }
    }
}

const ULAW_BIAS: i32 = 0x84;
const ULAW_CLIP: i32 = 32_635;
const ULAW_SEG_END: [i32; 8] = [0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF, 0x1FFF, 0x3FFF, 0x7FFF];
const ALAW_SEG_END: [i32; 8] = [0x1F, 0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF];

pub fn decode_ulaw(byte: u8) -> i16 {
    let u = !byte;
    let mut t = (((u & 0x0f) as i32) << 3) + ULAW_BIAS;
    t <<= (u >> 4) & 0x07;
    let v = if u & 0x80 != 0 { ULAW_BIAS - t } else { t - ULAW_BIAS };
    v as i16
}

pub fn encode_ulaw(sample: i16) -> u8 {
    let mut pcm = sample as i32;
    let mask: u8 = if pcm < 0 {
        pcm = -pcm;
        0x7f
    } else {
        0xff
    };
    if pcm > ULAW_CLIP {
        pcm = ULAW_CLIP;
    }
    pcm += ULAW_BIAS;
    match ULAW_SEG_END.iter().position(|&end| pcm <= end) {
        None => 0x7f ^ mask,
        Some(seg) => {
            let uval = ((seg as u8) << 4) | (((pcm >> (seg + 3)) & 0x0f) as u8);
            uval ^ mask
        }
    }
}

pub fn decode_alaw(byte: u8) -> i16 {
    let a = byte ^ 0x55;
    let seg = (a & 0x70) >> 4;
    let mut t = ((a & 0x0f) as i32) << 4;
    t += if seg == 0 { 8 } else { 0x108 };
    if seg >= 2 {
        t <<= seg - 1;
    }
    let v = if a & 0x80 != 0 { t } else { -t };
    v as i16
}

pub fn encode_alaw(sample: i16) -> u8 {
    let mut pcm = (sample as i32) >> 3;
    let mask: u8 = if pcm >= 0 {
        0xd5
    } else {
        pcm = -pcm - 1;
        0x55
    };
    match ALAW_SEG_END.iter().position(|&end| pcm <= end) {
        None => 0x7f ^ mask,
        Some(seg) => {
            let shift = if seg < 2 { 1 } else { seg };
            let aval = ((seg as u8) << 4) | (((pcm >> shift) & 0x0f) as u8);
            aval ^ mask
        }
    }
}

pub fn decode_sample(byte: u8, law: Law) -> i16 {
    match law {
        Law::Mu => decode_ulaw(byte),
        Law::A => decode_alaw(byte),
    }
}

pub fn encode_sample(sample: i16, law: Law) -> u8 {
    match law {
        Law::Mu => encode_ulaw(sample),
        Law::A => encode_alaw(sample),
    }
}

/// Expand a whole payload, one sample per byte.
pub fn decode_g711(payload: &[u8], law: Law) -> Vec<i16> {
    payload.iter().map(|&b| decode_sample(b, law)).collect()
}
