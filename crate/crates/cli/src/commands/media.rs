//! `extract-audio`: RTP stream inventory and WAV extraction.
//!
//! The selector narrows streams by `(trace_pt, src_id)`; its order fixes
//! the channel order of the merged file, so "(35,36)|(21,38)" puts
//! (35,36) on the left channel.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde_json::json;
use teamscope_core::media::{
    enumerate_streams, merge_stereo, parse_acdr, reassemble, stream_inventory, write_wav_mono,
    write_wav_stereo, RtpStream,
};

use crate::commands::{load_capture, CmdError, CmdResult};
use crate::output::{emit, render_csv, render_json, OutputFormat};
use crate::{ExtractAudioArgs, RunConfig};

pub fn run(config: &RunConfig, args: &ExtractAudioArgs) -> CmdResult {
    let pairs = match &args.select {
        Some(text) => parse_selector(text)?,
        None => Vec::new(),
    };
    let packets = load_capture(&args.pcap, config.verbose)?;
    let (frames, skipped) = parse_acdr(&packets, args.port);
    if skipped > 0 && config.verbose > 0 {
        eprintln!("{skipped} datagrams on port {} were not recording frames", args.port);
    }
    let (mut streams, parse_errors) = enumerate_streams(&frames, |trace_pt, src_id| {
        pairs.is_empty() || pairs.contains(&(trace_pt, src_id))
    });
    if !parse_errors.is_empty() {
        eprintln!("{} frames failed RTP parsing", parse_errors.len());
    }
    streams.sort_by_key(|s| {
        pairs
            .iter()
            .position(|&(tp, sid)| tp == s.key.trace_pt && sid == s.key.src_id)
            .unwrap_or(usize::MAX)
    });

    let wav = match &config.out {
        Some(path) => Some(write_audio(&streams, path)?),
        None => None,
    };

    let bytes = match config.format {
        OutputFormat::Text => {
            let mut out = stream_inventory(&streams, parse_errors.len());
            if let Some(w) = &wav {
                let _ = writeln!(
                    out,
                    "wav: {} channels={} frames={} alignment_offset={:.3}s",
                    w.path, w.channels, w.frames, w.alignment_offset
                );
            }
            out.into_bytes()
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = streams
                .iter()
                .map(|s| {
                    vec![
                        s.key.trace_pt.to_string(),
                        s.key.src_id.to_string(),
                        format!("{:#010x}", s.key.ssrc),
                        s.key.payload_type.to_string(),
                        s.packets.len().to_string(),
                        s.duplicates_removed.to_string(),
                        s.gaps.len().to_string(),
                        s.gaps.iter().map(|g| g.missing_count).sum::<u64>().to_string(),
                    ]
                })
                .collect();
            render_csv(
                &[
                    "trace_pt",
                    "src_id",
                    "ssrc",
                    "payload_type",
                    "packets",
                    "duplicates_removed",
                    "gaps",
                    "missing_packets",
                ],
                &rows,
            )?
        }
        OutputFormat::Structured => render_json(&json!({
            "streams": streams.iter().map(stream_json).collect::<Vec<_>>(),
            "parse_errors": parse_errors.len(),
            "wav": wav.as_ref().map(|w| json!({
                "path": w.path,
                "channels": w.channels,
                "frames": w.frames,
                "alignment_offset": w.alignment_offset,
            })),
        })),
    };
    emit(None, &bytes)
}

fn stream_json(s: &RtpStream) -> serde_json::Value {
    json!({
        "trace_pt": s.key.trace_pt,
        "src_id": s.key.src_id,
        "ssrc": s.key.ssrc,
        "payload_type": s.key.payload_type,
        "packets": s.packets.len(),
        "duplicates_removed": s.duplicates_removed,
        "gaps": s.gaps.iter().map(|g| json!({
            "after_seq": g.after_seq,
            "missing_count": g.missing_count,
        })).collect::<Vec<_>>(),
    })
}

struct WavInfo {
    path: String,
    channels: u16,
    frames: usize,
    alignment_offset: f64,
}

fn write_audio(streams: &[RtpStream], path: &Path) -> Result<WavInfo, CmdError> {
    let open = || -> Result<BufWriter<File>, CmdError> {
        let file = File::create(path)
            .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(BufWriter::new(file))
    };
    let media_err = |e: teamscope_core::media::MediaError| CmdError::Input(e.to_string());

    match streams {
        [] => Err(CmdError::Input("selector matched no streams".to_string())),
        [only] => {
            let mono = reassemble(only).map_err(media_err)?;
            write_wav_mono(&mono, open()?)
                .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))?;
            Ok(WavInfo {
                path: path.display().to_string(),
                channels: 1,
                frames: mono.samples.len(),
                alignment_offset: 0.0,
            })
        }
        [first, second] => {
            let a = reassemble(first).map_err(media_err)?;
            let b = reassemble(second).map_err(media_err)?;
            let artifact = merge_stereo(&a, &b).map_err(media_err)?;
            let frames = artifact.frames();
            write_wav_stereo(&artifact, open()?)
                .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))?;
            Ok(WavInfo {
                path: path.display().to_string(),
                channels: 2,
                frames,
                alignment_offset: artifact.alignment_offset,
            })
        }
        more => Err(CmdError::Input(format!(
            "selector matched {} streams; audio extraction takes one or two",
            more.len()
        ))),
    }
}

fn parse_selector(text: &str) -> Result<Vec<(u8, u8)>, CmdError> {
    let bad = || {
        CmdError::Usage(format!(
            "bad selector {text:?}; expected \"(trace_pt,src_id)|(trace_pt,src_id)…\""
        ))
    };
    let mut pairs = Vec::new();
    for part in text.split('|') {
        let inner = part
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (tp, sid) = inner.split_once(',').ok_or_else(bad)?;
        let tp: u8 = tp.trim().parse().map_err(|_| bad())?;
        let sid: u8 = sid.trim().parse().map_err(|_| bad())?;
        pairs.push((tp, sid));
    }
    if pairs.is_empty() {
        return Err(bad());
    }
    Ok(pairs)
}
