//! Synthetic gateway syslog with interleaved SIP dialogs.
//!
//! Output is written streaming, so multi-hundred-megabyte fixtures never
//! live in memory. Each dialog is a seven-message INVITE transaction
//! (INVITE, 100, 180, 200, ACK, BYE, 200) whose records interleave with up
//! to `interleave` other open dialogs plus periodic gateway chatter. When a
//! byte target is set, chatter is paced through the file until the final
//! size lands within one noise record of the target.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{invalid, DialogTruth, GenError, InvalidSpec, LogStats, Manifest};

const EPOCH_US: u64 = 1_683_792_000_000_000;
const MESSAGES_PER_DIALOG: u64 = 7;

#[derive(Debug, Clone)]
pub struct SipLogSpec {
    pub seed: u64,
    pub dialogs: u64,
    /// Upper bound on dialogs open at once.
    pub interleave: u64,
    /// Total output size to aim for; reached by padding with gateway
    /// chatter, never by dropping dialog records.
    pub byte_target: Option<u64>,
}

impl Default for SipLogSpec {
    fn default() -> Self {
        SipLogSpec { seed: 1, dialogs: 100, interleave: 10, byte_target: None }
    }
}

struct CountingWriter<W: Write> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

struct DialogState {
    call_id: String,
    caller: String,
    callee: String,
    next_msg: usize,
}

fn format_ts(us: u64) -> String {
    let dt = chrono::DateTime::from_timestamp_micros(us as i64).expect("fixture epoch in range");
    dt.format("%Y-%m-%dT%H:%M:%S%.6fZ").to_string()
}

/// Render one record: syslog header line plus the SIP payload as two-space
/// indented continuation lines. Sizes depend only on the message position,
/// never on the dialog index, so total output size is arithmetic.
fn render_record(ts_us: u64, d: &DialogState, msg: usize) -> String {
    let sdp = "v=0\no=- 0 0 IN IP4 10.8.6.1\ns=call\nc=IN IP4 10.8.6.1\nm=audio 6000 RTP/AVP 0 8\n"
        .to_string();
    let (start_line, cseq, body) = match msg {
        0 => (format!("INVITE sip:{}@pbx.lab SIP/2.0", d.callee), "1 INVITE", Some(&sdp)),
        1 => ("SIP/2.0 100 Trying".to_string(), "1 INVITE", None),
        2 => ("SIP/2.0 180 Ringing".to_string(), "1 INVITE", None),
        3 => ("SIP/2.0 200 OK".to_string(), "1 INVITE", Some(&sdp)),
        4 => (format!("ACK sip:{}@pbx.lab SIP/2.0", d.callee), "1 ACK", None),
        5 => (format!("BYE sip:{}@pbx.lab SIP/2.0", d.callee), "2 BYE", None),
        _ => ("SIP/2.0 200 OK".to_string(), "2 BYE", None),
    };

    let mut sip = String::new();
    sip.push_str(&start_line);
    sip.push('\n');
    sip.push_str("Via: SIP/2.0/UDP 10.8.6.1:5060;branch=z9hG4bK7f3a\n");
    sip.push_str(&format!("From: <sip:{}@sbc01.lab>;tag=a71b\n", d.caller));
    sip.push_str(&format!("To: <sip:{}@pbx.lab>\n", d.callee));
    sip.push_str(&format!("Call-ID: {}\n", d.call_id));
    sip.push_str(&format!("CSeq: {cseq}\n"));
    match body {
        Some(b) => {
            sip.push_str("Content-Type: application/sdp\n");
            sip.push_str(&format!("Content-Length: {:3}\n", b.len()));
            sip.push('\n');
            sip.push_str(b);
        }
        None => sip.push_str("Content-Length:   0\n"),
    }

    let mut out = format!(
        "{} sbc01 voip: rx {:4} bytes from 10.8.6.10:5060\n",
        format_ts(ts_us),
        sip.len()
    );
    for line in sip.lines() {
        out.push_str("  ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn render_noise(ts_us: u64, rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} sbc01 system: media-gw stats cpu={:02}% mem={:02}% sessions={:04} rtp-pkts={:09}\n",
        format_ts(ts_us),
        rng.gen_range(1..80),
        rng.gen_range(10..95),
        rng.gen_range(0..2_000),
        rng.gen_range(0..1_000_000_000u64),
    )
}

fn dialog_bytes_constant() -> u64 {
    let probe = DialogState {
        call_id: "d0000000-00000000@sbc01.lab".to_string(),
        caller: "+390412200000".to_string(),
        callee: "+390421300000".to_string(),
        next_msg: 0,
    };
    (0..MESSAGES_PER_DIALOG as usize)
        .map(|m| render_record(EPOCH_US, &probe, m).len() as u64)
        .sum()
}

const NOISE_MAX_BYTES: u64 = 128;

/// Generate the log into `out`. Same spec, same bytes. The returned manifest
/// lists every call-id with its message count plus whole-file statistics.
pub fn gen_sip_log<W: Write>(spec: &SipLogSpec, out: W) -> Result<Manifest, GenError> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut w = CountingWriter { inner: out, written: 0 };
    let mut manifest = Manifest::new("SIP_LOG", spec.seed);

    let total_records = spec.dialogs * MESSAGES_PER_DIALOG;
    let mut ts_us = EPOCH_US;
    let mut noise_records = 0u64;
    let mut emitted = 0u64;

    let emit_noise = |w: &mut CountingWriter<W>,
                          ts_us: &mut u64,
                          rng: &mut ChaCha8Rng,
                          noise_records: &mut u64|
     -> std::io::Result<()> {
        *ts_us += rng.gen_range(5_000..40_000);
        w.write_all(render_noise(*ts_us, rng).as_bytes())?;
        *noise_records += 1;
        Ok(())
    };

    let mut active: Vec<DialogState> = Vec::new();
    let mut next_index = 0u64;
    let mut start_dialog = |rng: &mut ChaCha8Rng, index: u64| {
        let state = DialogState {
            call_id: format!("d{:07}-{:08x}@sbc01.lab", index, rng.gen::<u32>()),
            caller: format!("+3904122{:05}", rng.gen_range(0..100_000)),
            callee: format!("+3904213{:05}", rng.gen_range(0..100_000)),
            next_msg: 0,
        };
        manifest.dialogs.push(DialogTruth {
            call_id: state.call_id.clone(),
            messages: MESSAGES_PER_DIALOG,
            completeness: "COMPLETE".to_string(),
        });
        state
    };
    while next_index < spec.dialogs.min(spec.interleave) {
        let state = start_dialog(&mut rng, next_index);
        active.push(state);
        next_index += 1;
    }

    while !active.is_empty() {
        if let Some(target) = spec.byte_target {
            let pace = target * emitted / total_records;
            while w.written < pace {
                emit_noise(&mut w, &mut ts_us, &mut rng, &mut noise_records)?;
            }
        } else if emitted % 6 == 5 {
            emit_noise(&mut w, &mut ts_us, &mut rng, &mut noise_records)?;
        }

        let idx = rng.gen_range(0..active.len());
        ts_us += rng.gen_range(20_000..180_000);
        let record = render_record(ts_us, &active[idx], active[idx].next_msg);
        w.write_all(record.as_bytes())?;
        emitted += 1;
        active[idx].next_msg += 1;

        if active[idx].next_msg as u64 == MESSAGES_PER_DIALOG {
            active.swap_remove(idx);
            if next_index < spec.dialogs {
                let state = start_dialog(&mut rng, next_index);
                active.push(state);
                next_index += 1;
            }
        }
    }

    if let Some(target) = spec.byte_target {
        loop {
            ts_us += rng.gen_range(5_000..40_000);
            let noise = render_noise(ts_us, &mut rng);
            if w.written + noise.len() as u64 > target {
                break;
            }
            w.write_all(noise.as_bytes())?;
            noise_records += 1;
        }
    }
    w.flush()?;

    manifest.dialogs.sort_by(|a, b| a.call_id.cmp(&b.call_id));
    manifest.log_stats = Some(LogStats {
        records: emitted + noise_records,
        sip_records: emitted,
        noise_records,
        bytes: w.written,
    });
    Ok(manifest)
}

fn validate(spec: &SipLogSpec) -> Result<(), InvalidSpec> {
    if spec.dialogs == 0 {
        return Err(invalid("dialogs must be at least 1"));
    }
    if spec.interleave == 0 {
        return Err(invalid("interleave must be at least 1"));
    }
    if let Some(target) = spec.byte_target {
        let dialog_bytes = spec.dialogs * dialog_bytes_constant();
        if target < dialog_bytes + NOISE_MAX_BYTES {
            return Err(invalid(format!(
                "byte_target {target} cannot hold {} dialogs ({dialog_bytes} bytes of records)",
                spec.dialogs
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::io::{BufReader, Cursor};

    use super::*;
    use crate::siplog::{split_dialogs, Completeness, SyslogReader};

    fn generate(spec: &SipLogSpec) -> (Vec<u8>, Manifest) {
        let mut bytes = Vec::new();
        let manifest = gen_sip_log(spec, &mut bytes).unwrap();
        (bytes, manifest)
    }

    #[test]
    fn same_spec_same_bytes() {
        let spec = SipLogSpec::default();
        let (a, ma) = generate(&spec);
        let (b, mb) = generate(&spec);
        assert_eq!(a, b);
        assert_eq!(ma, mb);
        let (c, _) = generate(&SipLogSpec { seed: 2, ..spec });
        assert_ne!(a, c);
    }

    #[test]
    fn the_log_splits_back_into_the_manifest_dialogs() {
        let spec = SipLogSpec { seed: 3, dialogs: 100, interleave: 10, byte_target: None };
        let (bytes, manifest) = generate(&spec);
        assert_eq!(manifest.dialogs.len(), 100);

        let reader = SyslogReader::new(BufReader::new(Cursor::new(bytes)));
        let lines: Vec<_> = reader.map(|r| r.unwrap()).collect();
        let split = split_dialogs(&lines);
        assert_eq!(split.unparsed_fragments, 0);
        assert_eq!(split.dialogs.len(), 100);

        let mut found: Vec<_> = split.dialogs.iter().collect();
        found.sort_by(|a, b| a.call_id.cmp(&b.call_id));
        for (dialog, truth) in found.iter().zip(&manifest.dialogs) {
            assert_eq!(dialog.call_id, truth.call_id);
            assert_eq!(dialog.messages.len() as u64, truth.messages);
            assert_eq!(dialog.completeness, Completeness::Complete);
        }

        let stats = manifest.log_stats.unwrap();
        assert_eq!(stats.sip_records, 700);
        assert_eq!(lines.len() as u64, stats.records);
    }

    #[test]
    fn interleaving_actually_overlaps_dialogs() {
        let spec = SipLogSpec { seed: 5, dialogs: 40, interleave: 8, byte_target: None };
        let (bytes, _) = generate(&spec);
        let reader = SyslogReader::new(BufReader::new(Cursor::new(bytes)));
        let mut open = std::collections::HashSet::new();
        let mut max_open = 0;
        for line in reader {
            let line = line.unwrap();
            let Some(fragment) = &line.sip_fragment else { continue };
            let call_id = fragment
                .lines()
                .find_map(|l| l.strip_prefix("Call-ID: "))
                .unwrap()
                .to_string();
            if fragment.contains("CSeq: 2 BYE") && fragment.starts_with("SIP/2.0 200") {
                open.remove(&call_id);
            } else {
                open.insert(call_id);
                max_open = max_open.max(open.len());
            }
        }
        assert!(open.is_empty());
        assert!(max_open > 1, "dialogs never overlapped");
        assert!(max_open <= 8, "more than `interleave` dialogs open: {max_open}");
    }

    #[test]
    fn byte_targets_land_within_one_noise_record() {
        let spec =
            SipLogSpec { seed: 7, dialogs: 50, interleave: 5, byte_target: Some(2_000_000) };
        let (bytes, manifest) = generate(&spec);
        let stats = manifest.log_stats.unwrap();
        assert_eq!(bytes.len() as u64, stats.bytes);
        let target = spec.byte_target.unwrap();
        assert!(stats.bytes <= target);
        assert!(target - stats.bytes < NOISE_MAX_BYTES, "missed target by {}", target - stats.bytes);
        assert!(stats.noise_records > 1_000);
    }

    #[test]
    fn timestamps_never_go_backwards() {
        let (bytes, _) = generate(&SipLogSpec { seed: 11, ..SipLogSpec::default() });
        let reader = SyslogReader::new(BufReader::new(Cursor::new(bytes)));
        let mut last = None;
        for line in reader {
            let ts = line.unwrap().ts;
            if let Some(prev) = last {
                assert!(ts > prev);
            }
            last = Some(ts);
        }
    }

    #[test]
    fn hostile_specs_are_rejected() {
        let bad = [
            SipLogSpec { dialogs: 0, ..SipLogSpec::default() },
            SipLogSpec { interleave: 0, ..SipLogSpec::default() },
            SipLogSpec { dialogs: 1_000, byte_target: Some(10_000), ..SipLogSpec::default() },
        ];
        for spec in bad {
            let mut sink = Vec::new();
            assert!(gen_sip_log(&spec, &mut sink).is_err(), "accepted {spec:?}");
        }
    }
}
