//! Streaming split of a syslog into per-dialog text bundles.
//!
//! Records are appended to `<call_id>.sip` files as they arrive, so peak
//! memory is bounded by the per-dialog index, not the input size. A small
//! cache of open append handles keeps interleaved dialogs from exhausting
//! file descriptors. Each bundle is truncated the first time a run touches
//! it, so splitting into a directory that already holds bundles replaces
//! them instead of growing them.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use super::dialogs::DialogMeta;
use super::message::parse_sip;
use super::reader::SipLogLine;

const MAX_OPEN_HANDLES: usize = 64;
const MAX_STEM_LEN: usize = 120;

#[derive(Debug, Clone)]
pub struct DialogIndexRow {
    pub call_id: String,
    pub start: String,
    pub end: String,
    pub participants: String,
    pub completeness: String,
    pub message_count: u64,
    pub file_name: String,
}

#[derive(Debug)]
pub struct BundleSummary {
    pub dialogs: u64,
    pub messages: u64,
    pub unparsed_fragments: u64,
    pub index_path: PathBuf,
    pub rows: Vec<DialogIndexRow>,
}

struct HandleCache {
    open: HashMap<String, (BufWriter<File>, u64)>,
    started: HashSet<String>,
    tick: u64,
}

impl HandleCache {
    fn new() -> Self {
        HandleCache { open: HashMap::new(), started: HashSet::new(), tick: 0 }
    }

    fn writer<'a>(
        &'a mut self,
        call_id: &str,
        path: &Path,
    ) -> io::Result<&'a mut BufWriter<File>> {
        self.tick += 1;
        if !self.open.contains_key(call_id) {
            if self.open.len() >= MAX_OPEN_HANDLES {
                let oldest = self
                    .open
                    .iter()
                    .min_by_key(|(_, (_, used))| *used)
                    .map(|(k, _)| k.clone())
                    .expect("cache is non-empty");
                let (mut w, _) = self.open.remove(&oldest).unwrap();
                w.flush()?;
            }
            let file = if self.started.insert(call_id.to_string()) {
                OpenOptions::new().write(true).create(true).truncate(true).open(path)?
            } else {
                OpenOptions::new().create(true).append(true).open(path)?
            };
            self.open.insert(call_id.to_string(), (BufWriter::new(file), 0));
        }
        let entry = self.open.get_mut(call_id).unwrap();
        entry.1 = self.tick;
        Ok(&mut entry.0)
    }

    fn finish(self) -> io::Result<()> {
        for (_, (mut w, _)) in self.open {
            w.flush()?;
        }
        Ok(())
    }
}

fn sanitize_stem(call_id: &str) -> String {
    let mut stem: String = call_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    if stem.len() > MAX_STEM_LEN {
        stem.truncate(MAX_STEM_LEN);
    }
    if stem.is_empty() {
        stem.push_str("dialog");
    }
    stem
}

/// Split records into `<call_id>.sip` bundles under `out_dir` and write an
/// `index.csv` describing every dialog. Distinct Call-IDs that sanitize to
/// the same file name get numbered suffixes.
pub fn split_to_bundles<I>(records: I, out_dir: &Path) -> io::Result<BundleSummary>
where
    I: IntoIterator<Item = io::Result<SipLogLine>>,
{
    std::fs::create_dir_all(out_dir)?;

    let mut meta: IndexMap<String, (DialogMeta, String)> = IndexMap::new();
    let mut used_names: HashMap<String, u32> = HashMap::new();
    let mut cache = HandleCache::new();
    let mut unparsed = 0u64;
    let mut messages = 0u64;

    for record in records {
        let record = record?;
        let Some(fragment) = record.sip_fragment.as_deref() else { continue };
        let msg = match parse_sip(fragment, record.ts) {
            Ok(m) => m,
            Err(_) => {
                unparsed += 1;
                continue;
            }
        };
        messages += 1;

        let file_name = match meta.get_mut(&msg.call_id) {
            Some((m, name)) => {
                m.update(&msg);
                name.clone()
            }
            None => {
                let stem = sanitize_stem(&msg.call_id);
                let n = used_names.entry(stem.clone()).or_insert(0);
                *n += 1;
                let name = if *n == 1 { format!("{stem}.sip") } else { format!("{stem}-{n}.sip") };
                meta.insert(msg.call_id.clone(), (DialogMeta::new(&msg), name.clone()));
                name
            }
        };

        let path = out_dir.join(&file_name);
        let w = cache.writer(&msg.call_id, &path)?;
        w.write_all(record.raw.as_bytes())?;
        w.write_all(b"\n\n")?;
    }
    cache.finish()?;

    let rows: Vec<DialogIndexRow> = meta
        .into_iter()
        .map(|(call_id, (m, file_name))| DialogIndexRow {
            call_id,
            start: m.start.format("%Y-%m-%dT%H:%M:%S%.6fZ").to_string(),
            end: m.end.format("%Y-%m-%dT%H:%M:%S%.6fZ").to_string(),
            participants: m.participants.iter().cloned().collect::<Vec<_>>().join(";"),
            completeness: m.completeness().to_string(),
            message_count: m.message_count,
            file_name,
        })
        .collect();

    let index_path = out_dir.join("index.csv");
    let mut csv = csv::Writer::from_path(&index_path)?;
    csv.write_record(["call_id", "start", "end", "participants", "completeness", "message_count", "file"])?;
    for r in &rows {
        csv.write_record([
            r.call_id.as_str(),
            r.start.as_str(),
            r.end.as_str(),
            r.participants.as_str(),
            r.completeness.as_str(),
            &r.message_count.to_string(),
            r.file_name.as_str(),
        ])?;
    }
    csv.flush()?;

    Ok(BundleSummary {
        dialogs: rows.len() as u64,
        messages,
        unparsed_fragments: unparsed,
        index_path,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use chrono::DateTime;

    use super::*;

    fn record(seq: u64, secs: i64, body: &str) -> io::Result<SipLogLine> {
        let ts = DateTime::from_timestamp(1_683_792_000 + secs, 0).unwrap();
        Ok(SipLogLine {
            seq,
            ts,
            raw: format!("{} sbc01 sip-trace: message\n  {}", ts.to_rfc3339(), body.replace('\n', "\n  ")),
            sip_fragment: Some(body.to_string()),
        })
    }

    fn invite(call_id: &str) -> String {
        format!("INVITE sip:b@b SIP/2.0\nFrom: <sip:a@a>;tag=1\nTo: <sip:b@b>\nCall-ID: {call_id}\nCSeq: 1 INVITE\n")
    }

    fn ok(call_id: &str) -> String {
        format!("SIP/2.0 200 OK\nCall-ID: {call_id}\nCSeq: 1 INVITE\n")
    }

    #[test]
    fn bundles_collect_every_record_of_a_dialog() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            record(1, 0, &invite("alpha")),
            record(2, 1, &invite("beta")),
            record(3, 2, &ok("alpha")),
            record(4, 3, &ok("beta")),
        ];
        let summary = split_to_bundles(records, dir.path()).unwrap();
        assert_eq!(summary.dialogs, 2);
        assert_eq!(summary.messages, 4);
        assert_eq!(summary.unparsed_fragments, 0);

        let alpha = std::fs::read_to_string(dir.path().join("alpha.sip")).unwrap();
        assert_eq!(alpha.matches("sip-trace").count(), 2);
        assert!(alpha.contains("INVITE sip:b@b"));
        assert!(alpha.contains("200 OK"));

        let index = std::fs::read_to_string(summary.index_path).unwrap();
        assert!(index.starts_with("call_id,start,end,participants,completeness,message_count,file"));
        assert!(index.contains("alpha,"));
        assert!(index.contains("NO_FINAL_RESPONSE"));
    }

    #[test]
    fn hostile_call_ids_become_safe_distinct_file_names() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![
            record(1, 0, &invite("a/b")),
            record(2, 1, &invite("a_b")),
            record(3, 2, &invite("a?b")),
        ];
        let summary = split_to_bundles(records, dir.path()).unwrap();
        assert_eq!(summary.dialogs, 3);
        let names: Vec<&str> = summary.rows.iter().map(|r| r.file_name.as_str()).collect();
        assert_eq!(names, ["a_b.sip", "a_b-2.sip", "a_b-3.sip"]);
        for name in names {
            assert!(dir.path().join(name).is_file(), "{name} missing");
        }
    }

    #[test]
    fn resplitting_into_the_same_directory_replaces_bundles() {
        let dir = tempfile::tempdir().unwrap();
        let records =
            || vec![record(1, 0, &invite("alpha")), record(2, 2, &ok("alpha"))];
        split_to_bundles(records(), dir.path()).unwrap();
        let first = std::fs::read(dir.path().join("alpha.sip")).unwrap();
        split_to_bundles(records(), dir.path()).unwrap();
        let second = std::fs::read(dir.path().join("alpha.sip")).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn more_dialogs_than_open_handles_still_append_correctly() {
        let dir = tempfile::tempdir().unwrap();
        let n = MAX_OPEN_HANDLES + 16;
        let mut records = Vec::new();
        let mut seq = 0;
        for i in 0..n {
            seq += 1;
            records.push(record(seq, seq as i64, &invite(&format!("call-{i:03}"))));
        }
        for i in 0..n {
            seq += 1;
            records.push(record(seq, seq as i64, &ok(&format!("call-{i:03}"))));
        }
        let summary = split_to_bundles(records, dir.path()).unwrap();
        assert_eq!(summary.dialogs, n as u64);
        for row in &summary.rows {
            assert_eq!(row.message_count, 2);
            let text = std::fs::read_to_string(dir.path().join(&row.file_name)).unwrap();
            assert_eq!(text.matches("sip-trace").count(), 2, "{}", row.call_id);
        }
    }
}
