//! Streaming syslog reader.
//!
//! Record grammar, one record per log event:
//!
//! ```text
//! <timestamp ISO-8601> <host> <facility>: <text>
//!   <continuation line, indented>
//!   ...
//! <blank line or next record header>
//! ```
//!
//! Indented continuation lines carry a SIP payload verbatim (their two-space
//! indent stripped); a SIP message's own header/body separator appears as an
//! indented empty line, so the *unindented* blank line stays unambiguous as
//! the record terminator. The reader holds one record at a time, so memory
//! stays flat over arbitrarily large files.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use flate2::bufread::GzDecoder;

/// Rewrites one physical line before interpretation; the hook point for
/// vendor syslog variants.
pub type LinePreprocessor = fn(&str) -> String;

/// One log record. `raw` is the record exactly as it appeared (header plus
/// indented continuations, no terminator); `sip_fragment` is the dedented
/// continuation text when the record carried one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SipLogLine {
    /// Source line number of the record's header line, 1-based.
    pub seq: u64,
    pub ts: DateTime<Utc>,
    pub raw: String,
    pub sip_fragment: Option<String>,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SyslogCounters {
    /// Lines containing bytes that were not valid UTF-8 (replaced).
    pub replaced_lines: u64,
    /// Unindented lines that did not parse as a record header.
    pub malformed_headers: u64,
    /// Headers whose timestamp carried no timezone (assumed UTC).
    pub naive_timestamps: u64,
}

pub struct SyslogReader<R> {
    src: R,
    preprocess: Option<LinePreprocessor>,
    line_no: u64,
    pending: Option<Pending>,
    counters: SyslogCounters,
    buf: Vec<u8>,
    done: bool,
}

struct Pending {
    seq: u64,
    ts: DateTime<Utc>,
    raw: String,
    fragment: Vec<String>,
}

impl Pending {
    fn finish(self) -> SipLogLine {
        let sip_fragment = if self.fragment.iter().any(|l| !l.is_empty()) {
            Some(self.fragment.join("\n"))
        } else {
            None
        };
        SipLogLine { seq: self.seq, ts: self.ts, raw: self.raw, sip_fragment }
    }
}

impl<R: BufRead> SyslogReader<R> {
    pub fn new(src: R) -> Self {
        SyslogReader {
            src,
            preprocess: None,
            line_no: 0,
            pending: None,
            counters: SyslogCounters::default(),
            buf: Vec::with_capacity(512),
            done: false,
        }
    }

    pub fn with_preprocessor(mut self, hook: LinePreprocessor) -> Self {
        self.preprocess = Some(hook);
        self
    }

    pub fn counters(&self) -> SyslogCounters {
        self.counters
    }

    fn next_record(&mut self) -> io::Result<Option<SipLogLine>> {
        loop {
            self.buf.clear();
            let n = self.src.read_until(b'\n', &mut self.buf)?;
            if n == 0 {
                return Ok(self.pending.take().map(Pending::finish));
            }
            self.line_no += 1;

            let mut line = match String::from_utf8_lossy(&self.buf) {
                std::borrow::Cow::Borrowed(s) => s.to_string(),
                std::borrow::Cow::Owned(s) => {
                    self.counters.replaced_lines += 1;
                    s
                }
            };
            while line.ends_with('\n') || line.ends_with('\r') {
                line.pop();
            }
            if let Some(hook) = self.preprocess {
                line = hook(&line);
            }

            if line.is_empty() {
                if let Some(p) = self.pending.take() {
                    return Ok(Some(p.finish()));
                }
                continue;
            }

            if line.starts_with(' ') || line.starts_with('\t') {
                match self.pending.as_mut() {
                    Some(p) => {
                        p.raw.push('\n');
                        p.raw.push_str(&line);
                        p.fragment.push(dedent(&line).to_string());
                    }
                    None => self.counters.malformed_headers += 1,
                }
                continue;
            }

            let header = match parse_header(&line) {
                Some((ts, naive)) => {
                    if naive {
                        self.counters.naive_timestamps += 1;
                    }
                    Pending { seq: self.line_no, ts, raw: line, fragment: Vec::new() }
                }
                None => {
                    self.counters.malformed_headers += 1;
                    continue;
                }
            };
            match self.pending.replace(header) {
                Some(p) => return Ok(Some(p.finish())),
                None => continue,
            }
        }
    }
}

impl<R: BufRead> Iterator for SyslogReader<R> {
    type Item = io::Result<SipLogLine>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Ok(Some(rec)) => Some(Ok(rec)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

fn dedent(line: &str) -> &str {
    line.strip_prefix("  ")
        .or_else(|| line.strip_prefix('\t'))
        .or_else(|| line.strip_prefix(' '))
        .unwrap_or(line)
}

/// Parse `<ts> <host> <facility>:` and return the timestamp plus whether it
/// lacked a timezone.
fn parse_header(line: &str) -> Option<(DateTime<Utc>, bool)> {
    let mut parts = line.splitn(3, ' ');
    let ts_token = parts.next()?;
    let _host = parts.next()?;
    let rest = parts.next()?;
    let colon = rest.find(':')?;
    if rest[..colon].is_empty() || rest[..colon].contains(' ') {
        return None;
    }
    if let Ok(ts) = DateTime::parse_from_rfc3339(ts_token) {
        return Some((ts.with_timezone(&Utc), false));
    }
    if let Ok(naive) = NaiveDateTime::parse_from_str(ts_token, "%Y-%m-%dT%H:%M:%S%.f") {
        return Some((naive.and_utc(), true));
    }
    None
}

/// Open a syslog file, transparently decompressing gzip.
pub fn open_syslog(path: &Path) -> io::Result<SyslogReader<Box<dyn BufRead>>> {
    let mut reader = BufReader::with_capacity(64 * 1024, File::open(path)?);
    let magic = reader.fill_buf()?;
    let gz = magic.len() >= 2 && magic[0] == 0x1f && magic[1] == 0x8b;
    let src: Box<dyn BufRead> = if gz {
        Box::new(BufReader::with_capacity(64 * 1024, GzDecoder::new(reader)))
    } else {
        Box::new(reader)
    };
    Ok(SyslogReader::new(src))
}
