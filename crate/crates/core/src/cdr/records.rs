//! Call-detail-record export parsing.
//!
//! SBC exports vary in column naming; headers are matched case-insensitively
//! after normalizing separators, and deployments can bolt on extra aliases.
//! Row-level problems are collected, not fatal: one mangled row must not
//! discard an evidence file.

use std::fmt;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegDirection {
    Incoming,
    Outgoing,
}

impl fmt::Display for LegDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LegDirection::Incoming => "Incoming",
            LegDirection::Outgoing => "Outgoing",
        })
    }
}

/// One trunk of a call as the SBC logged it. `remote_ip` stays verbatim
/// text: exports in the wild truncate or redact it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdrLeg {
    pub call_end_time: String,
    pub endpoint_type: String,
    pub ip_group: String,
    pub caller: String,
    pub callee: String,
    pub direction: LegDirection,
    pub remote_ip: String,
    pub duration: Option<u32>,
    pub termination_reason: String,
    pub session_id: String,
}

#[derive(Debug, Error)]
pub enum CdrError {
    #[error("required column missing: {0}")]
    MissingColumn(&'static str),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A row that could not become a leg; kept for the report, never fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub source: String,
    pub row: u64,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct CdrParse {
    pub legs: Vec<CdrLeg>,
    pub row_errors: Vec<RowError>,
}

const COL_CALL_END_TIME: &str = "call end time";
const COL_ENDPOINT_TYPE: &str = "endpoint type";
const COL_IP_GROUP: &str = "ip group";
const COL_CALLER: &str = "caller";
const COL_CALLEE: &str = "callee";
const COL_DIRECTION: &str = "direction";
const COL_REMOTE_IP: &str = "remote ip";
const COL_DURATION: &str = "duration";
const COL_TERMINATION_REASON: &str = "termination reason";
const COL_SESSION_ID: &str = "session id";

const REQUIRED: [&str; 6] =
    [COL_IP_GROUP, COL_CALLER, COL_CALLEE, COL_DIRECTION, COL_TERMINATION_REASON, COL_SESSION_ID];

/// Extra header-name spellings on top of the built-in normalization
/// (lowercase, `_`/`-` as spaces, collapsed whitespace, BOM stripped).
#[derive(Debug, Default, Clone)]
pub struct CdrColumns {
    aliases: Vec<(String, &'static str)>,
}

impl CdrColumns {
    pub fn alias(mut self, alias: &str, canonical: &'static str) -> Self {
        self.aliases.push((normalize_header(alias), canonical));
        self
    }

    fn resolve(&self, header: &str) -> Option<&'static str> {
        let norm = normalize_header(header);
        for canonical in [
            COL_CALL_END_TIME,
            COL_ENDPOINT_TYPE,
            COL_IP_GROUP,
            COL_CALLER,
            COL_CALLEE,
            COL_DIRECTION,
            COL_REMOTE_IP,
            COL_DURATION,
            COL_TERMINATION_REASON,
            COL_SESSION_ID,
        ] {
            if norm == canonical {
                return Some(canonical);
            }
        }
        self.aliases.iter().find(|(a, _)| *a == norm).map(|(_, c)| *c)
    }
}

fn normalize_header(s: &str) -> String {
    s.trim_start_matches('\u{feff}')
        .to_ascii_lowercase()
        .replace(['_', '-'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parse `"HH:MM:SS"` to seconds.
pub fn parse_hms(s: &str) -> Option<u32> {
    let mut parts = s.split(':');
    let h: u32 = parts.next()?.parse().ok()?;
    let m: u32 = parts.next()?.parse().ok()?;
    let sec: u32 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || m > 59 || sec > 59 {
        return None;
    }
    Some(h * 3600 + m * 60 + sec)
}

/// Format seconds as `"HH:MM:SS"`; inverse of [`parse_hms`] for hours ≤ 99.
pub fn format_hms(secs: u32) -> String {
    format!("{:02}:{:02}:{:02}", secs / 3600, (secs / 60) % 60, secs % 60)
}

pub fn parse_cdr<R: Read>(source: R) -> Result<CdrParse, CdrError> {
    parse_cdr_with(source, &CdrColumns::default(), "<stream>")
}

pub fn parse_cdr_with<R: Read>(
    source: R,
    columns: &CdrColumns,
    source_name: &str,
) -> Result<CdrParse, CdrError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = reader.headers()?.clone();

    let mut index: Vec<Option<usize>> = vec![None; 10];
    let slot = |name: &'static str| -> usize {
        match name {
            COL_CALL_END_TIME => 0,
            COL_ENDPOINT_TYPE => 1,
            COL_IP_GROUP => 2,
            COL_CALLER => 3,
            COL_CALLEE => 4,
            COL_DIRECTION => 5,
            COL_REMOTE_IP => 6,
            COL_DURATION => 7,
            COL_TERMINATION_REASON => 8,
            COL_SESSION_ID => 9,
            _ => unreachable!("unknown canonical column"),
        }
    };
    for (i, h) in headers.iter().enumerate() {
        if let Some(canonical) = columns.resolve(h) {
            index[slot(canonical)] = Some(i);
        }
    }
    for name in REQUIRED {
        if index[slot(name)].is_none() {
            return Err(CdrError::MissingColumn(name));
        }
    }

    let cell = |rec: &csv::StringRecord, name: &'static str| -> String {
        index[slot(name)]
            .and_then(|i| rec.get(i))
            .unwrap_or("")
            .trim()
            .to_string()
    };

    let mut out = CdrParse::default();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx as u64 + 2;
        let mut fail = |message: String| {
            out.row_errors.push(RowError { source: source_name.to_string(), row, message });
        };
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                fail(e.to_string());
                continue;
            }
        };

        let session_id = cell(&record, COL_SESSION_ID);
        if session_id.is_empty() {
            fail("empty session id".to_string());
            continue;
        }
        let direction = match cell(&record, COL_DIRECTION).to_ascii_lowercase().as_str() {
            "incoming" => LegDirection::Incoming,
            "outgoing" => LegDirection::Outgoing,
            other => {
                fail(format!("unrecognized direction {other:?}"));
                continue;
            }
        };
        let duration_cell = cell(&record, COL_DURATION);
        let duration = if duration_cell.is_empty() {
            None
        } else {
            match parse_hms(&duration_cell) {
                Some(secs) => Some(secs),
                None => {
                    fail(format!("unparseable duration {duration_cell:?}"));
                    continue;
                }
            }
        };
        let termination_reason = cell(&record, COL_TERMINATION_REASON);
        if duration.is_none() && termination_reason.eq_ignore_ascii_case("NORMAL_CALL_CLEAR") {
            fail("cleared call without a duration".to_string());
            continue;
        }

        out.legs.push(CdrLeg {
            call_end_time: cell(&record, COL_CALL_END_TIME),
            endpoint_type: cell(&record, COL_ENDPOINT_TYPE),
            ip_group: cell(&record, COL_IP_GROUP),
            caller: cell(&record, COL_CALLER),
            callee: cell(&record, COL_CALLEE),
            direction,
            remote_ip: cell(&record, COL_REMOTE_IP),
            duration,
            termination_reason,
            session_id,
        });
    }
    Ok(out)
}

/// Ingest every `*.csv` in a directory, in file-name order, as one export.
pub fn parse_cdr_dir(dir: &Path, columns: &CdrColumns) -> Result<CdrParse, CdrError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
        .collect();
    paths.sort();

    let mut out = CdrParse::default();
    for path in paths {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let file = std::fs::File::open(&path)?;
        let mut part = parse_cdr_with(file, columns, &name)?;
        out.legs.append(&mut part.legs);
        out.row_errors.append(&mut part.row_errors);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "CALL END TIME,ENDPOINT TYPE,IP GROUP,CALLER,CALLEE,DIRECTION,REMOTE IP,DURATION,TERMINATION REASON,SESSION ID";

    #[test]
    fn parses_a_cleared_outgoing_row() {
        let csv = format!(
            "{HEADER}\n13:10:18.408,SBC,IPG_PBX,+39041220444,+390421364,Outgoing,132.100.50.10,00:06:50,NORMAL_CALL_CLEAR,db01ef9:65\n"
        );
        let parsed = parse_cdr(csv.as_bytes()).unwrap();
        assert!(parsed.row_errors.is_empty());
        let leg = &parsed.legs[0];
        assert_eq!(leg.duration, Some(410));
        assert_eq!(leg.direction, LegDirection::Outgoing);
        assert_eq!(leg.ip_group, "IPG_PBX");
        assert_eq!(leg.caller, "+39041220444");
        assert_eq!(leg.session_id, "db01ef9:65");
    }

    #[test]
    fn an_empty_duration_stays_absent() {
        let csv = format!(
            "{HEADER}\n13:04:28.658,SBC,IPG_TEAMS,4102,+390412207,Outgoing,52.114.75.24,,NO_ANSWER,db01ef9:66\n"
        );
        let parsed = parse_cdr(csv.as_bytes()).unwrap();
        assert_eq!(parsed.legs[0].duration, None);
        assert_eq!(parsed.legs[0].termination_reason, "NO_ANSWER");
    }

    #[test]
    fn a_header_only_file_is_empty_not_an_error() {
        let parsed = parse_cdr(format!("{HEADER}\n").as_bytes()).unwrap();
        assert!(parsed.legs.is_empty());
        assert!(parsed.row_errors.is_empty());
    }

    #[test]
    fn a_missing_required_column_is_fatal() {
        let csv = "CALL END TIME,IP GROUP,CALLER,CALLEE,DIRECTION,REMOTE IP,DURATION,TERMINATION REASON\n";
        match parse_cdr(csv.as_bytes()) {
            Err(CdrError::MissingColumn(col)) => assert_eq!(col, "session id"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn headers_match_through_bom_case_and_separators() {
        let csv = "\u{feff}call_end_time,Endpoint-Type,ip_group,Caller,Callee,direction,remote_ip,Duration,Termination_Reason,Session_Id\n\
                   13:00:00,SBC,IPG_TEAMS,a,b,Incoming,1.2.3.4,00:00:05,NORMAL_CALL_CLEAR,s1\n";
        let parsed = parse_cdr(csv.as_bytes()).unwrap();
        assert_eq!(parsed.legs.len(), 1);
        assert_eq!(parsed.legs[0].duration, Some(5));
    }

    #[test]
    fn custom_aliases_map_vendor_headers() {
        let csv = "time,grp,from,to,dir,ip,dur,reason,sid\n\
                   13:00:00,IPG_PBX,a,b,Outgoing,1.2.3.4,,BUSY,s9\n";
        let columns = CdrColumns::default()
            .alias("time", "call end time")
            .alias("grp", "ip group")
            .alias("from", "caller")
            .alias("to", "callee")
            .alias("dir", "direction")
            .alias("ip", "remote ip")
            .alias("dur", "duration")
            .alias("reason", "termination reason")
            .alias("sid", "session id");
        let parsed = parse_cdr_with(csv.as_bytes(), &columns, "vendor.csv").unwrap();
        assert_eq!(parsed.legs[0].session_id, "s9");
        assert_eq!(parsed.legs[0].ip_group, "IPG_PBX");
    }

    #[test]
    fn bad_rows_are_collected_rather_than_fatal() {
        let csv = format!(
            "{HEADER}\n\
             13:00:00,SBC,IPG_PBX,a,b,Sideways,1.2.3.4,,BUSY,s1\n\
             13:00:01,SBC,IPG_PBX,a,b,Outgoing,1.2.3.4,junk,BUSY,s2\n\
             13:00:02,SBC,IPG_PBX,a,b,Outgoing,1.2.3.4,,NORMAL_CALL_CLEAR,s3\n\
             13:00:03,SBC,IPG_PBX,a,b,Outgoing,1.2.3.4,,BUSY,\n\
             13:00:04,SBC,IPG_PBX,a,b,Outgoing,1.2.3.4,00:00:10,NORMAL_CALL_CLEAR,s5\n"
        );
        let parsed = parse_cdr(csv.as_bytes()).unwrap();
        assert_eq!(parsed.legs.len(), 1);
        assert_eq!(parsed.legs[0].session_id, "s5");
        assert_eq!(parsed.row_errors.len(), 4);
        assert_eq!(parsed.row_errors[0].row, 2);
        assert!(parsed.row_errors[0].message.contains("direction"));
        assert!(parsed.row_errors[2].message.contains("without a duration"));
    }

    #[test]
    fn duration_text_round_trips() {
        for secs in [0u32, 1, 59, 60, 410, 3599, 3600, 86_399, 99 * 3600 + 59 * 60 + 59] {
            assert_eq!(parse_hms(&format_hms(secs)), Some(secs));
        }
        assert_eq!(parse_hms("00:06:50"), Some(410));
        assert_eq!(parse_hms("00:60:00"), None);
        assert_eq!(parse_hms("00:00"), None);
        assert_eq!(parse_hms("a:b:c"), None);
    }

    #[test]
    fn duration_text_round_trips_on_random_values() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xd42a);
        for _ in 0..1_000 {
            let secs = rng.gen_range(0..360_000u32);
            assert_eq!(parse_hms(&format_hms(secs)), Some(secs));
            let text = format!(
                "{:02}:{:02}:{:02}",
                rng.gen_range(0..100u32),
                rng.gen_range(0..60u32),
                rng.gen_range(0..60u32)
            );
            assert_eq!(format_hms(parse_hms(&text).unwrap()), text);
        }
    }

    #[test]
    fn directory_ingest_follows_file_name_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("b.csv"),
            format!("{HEADER}\n13:00:00,SBC,IPG_PBX,a,b,Outgoing,1.1.1.1,,BUSY,later\n"),
        )
        .unwrap();
        std::fs::write(
            dir.path().join("a.csv"),
            format!("{HEADER}\n12:00:00,SBC,IPG_PBX,a,b,Outgoing,1.1.1.1,,BUSY,earlier\n"),
        )
        .unwrap();
        std::fs::write(dir.path().join("notes.txt"), "not a cdr").unwrap();
        let parsed = parse_cdr_dir(dir.path(), &CdrColumns::default()).unwrap();
        let ids: Vec<&str> = parsed.legs.iter().map(|l| l.session_id.as_str()).collect();
        assert_eq!(ids, ["earlier", "later"]);
    }
}
