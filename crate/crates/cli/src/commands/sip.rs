//! `sip-split` and `sip-select`: dialog bundles and window pre-selection.

use std::fmt::Write as _;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde_json::json;
use teamscope_core::siplog::{open_syslog, select_window, split_to_bundles, SipLogLine};

use crate::commands::{require_input, CmdError, CmdResult};
use crate::output::{emit, render_csv, render_json, OutputFormat};
use crate::{RunConfig, SipSelectArgs, SipSplitArgs};

pub fn run_split(config: &RunConfig, args: &SipSplitArgs) -> CmdResult {
    require_input(&args.log)?;
    let reader = open_syslog(&args.log)
        .map_err(|e| CmdError::Input(format!("{}: {e}", args.log.display())))?;
    let summary = split_to_bundles(reader, &args.out_dir)
        .map_err(|e| CmdError::Input(format!("splitting {}: {e}", args.log.display())))?;

    let bytes = match config.format {
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "dialogs: {}", summary.dialogs);
            let _ = writeln!(out, "messages: {}", summary.messages);
            let _ = writeln!(out, "unparsed fragments: {}", summary.unparsed_fragments);
            let _ = writeln!(out, "index: {}", summary.index_path.display());
            out.into_bytes()
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = summary
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.call_id.clone(),
                        r.start.clone(),
                        r.end.clone(),
                        r.participants.clone(),
                        r.completeness.clone(),
                        r.message_count.to_string(),
                        r.file_name.clone(),
                    ]
                })
                .collect();
            render_csv(
                &["call_id", "start", "end", "participants", "completeness", "message_count", "file"],
                &rows,
            )?
        }
        OutputFormat::Structured => render_json(&json!({
            "dialogs": summary.dialogs,
            "messages": summary.messages,
            "unparsed_fragments": summary.unparsed_fragments,
            "index": summary.index_path.display().to_string(),
            "rows": summary.rows.iter().map(|r| json!({
                "call_id": r.call_id,
                "start": r.start,
                "end": r.end,
                "participants": r.participants,
                "completeness": r.completeness,
                "message_count": r.message_count,
                "file": r.file_name,
            })).collect::<Vec<_>>(),
        })),
    };
    emit(config.out.as_deref(), &bytes)
}

fn parse_time(text: &str) -> Result<DateTime<Utc>, CmdError> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(t.with_timezone(&Utc));
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S%.f") {
        return Ok(t.and_utc());
    }
    Err(CmdError::Usage(format!(
        "cannot parse time {text:?}; use RFC 3339 or YYYY-MM-DDTHH:MM:SS"
    )))
}

pub fn run_select(config: &RunConfig, args: &SipSelectArgs) -> CmdResult {
    let from = parse_time(&args.from)?;
    let to = parse_time(&args.to)?;
    require_input(&args.log)?;
    let reader = open_syslog(&args.log)
        .map_err(|e| CmdError::Input(format!("{}: {e}", args.log.display())))?;
    let mut lines: Vec<SipLogLine> = Vec::new();
    for record in reader {
        lines.push(record.map_err(|e| CmdError::Input(format!("{}: {e}", args.log.display())))?);
    }
    let selected = select_window(&lines, from, to, args.participant.as_deref())
        .map_err(|e| CmdError::Usage(e.to_string()))?;

    let bytes = match config.format {
        OutputFormat::Text => {
            let mut out = String::new();
            for record in &selected {
                out.push_str(&record.raw);
                out.push('\n');
            }
            out.into_bytes()
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = selected
                .iter()
                .map(|r| vec![r.seq.to_string(), r.ts.to_rfc3339(), r.raw.clone()])
                .collect();
            render_csv(&["seq", "ts", "record"], &rows)?
        }
        OutputFormat::Structured => render_json(&json!(selected
            .iter()
            .map(|r| json!({"seq": r.seq, "ts": r.ts.to_rfc3339(), "record": r.raw}))
            .collect::<Vec<_>>())),
    };
    emit(config.out.as_deref(), &bytes)
}
