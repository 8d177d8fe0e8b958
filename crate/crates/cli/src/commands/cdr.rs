//! `cdr-correlate`: two-leg export → correlated calls and a summary.

use std::fmt::Write as _;
use std::fs::File;

use serde_json::json;
use teamscope_core::cdr::{
    correlate_legs_with, parse_cdr, parse_cdr_dir, summarize_cdr, write_calls_csv, CdrColumns,
    CdrParse, Correlation, GroupNames,
};

use crate::commands::{require_input, CmdError, CmdResult};
use crate::output::{emit, render_json, OutputFormat};
use crate::{CdrCorrelateArgs, RunConfig};

pub fn run(config: &RunConfig, args: &CdrCorrelateArgs) -> CmdResult {
    let parse: CdrParse = match (&args.input, &args.dir) {
        (Some(path), None) => {
            require_input(path)?;
            let file = File::open(path)
                .map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))?;
            parse_cdr(file).map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))?
        }
        (None, Some(dir)) => {
            require_input(dir)?;
            parse_cdr_dir(dir, &CdrColumns::default())
                .map_err(|e| CmdError::Input(format!("{}: {e}", dir.display())))?
        }
        _ => return Err(CmdError::Usage("give exactly one of --in or --dir".to_string())),
    };

    if !parse.row_errors.is_empty() {
        eprintln!("{} rows skipped", parse.row_errors.len());
        if config.verbose > 0 {
            for err in &parse.row_errors {
                eprintln!("  {} row {}: {}", err.source, err.row, err.message);
            }
        }
    }
    if parse.legs.is_empty() {
        return Err(CmdError::Input("no parseable CDR rows".to_string()));
    }

    let mut groups = GroupNames::default();
    if !args.teams_groups.is_empty() {
        groups.teams = args.teams_groups.iter().cloned().collect();
    }
    if !args.pbx_groups.is_empty() {
        groups.pbx = args.pbx_groups.iter().cloned().collect();
    }
    let correlation = correlate_legs_with(parse.legs, &groups);
    let summary = summarize_cdr(&correlation.calls);

    let bytes = match config.format {
        OutputFormat::Text => {
            let mut out = teamscope_core::cdr::render_summary(&summary);
            if !correlation.orphans.is_empty() {
                let _ = writeln!(out, "orphans: {}", correlation.orphans.len());
                for orphan in &correlation.orphans {
                    let _ = writeln!(
                        out,
                        "  {}: {} legs ({})",
                        orphan.session_id,
                        orphan.legs.len(),
                        orphan.diagnostic
                    );
                }
            }
            out.into_bytes()
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_calls_csv(&correlation.calls, &mut buf)
                .map_err(|e| CmdError::Io(format!("cannot serialize csv: {e}")))?;
            buf
        }
        OutputFormat::Structured => render_json(&structured(&correlation, &summary)),
    };
    emit(config.out.as_deref(), &bytes)
}

fn structured(
    correlation: &Correlation,
    summary: &teamscope_core::cdr::CdrSummary,
) -> serde_json::Value {
    json!({
        "summary": {
            "calls": summary.total_calls,
            "outcomes": summary.by_outcome,
            "directions": summary.by_direction,
            "total_duration_secs": summary.total_duration_secs,
            "time_range": summary.time_range,
        },
        "calls": correlation.calls.iter().map(|c| {
            let origin = c.originating_leg();
            json!({
                "session_id": c.session_id,
                "direction": c.overall_direction.to_string(),
                "outcome": c.outcome.to_string(),
                "duration_secs": c.duration,
                "caller": origin.caller,
                "callee": origin.callee,
                "call_end_time": c.teams_leg.call_end_time,
                "reason_mismatch": c.reason_mismatch,
            })
        }).collect::<Vec<_>>(),
        "orphans": correlation.orphans.iter().map(|o| json!({
            "session_id": o.session_id,
            "legs": o.legs.len(),
            "diagnostic": o.diagnostic,
        })).collect::<Vec<_>>(),
    })
}
