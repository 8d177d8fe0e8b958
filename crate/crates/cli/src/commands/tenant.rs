//! `usage` and `holdmap`: tenant-side report analysis.

use std::collections::BTreeMap;
use std::fs::File;

use serde_json::json;
use teamscope_core::tenant::{
    aggregate_usage, hold_map, parse_usage_csv, render_usage_table, top_users, DeviceClass,
    HoldScenario, RankMetric, UsageSummary, Window,
};

use crate::commands::{require_input, CmdError, CmdResult};
use crate::output::{emit, render_csv, render_json, render_table, OutputFormat};
use crate::{HoldmapArgs, MetricArg, RunConfig, UsageArgs};

pub fn run_usage(config: &RunConfig, args: &UsageArgs) -> CmdResult {
    require_input(&args.input)?;
    let file = File::open(&args.input)
        .map_err(|e| CmdError::Input(format!("{}: {e}", args.input.display())))?;
    let parse = parse_usage_csv(file)
        .map_err(|e| CmdError::Input(format!("{}: {e}", args.input.display())))?;
    if !parse.row_errors.is_empty() {
        eprintln!("{} usage rows skipped", parse.row_errors.len());
        if config.verbose > 0 {
            for err in &parse.row_errors {
                eprintln!("  row {}: {}", err.row, err.message);
            }
        }
    }
    if parse.records.is_empty() {
        return Err(CmdError::Input(format!(
            "{}: no usable usage rows",
            args.input.display()
        )));
    }

    let bytes = match args.top {
        Some(n) => {
            let metric = match args.metric {
                MetricArg::Audio => RankMetric::Audio,
                MetricArg::Video => RankMetric::Video,
            };
            let ranked = top_users(&parse.records, n, metric);
            let rows: Vec<Vec<String>> = ranked
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        (i + 1).to_string(),
                        r.user_id.clone(),
                        r.audio_time.clone(),
                        r.video_time.clone(),
                    ]
                })
                .collect();
            match config.format {
                OutputFormat::Text => render_table(
                    &["Rank", "User", "Audio time", "Video time"],
                    &rows,
                    &[1, 2, 3],
                )
                .into_bytes(),
                OutputFormat::Csv => {
                    render_csv(&["rank", "user_id", "audio_time", "video_time"], &rows)?
                }
                OutputFormat::Structured => render_json(&json!(ranked
                    .iter()
                    .enumerate()
                    .map(|(i, r)| json!({
                        "rank": i + 1,
                        "user_id": r.user_id,
                        "audio_time": r.audio_time,
                        "video_time": r.video_time,
                        "metric_seconds": r.metric_seconds,
                    }))
                    .collect::<Vec<_>>())),
            }
        }
        None => {
            let summaries = aggregate_usage(&parse.records);
            match config.format {
                OutputFormat::Text => render_usage_table(&summaries).into_bytes(),
                OutputFormat::Csv => summary_csv(&summaries)?,
                OutputFormat::Structured => render_json(&summary_json(&summaries)),
            }
        }
    };
    emit(config.out.as_deref(), &bytes)
}

fn summary_csv(summaries: &BTreeMap<Window, UsageSummary>) -> Result<Vec<u8>, CmdError> {
    let mut headers = vec![
        "window".to_string(),
        "total_users".to_string(),
        "one_to_one_calls".to_string(),
        "total_audio_seconds".to_string(),
        "total_video_seconds".to_string(),
        "avg_audio_hours_per_user".to_string(),
        "avg_video_hours_per_user".to_string(),
    ];
    for class in DeviceClass::ALL {
        headers.push(format!("{}_users", class.to_string().to_ascii_lowercase()));
    }
    headers.push("pstn_calls".to_string());
    headers.push("pstn_duration_seconds".to_string());
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();

    let rows: Vec<Vec<String>> = summaries
        .values()
        .map(|s| {
            let mut row = vec![
                s.window.to_string(),
                s.total_users.to_string(),
                s.total_one_to_one_calls.to_string(),
                s.total_audio_seconds.to_string(),
                s.total_video_seconds.to_string(),
                s.avg_audio_hours_per_user.to_string(),
                s.avg_video_hours_per_user.to_string(),
            ];
            for class in DeviceClass::ALL {
                row.push(s.device_counts.get(&class).copied().unwrap_or(0).to_string());
            }
            row.push(s.pstn_calls_total.to_string());
            row.push(s.pstn_duration_seconds.to_string());
            row
        })
        .collect();
    render_csv(&header_refs, &rows)
}

fn summary_json(summaries: &BTreeMap<Window, UsageSummary>) -> serde_json::Value {
    let mut windows = serde_json::Map::new();
    for (window, s) in summaries {
        let devices: BTreeMap<String, u64> =
            s.device_counts.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        windows.insert(
            window.to_string(),
            json!({
                "total_users": s.total_users,
                "one_to_one_calls": s.total_one_to_one_calls,
                "total_audio_seconds": s.total_audio_seconds,
                "total_video_seconds": s.total_video_seconds,
                "avg_audio_hours_per_user": s.avg_audio_hours_per_user,
                "avg_video_hours_per_user": s.avg_video_hours_per_user,
                "device_counts": devices,
                "pstn_calls": s.pstn_calls_total,
                "pstn_duration_seconds": s.pstn_duration_seconds,
            }),
        );
    }
    serde_json::Value::Object(windows)
}

pub fn run_holdmap(config: &RunConfig, args: &HoldmapArgs) -> CmdResult {
    let filter = match &args.scenario {
        Some(text) => Some(HoldScenario::parse(text).map_err(|e| CmdError::Usage(e.to_string()))?),
        None => None,
    };
    let rows: Vec<(HoldScenario, &str)> = hold_map()
        .into_iter()
        .filter(|(s, _)| filter.is_none_or(|f| f == *s))
        .collect();

    let bytes = match config.format {
        OutputFormat::Text => {
            let mut out = String::new();
            for (scenario, location) in &rows {
                out.push_str(&format!("{}: {location}\n", scenario.short_name()));
                if config.verbose > 0 {
                    out.push_str(&format!("    {}\n", scenario.description()));
                }
            }
            out.into_bytes()
        }
        OutputFormat::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|(s, loc)| {
                    vec![s.short_name().to_string(), loc.to_string(), s.description().to_string()]
                })
                .collect();
            render_csv(&["scenario", "location", "description"], &cells)?
        }
        OutputFormat::Structured => render_json(&json!(rows
            .iter()
            .map(|(s, loc)| json!({
                "scenario": s.short_name(),
                "description": s.description(),
                "location": loc,
            }))
            .collect::<Vec<_>>())),
    };
    emit(config.out.as_deref(), &bytes)
}
