//! `classify` and `wt-detect`: service-traffic labeling and the
//! Walkie-Talkie verdict.

use std::fmt::Write as _;

use teamscope_core::capture::build_conversations;
use teamscope_core::classify::{
    classify_flows, detect_walkie_talkie, extract_dns, FlowLabel, NameMatch, WtOptions, WtReport,
    WtVerdict,
};

use crate::commands::{load_capture, load_ranges, CmdError, CmdResult};
use crate::output::{emit, render_csv, render_table, OutputFormat};
use crate::{ClassifyArgs, RunConfig, WtDetectArgs};

pub fn run_classify(config: &RunConfig, args: &ClassifyArgs) -> CmdResult {
    let packets = load_capture(&args.pcap, config.verbose)?;
    let ranges = load_ranges(config)?;
    let conversations = build_conversations(&packets);
    let (dns, malformed) = extract_dns(&packets);
    if malformed > 0 && config.verbose > 0 {
        eprintln!("{malformed} malformed DNS payloads ignored");
    }
    let labels = classify_flows(&conversations, &ranges, &dns, args.gateway, args.client);

    let bytes = match config.format {
        OutputFormat::Text => {
            let rows = label_rows(&labels);
            render_table(
                &["Proto", "Endpoint A", "Endpoint B", "Label", "Range", "DNS Names", "Remote"],
                &rows,
                &[0, 1, 2, 3, 4, 5, 6],
            )
            .into_bytes()
        }
        OutputFormat::Csv => render_csv(
            &["proto", "endpoint_a", "endpoint_b", "label", "matched_range", "dns_names", "remote"],
            &label_rows(&labels),
        )?,
        OutputFormat::Structured => {
            let mut s = serde_json::to_string_pretty(&labels).expect("labels serialize");
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(config.out.as_deref(), &bytes)
}

fn label_rows(labels: &[FlowLabel]) -> Vec<Vec<String>> {
    labels
        .iter()
        .map(|l| {
            vec![
                l.key.proto.to_string(),
                l.key.a.to_string(),
                l.key.b.to_string(),
                l.label.to_string(),
                l.matched_range.clone().unwrap_or_default(),
                l.dns_names.join(";"),
                l.remote.map(|e| e.to_string()).unwrap_or_default(),
            ]
        })
        .collect()
}

pub fn run_wt_detect(config: &RunConfig, args: &WtDetectArgs) -> CmdResult {
    let packets = load_capture(&args.pcap, config.verbose)?;
    let ranges = load_ranges(config)?;
    let options = WtOptions {
        wt_name: args.wt_name.clone(),
        name_match: if args.suffix_match { NameMatch::Suffix } else { NameMatch::Exact },
        idle_gap_us: (args.idle_gap * 1_000_000.0).round() as u64,
        peer_addr: args.peer,
    };
    let report = detect_walkie_talkie(&packets, args.client, &ranges, &options)
        .map_err(|e| CmdError::Usage(e.to_string()))?;

    let bytes = match config.format {
        OutputFormat::Text => render_report_text(&report).into_bytes(),
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = report
                .sessions
                .iter()
                .map(|s| {
                    vec![
                        format!("{:.3}", s.start),
                        format!("{:.3}", s.end),
                        s.flows.len().to_string(),
                        s.dns_hits.to_string(),
                        s.wt_hub_addrs.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";"),
                    ]
                })
                .collect();
            render_csv(&["start", "end", "flows", "dns_hits", "wt_hub_addrs"], &rows)?
        }
        OutputFormat::Structured => report.to_json_string().into_bytes(),
    };
    emit(config.out.as_deref(), &bytes)?;

    if args.strict && report.verdict == WtVerdict::Inconsistent {
        return Err(CmdError::Inconsistent(format!(
            "verdict INCONSISTENT for client {}",
            args.client
        )));
    }
    Ok(())
}

fn render_report_text(report: &WtReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "schema: {}", report.schema);
    let _ = writeln!(out, "client: {}", report.client_addr);
    let _ = writeln!(out, "verdict: {}", report.verdict);
    let _ = writeln!(out, "sip packets: {}", report.sip_packets_found);
    let _ = writeln!(
        out,
        "peer direct traffic: {}",
        if report.peer_direct_traffic_found { "yes" } else { "no" }
    );
    let _ = writeln!(out, "sessions: {}", report.sessions.len());
    for (i, s) in report.sessions.iter().enumerate() {
        let hubs = s.wt_hub_addrs.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(
            out,
            "  {}: {:.3}s..{:.3}s flows={} dns_hits={} hubs={}",
            i + 1,
            s.start,
            s.end,
            s.flows.len(),
            s.dns_hits,
            if hubs.is_empty() { "-".to_string() } else { hubs }
        );
    }
    if !report.notes.is_empty() {
        let _ = writeln!(out, "notes:");
        for note in &report.notes {
            let _ = writeln!(out, "  - {note}");
        }
    }
    out
}
