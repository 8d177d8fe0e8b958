//! Aggregation and rendering of correlated calls.

use std::collections::BTreeMap;
use std::io::Write;

use super::correlate::CorrelatedCall;
use super::records::format_hms;

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct CdrSummary {
    pub total_calls: u64,
    pub by_outcome: BTreeMap<String, u64>,
    pub by_direction: BTreeMap<String, u64>,
    /// Sum of the durations of calls that carried one.
    pub total_duration_secs: u64,
    /// Lexical min/max of the export's end-time stamps, format preserved.
    pub time_range: Option<(String, String)>,
}

pub fn summarize_cdr(calls: &[CorrelatedCall]) -> CdrSummary {
    let mut summary = CdrSummary { total_calls: calls.len() as u64, ..CdrSummary::default() };
    for call in calls {
        *summary.by_outcome.entry(call.outcome.to_string()).or_default() += 1;
        *summary.by_direction.entry(call.overall_direction.to_string()).or_default() += 1;
        summary.total_duration_secs += u64::from(call.duration.unwrap_or(0));
        for stamp in [&call.teams_leg.call_end_time, &call.pbx_leg.call_end_time] {
            if stamp.is_empty() {
                continue;
            }
            summary.time_range = match summary.time_range.take() {
                None => Some((stamp.clone(), stamp.clone())),
                Some((lo, hi)) => {
                    Some((lo.min(stamp.clone()), hi.max(stamp.clone())))
                }
            };
        }
    }
    summary
}

pub fn render_summary(summary: &CdrSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!("calls: {}\n", summary.total_calls));
    out.push_str("outcomes:\n");
    for (outcome, n) in &summary.by_outcome {
        out.push_str(&format!("  {outcome}: {n}\n"));
    }
    out.push_str("directions:\n");
    for (direction, n) in &summary.by_direction {
        out.push_str(&format!("  {direction}: {n}\n"));
    }
    let secs = summary.total_duration_secs;
    let hms = format_hms(u32::try_from(secs).unwrap_or(u32::MAX));
    out.push_str(&format!("total duration: {hms} ({secs} s)\n"));
    match &summary.time_range {
        Some((lo, hi)) => out.push_str(&format!("time range: {lo} .. {hi}\n")),
        None => out.push_str("time range: none\n"),
    }
    out
}

pub const CALL_CSV_HEADER: [&str; 10] = [
    "session_id",
    "direction",
    "outcome",
    "duration",
    "caller",
    "callee",
    "call_end_time",
    "teams_reason",
    "pbx_reason",
    "reason_mismatch",
];

/// Write correlated calls as CSV. Caller and callee come from the
/// originating leg; duration is `HH:MM:SS` or empty when absent.
pub fn write_calls_csv<W: Write>(calls: &[CorrelatedCall], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CALL_CSV_HEADER)?;
    for call in calls {
        let origin = call.originating_leg();
        w.write_record([
            call.session_id.as_str(),
            &call.overall_direction.to_string(),
            &call.outcome.to_string(),
            &call.duration.map(format_hms).unwrap_or_default(),
            origin.caller.as_str(),
            origin.callee.as_str(),
            origin.call_end_time.as_str(),
            call.teams_leg.termination_reason.as_str(),
            call.pbx_leg.termination_reason.as_str(),
            if call.reason_mismatch { "yes" } else { "no" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::correlate::correlate_legs;
    use super::super::records::parse_cdr;
    use super::*;

    const FIG_CSV: &str = "\
CALL END TIME,ENDPOINT TYPE,IP GROUP,CALLER,CALLEE,DIRECTION,REMOTE IP,DURATION,TERMINATION REASON,SESSION ID
13:10:18.408,SBC,IPG_PBX,+39041220444,+390421364,Outgoing,132.100.50.10,00:06:50,NORMAL_CALL_CLEAR,db01ef9:65
13:10:18.408,SBC,IPG_TEAMS,+39041220444,+390421364,Incoming,52.114.75.24,00:06:50,NORMAL_CALL_CLEAR,db01ef9:65
13:04:28.658,SBC,IPG_TEAMS,4102,+390412207,Outgoing,52.114.75.24,,NO_ANSWER,db01ef9:66
13:04:28.650,SBC,IPG_PBX,4102,+390412207,Incoming,132.100.50.10,,NO_ANSWER,db01ef9:66
13:01:18.588,SBC,IPG_PBX,+39041220444,+390421365,Outgoing,132.100.50.10,,GENERAL_FAILED,db01ef9:67
13:01:18.588,SBC,IPG_TEAMS,+39041220444,+390721365,Incoming,52.114.75.24,,GENERAL_FAILED,db01ef9:67
12:54:25.078,SBC,IPG_TEAMS,+3904122043,+390412203,Incoming,52.114.75.24,,BUSY,db01ef9:68
12:54:25.078,SBC,IPG_PBX,+3904122043,+390712203,Outgoing,132.100.50.10,,BUSY,db01ef9:68
12:20:36.392,SBC,IPG_TEAMS,4112,+390412207,Outgoing,52.114.75.24,,NO_ANSWER,db01ef9:64
12:20:36.383,SBC,IPG_PBX,4112,+390712207,Incoming,132.100.50.10,,NO_ANSWER,db01ef9:64
";

    #[test]
    fn the_ten_gateway_rows_summarize_to_five_calls() {
        let parsed = parse_cdr(FIG_CSV.as_bytes()).unwrap();
        assert_eq!(parsed.legs.len(), 10);
        let corr = correlate_legs(parsed.legs);
        assert_eq!(corr.calls.len(), 5);
        assert!(corr.orphans.is_empty());

        let summary = summarize_cdr(&corr.calls);
        assert_eq!(summary.total_calls, 5);
        assert_eq!(summary.by_outcome["COMPLETED"], 1);
        assert_eq!(summary.by_outcome["NO_ANSWER"], 2);
        assert_eq!(summary.by_outcome["FAILED"], 1);
        assert_eq!(summary.by_outcome["BUSY"], 1);
        assert_eq!(summary.total_duration_secs, 410);
        assert_eq!(
            summary.time_range,
            Some(("12:20:36.383".to_string(), "13:10:18.408".to_string()))
        );

        let completed = corr.calls.iter().find(|c| c.session_id == "db01ef9:65").unwrap();
        assert_eq!(completed.overall_direction.to_string(), "TEAMS_TO_PSTN");
        assert_eq!(completed.duration, Some(410));
    }

    #[test]
    fn outcome_counts_always_sum_to_the_total() {
        let parsed = parse_cdr(FIG_CSV.as_bytes()).unwrap();
        let corr = correlate_legs(parsed.legs);
        let summary = summarize_cdr(&corr.calls);
        assert_eq!(summary.by_outcome.values().sum::<u64>(), summary.total_calls);
        assert_eq!(summary.by_direction.values().sum::<u64>(), summary.total_calls);
    }

    #[test]
    fn an_empty_export_summarizes_to_zero() {
        let summary = summarize_cdr(&[]);
        assert_eq!(summary.total_calls, 0);
        assert!(summary.by_outcome.is_empty());
        assert_eq!(summary.total_duration_secs, 0);
        assert_eq!(summary.time_range, None);
        assert!(render_summary(&summary).contains("time range: none"));
    }

    #[test]
    fn the_call_csv_lists_one_row_per_call() {
        let parsed = parse_cdr(FIG_CSV.as_bytes()).unwrap();
        let corr = correlate_legs(parsed.legs);
        let mut buf = Vec::new();
        write_calls_csv(&corr.calls, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], CALL_CSV_HEADER.join(","));
        assert!(lines.iter().any(|l| l.contains("db01ef9:65,TEAMS_TO_PSTN,COMPLETED,00:06:50")));
        assert!(lines.iter().any(|l| l.contains("db01ef9:68,TEAMS_TO_PSTN,BUSY,,")));
    }
}
