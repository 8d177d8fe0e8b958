//! Dialog reconstruction and time/participant windowing.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use thiserror::Error;

use super::message::{parse_sip, SipKind, SipMessage};
use super::reader::SipLogLine;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    NoFinalResponse,
    OrphanResponse,
}

impl fmt::Display for Completeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Completeness::Complete => "COMPLETE",
            Completeness::NoFinalResponse => "NO_FINAL_RESPONSE",
            Completeness::OrphanResponse => "ORPHAN_RESPONSE",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SipDialog {
    pub call_id: String,
    /// Messages in source order, which for a chronological log is time order.
    pub messages: Vec<SipMessage>,
    pub participants: BTreeSet<String>,
    pub start_ts: DateTime<Utc>,
    pub end_ts: DateTime<Utc>,
    pub completeness: Completeness,
}

#[derive(Debug, Default)]
pub struct DialogSplit {
    pub dialogs: Vec<SipDialog>,
    /// Fragments that failed SIP parsing.
    pub unparsed_fragments: u64,
}

/// Incremental per-dialog bookkeeping, shared by the in-memory splitter and
/// the streaming bundle writer so both derive identical completeness.
#[derive(Debug)]
pub(crate) struct DialogMeta {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub participants: BTreeSet<String>,
    pub message_count: u64,
    seen_request: bool,
    initial_cseq: String,
    initial_invite: bool,
    final_code: Option<u16>,
    answered_2xx: bool,
    has_bye: bool,
}

impl DialogMeta {
    pub fn new(msg: &SipMessage) -> Self {
        let mut meta = DialogMeta {
            start: msg.ts,
            end: msg.ts,
            participants: BTreeSet::new(),
            message_count: 0,
            seen_request: false,
            initial_cseq: String::new(),
            initial_invite: false,
            final_code: None,
            answered_2xx: false,
            has_bye: false,
        };
        meta.update(msg);
        meta
    }

    pub fn update(&mut self, msg: &SipMessage) {
        self.message_count += 1;
        self.start = self.start.min(msg.ts);
        self.end = self.end.max(msg.ts);
        for uri in [&msg.from_uri, &msg.to_uri] {
            if !uri.is_empty() {
                self.participants.insert(uri.clone());
            }
        }
        match msg.kind {
            SipKind::Request => {
                if !self.seen_request {
                    self.seen_request = true;
                    self.initial_cseq = msg.cseq.clone();
                    self.initial_invite = msg.method_or_code == "INVITE";
                }
                if msg.method_or_code == "BYE" {
                    self.has_bye = true;
                }
            }
            SipKind::Response => {
                let code = msg.status_code().unwrap_or(0);
                if self.seen_request
                    && self.final_code.is_none()
                    && (200..700).contains(&code)
                    && cseq_matches(&self.initial_cseq, &msg.cseq)
                {
                    self.final_code = Some(code);
                    if self.initial_invite && (200..300).contains(&code) {
                        self.answered_2xx = true;
                    }
                }
            }
        }
    }

    pub fn completeness(&self) -> Completeness {
        if !self.seen_request {
            return Completeness::OrphanResponse;
        }
        if self.final_code.is_none() {
            return Completeness::NoFinalResponse;
        }
        if self.answered_2xx && !self.has_bye {
            return Completeness::NoFinalResponse;
        }
        Completeness::Complete
    }
}

fn cseq_matches(initial: &str, response: &str) -> bool {
    initial.is_empty() || response.is_empty() || initial == response
}

/// Group the SIP-bearing lines into dialogs keyed by Call-ID, preserving
/// first-appearance order. Fragments that fail SIP parsing are tallied, not
/// dropped silently.
pub fn split_dialogs<'a, I>(lines: I) -> DialogSplit
where
    I: IntoIterator<Item = &'a SipLogLine>,
{
    let mut groups: IndexMap<String, (DialogMeta, Vec<SipMessage>)> = IndexMap::new();
    let mut unparsed = 0u64;

    for line in lines {
        let Some(fragment) = line.sip_fragment.as_deref() else { continue };
        let msg = match parse_sip(fragment, line.ts) {
            Ok(m) => m,
            Err(_) => {
                unparsed += 1;
                continue;
            }
        };
        match groups.get_mut(&msg.call_id) {
            Some((meta, msgs)) => {
                meta.update(&msg);
                msgs.push(msg);
            }
            None => {
                let meta = DialogMeta::new(&msg);
                groups.insert(msg.call_id.clone(), (meta, vec![msg]));
            }
        }
    }

    let dialogs = groups
        .into_iter()
        .map(|(call_id, (meta, messages))| SipDialog {
            call_id,
            completeness: meta.completeness(),
            participants: meta.participants,
            start_ts: meta.start,
            end_ts: meta.end,
            messages,
        })
        .collect();
    DialogSplit { dialogs, unparsed_fragments: unparsed }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelectError {
    #[error("window start {from} is after window end {to}")]
    InvalidWindow { from: DateTime<Utc>, to: DateTime<Utc> },
}

/// Call-IDs admitted by a window query; build once, then filter any number
/// of passes over the same source.
#[derive(Debug)]
pub struct WindowIndex {
    matching: BTreeSet<String>,
}

impl WindowIndex {
    pub fn admits(&self, line: &SipLogLine) -> bool {
        line.sip_fragment
            .as_deref()
            .and_then(|f| parse_sip(f, line.ts).ok())
            .is_some_and(|m| self.matching.contains(&m.call_id))
    }

    pub fn call_ids(&self) -> impl Iterator<Item = &str> {
        self.matching.iter().map(String::as_str)
    }
}

/// First pass of window selection: find every dialog with at least one
/// message inside `[from, to]` whose participants (when a filter is given)
/// include the substring. Memory is bounded by the number of dialogs.
pub fn build_window_index<'a, I>(
    lines: I,
    from: DateTime<Utc>,
    to: DateTime<Utc>,
    participant: Option<&str>,
) -> Result<WindowIndex, SelectError>
where
    I: IntoIterator<Item = &'a SipLogLine>,
{
    if from > to {
        return Err(SelectError::InvalidWindow { from, to });
    }
    struct Acc {
        in_window: bool,
        participant_hit: bool,
    }
    let mut acc: IndexMap<String, Acc> = IndexMap::new();
    for line in lines {
        let Some(fragment) = line.sip_fragment.as_deref() else { continue };
        let Ok(msg) = parse_sip(fragment, line.ts) else { continue };
        let hit = participant.is_none_or(|p| {
            msg.from_uri.contains(p) || msg.to_uri.contains(p)
        });
        let entry = acc
            .entry(msg.call_id)
            .or_insert(Acc { in_window: false, participant_hit: false });
        entry.in_window |= line.ts >= from && line.ts <= to;
        entry.participant_hit |= hit;
    }
    let matching = acc
        .into_iter()
        .filter(|(_, a)| a.in_window && (participant.is_none() || a.participant_hit))
        .map(|(id, _)| id)
        .collect();
    Ok(WindowIndex { matching })
}

/// Two-pass window selection over an in-memory slice: index, then emit the
/// admitted lines in their original order.
pub fn select_window(
    lines: &[SipLogLine],
    from: DateTime<Utc>,
    to: DateTime<Utc>,
    participant: Option<&str>,
) -> Result<Vec<SipLogLine>, SelectError> {
    let index = build_window_index(lines, from, to, participant)?;
    Ok(lines.iter().filter(|l| index.admits(l)).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(secs: i64) -> DateTime<Utc> {
        DateTime::from_timestamp(1_683_792_000 + secs, 0).unwrap()
    }

    fn line(seq: u64, ts: DateTime<Utc>, fragment: &str) -> SipLogLine {
        SipLogLine {
            seq,
            ts,
            raw: format!("{} sbc01 sip-trace: message", ts.to_rfc3339()),
            sip_fragment: Some(fragment.to_string()),
        }
    }

    fn invite(call_id: &str, from: &str, to: &str) -> String {
        format!(
            "INVITE sip:{to} SIP/2.0\nFrom: <sip:{from}>;tag=1\nTo: <sip:{to}>\nCall-ID: {call_id}\nCSeq: 1 INVITE\n"
        )
    }

    fn response(call_id: &str, code: u16, cseq: &str) -> String {
        format!("SIP/2.0 {code} X\nCall-ID: {call_id}\nCSeq: {cseq}\n")
    }

    fn request(call_id: &str, method: &str, cseq: &str) -> String {
        format!("{method} sip:x@y SIP/2.0\nCall-ID: {call_id}\nCSeq: {cseq}\n")
    }

    fn completed_call(call_id: &str, base: i64) -> Vec<SipLogLine> {
        vec![
            line(1, t(base), &invite(call_id, "alice@a", "bob@b")),
            line(2, t(base + 1), &response(call_id, 200, "1 INVITE")),
            line(3, t(base + 2), &request(call_id, "ACK", "1 ACK")),
            line(4, t(base + 60), &request(call_id, "BYE", "2 BYE")),
            line(5, t(base + 61), &response(call_id, 200, "2 BYE")),
        ]
    }

    #[test]
    fn interleaved_dialogs_are_separated_by_call_id() {
        let a = completed_call("call-a", 0);
        let b = completed_call("call-b", 0);
        let mut lines = Vec::new();
        for (x, y) in a.into_iter().zip(b) {
            lines.push(x);
            lines.push(y);
        }
        let split = split_dialogs(&lines);
        assert_eq!(split.dialogs.len(), 2);
        assert_eq!(split.dialogs[0].call_id, "call-a");
        assert_eq!(split.dialogs[1].call_id, "call-b");
        for d in &split.dialogs {
            assert_eq!(d.messages.len(), 5);
            assert_eq!(d.completeness, Completeness::Complete);
            assert_eq!(d.start_ts, t(0));
            assert_eq!(d.end_ts, t(61));
            assert!(d.participants.contains("sip:alice@a"));
            assert!(d.participants.contains("sip:bob@b"));
        }
    }

    #[test]
    fn every_parsed_message_lands_in_exactly_one_dialog() {
        let mut lines = completed_call("a", 0);
        lines.extend(completed_call("b", 10));
        lines.push(line(99, t(20), "GARBAGE"));
        let split = split_dialogs(&lines);
        let total: usize = split.dialogs.iter().map(|d| d.messages.len()).sum();
        assert_eq!(total, 10);
        assert_eq!(split.unparsed_fragments, 1);
    }

    #[test]
    fn an_unanswered_invite_has_no_final_response() {
        let lines = vec![
            line(1, t(0), &invite("x", "a@a", "b@b")),
            line(2, t(1), &response("x", 180, "1 INVITE")),
        ];
        let split = split_dialogs(&lines);
        assert_eq!(split.dialogs[0].completeness, Completeness::NoFinalResponse);
    }

    #[test]
    fn a_rejected_invite_is_complete_without_a_bye() {
        let lines = vec![
            line(1, t(0), &invite("x", "a@a", "b@b")),
            line(2, t(1), &response("x", 486, "1 INVITE")),
            line(3, t(2), &request("x", "ACK", "1 ACK")),
        ];
        let split = split_dialogs(&lines);
        assert_eq!(split.dialogs[0].completeness, Completeness::Complete);
    }

    #[test]
    fn an_answered_invite_needs_a_bye_to_be_complete() {
        let lines = vec![
            line(1, t(0), &invite("x", "a@a", "b@b")),
            line(2, t(1), &response("x", 200, "1 INVITE")),
            line(3, t(2), &request("x", "ACK", "1 ACK")),
        ];
        let split = split_dialogs(&lines);
        assert_eq!(split.dialogs[0].completeness, Completeness::NoFinalResponse);
    }

    #[test]
    fn responses_without_any_request_are_orphans() {
        let lines = vec![line(1, t(0), &response("lost", 200, "1 INVITE"))];
        let split = split_dialogs(&lines);
        assert_eq!(split.dialogs[0].completeness, Completeness::OrphanResponse);
    }

    #[test]
    fn window_selection_keeps_whole_dialogs_in_source_order() {
        let mut lines = completed_call("early", 0);
        lines.extend(completed_call("late", 600));
        let picked = select_window(&lines, t(590), t(700), None).unwrap();
        assert_eq!(picked.len(), 5);
        assert!(picked.iter().all(|l| l.sip_fragment.as_deref().unwrap().contains("late")));
        let seqs: Vec<u64> = picked.iter().map(|l| l.seq).collect();
        let mut sorted = seqs.clone();
        sorted.sort_unstable();
        assert_eq!(seqs, sorted);
    }

    #[test]
    fn one_message_in_the_window_admits_the_whole_dialog() {
        let lines = completed_call("spanning", 0);
        let picked = select_window(&lines, t(60), t(60), None).unwrap();
        assert_eq!(picked.len(), 5);
    }

    #[test]
    fn the_participant_filter_is_a_substring_match() {
        let mut lines = completed_call("a", 0);
        lines.extend(vec![
            line(10, t(5), &invite("b", "carol@c", "dave@d")),
            line(11, t(6), &response("b", 486, "1 INVITE")),
        ]);
        let picked = select_window(&lines, t(0), t(100), Some("carol")).unwrap();
        assert_eq!(picked.len(), 2);
        let picked = select_window(&lines, t(0), t(100), Some("nobody")).unwrap();
        assert!(picked.is_empty());
    }

    #[test]
    fn a_backwards_window_is_rejected() {
        let lines = completed_call("x", 0);
        let err = select_window(&lines, t(10), t(0), None).unwrap_err();
        assert!(matches!(err, SelectError::InvalidWindow { .. }));
    }

    #[test]
    fn splitting_a_full_range_selection_changes_nothing() {
        let mut lines = completed_call("a", 0);
        lines.extend(completed_call("b", 30));
        lines.push(line(50, t(40), &response("orphan", 481, "7 INFO")));

        let picked =
            select_window(&lines, t(-1000), t(1000), None).unwrap();
        let direct = split_dialogs(&lines);
        let via_window = split_dialogs(&picked);

        assert_eq!(direct.dialogs.len(), via_window.dialogs.len());
        for (d, w) in direct.dialogs.iter().zip(&via_window.dialogs) {
            assert_eq!(d.call_id, w.call_id);
            assert_eq!(d.messages, w.messages);
            assert_eq!(d.completeness, w.completeness);
        }
    }
}
