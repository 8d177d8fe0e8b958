//! Pairing the two trunks of each call.
//!
//! Every PSTN call through the gateway appears twice in the CDR: once on the
//! Teams trunk, once on the PBX trunk. Joining the pair by session id gives a
//! single record with an overall direction and outcome. Groups of any other
//! shape become orphans; they are findings, not failures.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;

use super::records::{CdrLeg, LegDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallDirection {
    TeamsToPstn,
    PstnToTeams,
    Undetermined,
}

impl fmt::Display for CallDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CallDirection::TeamsToPstn => "TEAMS_TO_PSTN",
            CallDirection::PstnToTeams => "PSTN_TO_TEAMS",
            CallDirection::Undetermined => "UNDETERMINED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CallOutcome {
    Completed,
    NoAnswer,
    Busy,
    Failed,
    Other,
}

impl fmt::Display for CallOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CallOutcome::Completed => "COMPLETED",
            CallOutcome::NoAnswer => "NO_ANSWER",
            CallOutcome::Busy => "BUSY",
            CallOutcome::Failed => "FAILED",
            CallOutcome::Other => "OTHER",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CorrelatedCall {
    pub session_id: String,
    pub teams_leg: CdrLeg,
    pub pbx_leg: CdrLeg,
    pub overall_direction: CallDirection,
    pub outcome: CallOutcome,
    pub duration: Option<u32>,
    /// The two legs reported different termination reasons.
    pub reason_mismatch: bool,
}

impl CorrelatedCall {
    /// The leg that originated the call; falls back to the Teams leg when
    /// the direction could not be determined.
    pub fn originating_leg(&self) -> &CdrLeg {
        match self.overall_direction {
            CallDirection::TeamsToPstn | CallDirection::Undetermined => &self.teams_leg,
            CallDirection::PstnToTeams => &self.pbx_leg,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrphanGroup {
    pub session_id: String,
    pub legs: Vec<CdrLeg>,
    pub diagnostic: String,
}

#[derive(Debug, Default)]
pub struct Correlation {
    pub calls: Vec<CorrelatedCall>,
    pub orphans: Vec<OrphanGroup>,
}

/// Which ip_group values mean "Teams trunk" and "PBX trunk". Deployments
/// rename these freely.
#[derive(Debug, Clone)]
pub struct GroupNames {
    pub teams: BTreeSet<String>,
    pub pbx: BTreeSet<String>,
}

impl Default for GroupNames {
    fn default() -> Self {
        GroupNames {
            teams: BTreeSet::from(["IPG_TEAMS".to_string()]),
            pbx: BTreeSet::from(["IPG_PBX".to_string()]),
        }
    }
}

fn map_reason(reason: &str) -> CallOutcome {
    match reason.to_ascii_uppercase().as_str() {
        "NORMAL_CALL_CLEAR" => CallOutcome::Completed,
        "NO_ANSWER" => CallOutcome::NoAnswer,
        "BUSY" => CallOutcome::Busy,
        "GENERAL_FAILED" => CallOutcome::Failed,
        _ => CallOutcome::Other,
    }
}

pub fn correlate_legs(legs: Vec<CdrLeg>) -> Correlation {
    correlate_legs_with(legs, &GroupNames::default())
}

pub fn correlate_legs_with(legs: Vec<CdrLeg>, groups: &GroupNames) -> Correlation {
    let mut by_session: IndexMap<String, Vec<CdrLeg>> = IndexMap::new();
    for leg in legs {
        by_session.entry(leg.session_id.clone()).or_default().push(leg);
    }
    by_session.sort_keys();

    let mut out = Correlation::default();
    for (session_id, group) in by_session {
        match pair_up(&group, groups) {
            Ok((teams_idx, pbx_idx)) => {
                let mut it = group.into_iter();
                let (first, second) = (it.next().unwrap(), it.next().unwrap());
                let (teams_leg, pbx_leg) =
                    if (teams_idx, pbx_idx) == (0, 1) { (first, second) } else { (second, first) };

                let overall_direction = match (teams_leg.direction, pbx_leg.direction) {
                    (LegDirection::Incoming, LegDirection::Outgoing) => CallDirection::TeamsToPstn,
                    (LegDirection::Outgoing, LegDirection::Incoming) => CallDirection::PstnToTeams,
                    _ => CallDirection::Undetermined,
                };
                let reason_mismatch = !teams_leg
                    .termination_reason
                    .eq_ignore_ascii_case(&pbx_leg.termination_reason);
                let mut outcome = map_reason(&pbx_leg.termination_reason);
                if outcome == CallOutcome::Completed && reason_mismatch {
                    outcome = map_reason(&teams_leg.termination_reason);
                }
                let duration = pbx_leg.duration.or(teams_leg.duration);
                out.calls.push(CorrelatedCall {
                    session_id,
                    teams_leg,
                    pbx_leg,
                    overall_direction,
                    outcome,
                    duration,
                    reason_mismatch,
                });
            }
            Err(diagnostic) => {
                out.orphans.push(OrphanGroup { session_id, legs: group, diagnostic });
            }
        }
    }
    out
}

/// Decide whether a session group is exactly one Teams leg plus one PBX leg;
/// returns their indices or a diagnostic.
fn pair_up(group: &[CdrLeg], groups: &GroupNames) -> Result<(usize, usize), String> {
    if group.len() != 2 {
        return Err(format!("expected 2 legs, found {}", group.len()));
    }
    let kind = |leg: &CdrLeg| {
        if groups.teams.contains(&leg.ip_group) {
            Some("teams")
        } else if groups.pbx.contains(&leg.ip_group) {
            Some("pbx")
        } else {
            None
        }
    };
    match (kind(&group[0]), kind(&group[1])) {
        (Some("teams"), Some("pbx")) => Ok((0, 1)),
        (Some("pbx"), Some("teams")) => Ok((1, 0)),
        (None, _) | (_, None) => {
            let unknown: Vec<&str> = group
                .iter()
                .filter(|l| kind(l).is_none())
                .map(|l| l.ip_group.as_str())
                .collect();
            Err(format!("unrecognized ip group(s): {}", unknown.join(", ")))
        }
        (a, b) => Err(format!(
            "legs are not a teams/pbx pair ({}, {})",
            a.unwrap_or("?"),
            b.unwrap_or("?")
        )),
    }
}
