//! Synthetic gateway CDR exports: a pinned ten-row reference file plus
//! seeded batches with a configurable outcome mix. Every call contributes
//! two legs, one per trunk group, with millisecond skew between their end
//! timestamps and the session id as the only join key.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cdr::format_hms;

use super::scenario::{invalid, CdrTruth, InvalidSpec, Manifest};

pub const CDR_HEADER: &str =
    "CALL END TIME,ENDPOINT TYPE,IP GROUP,CALLER,CALLEE,DIRECTION,REMOTE IP,DURATION,TERMINATION REASON,SESSION ID";

const REFERENCE_ROWS: &str = "\
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

/// The pinned two-trunk export: five calls, one completed at 410 seconds,
/// a mix of failed outcomes, and both call directions represented.
pub fn gen_cdr_reference() -> (String, Manifest) {
    let mut manifest = Manifest::new("CDR_REFERENCE", 0);
    manifest.cdr = Some(CdrTruth {
        legs: 10,
        calls: 5,
        orphans: 0,
        by_outcome: [("COMPLETED", 1), ("NO_ANSWER", 2), ("BUSY", 1), ("FAILED", 1)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        by_direction: [("TEAMS_TO_PSTN", 3), ("PSTN_TO_TEAMS", 2)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        total_duration_secs: 410,
    });
    (format!("{CDR_HEADER}\n{REFERENCE_ROWS}"), manifest)
}

#[derive(Debug, Clone)]
pub struct CdrBatchSpec {
    pub seed: u64,
    pub calls: u64,
    /// Relative weights for COMPLETED, NO_ANSWER, BUSY, FAILED.
    pub outcome_mix: [u32; 4],
}

impl Default for CdrBatchSpec {
    fn default() -> Self {
        CdrBatchSpec { seed: 1, calls: 100, outcome_mix: [70, 15, 10, 5] }
    }
}

const OUTCOMES: [(&str, &str); 4] = [
    ("COMPLETED", "NORMAL_CALL_CLEAR"),
    ("NO_ANSWER", "NO_ANSWER"),
    ("BUSY", "BUSY"),
    ("FAILED", "GENERAL_FAILED"),
];

/// Generate a two-leg-per-call export. Same spec, same bytes.
pub fn gen_cdr(spec: &CdrBatchSpec) -> Result<(String, Manifest), InvalidSpec> {
    if spec.calls == 0 || spec.calls > 10_000 {
        return Err(invalid("calls must be within 1..=10000"));
    }
    if spec.outcome_mix.iter().all(|&w| w == 0) {
        return Err(invalid("outcome_mix needs at least one nonzero weight"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let outcome_dist =
        WeightedIndex::new(spec.outcome_mix).expect("nonzero weights checked above");
    let batch_tag: u32 = rng.gen_range(0x10_0000..0xff_ffff);

    let mut csv = String::from(CDR_HEADER);
    csv.push('\n');
    let mut by_outcome: BTreeMap<String, u64> = BTreeMap::new();
    let mut by_direction: BTreeMap<String, u64> = BTreeMap::new();
    let mut total_duration = 0u64;

    let mut end_ms: u64 = 6 * 3600 * 1000;
    for i in 0..spec.calls {
        end_ms += rng.gen_range(1_000..6_000);
        let (outcome, reason) = OUTCOMES[outcome_dist.sample(&mut rng)];
        let teams_to_pstn = rng.gen_bool(0.5);
        let duration = (outcome == "COMPLETED").then(|| rng.gen_range(5..3_600u32));
        let caller = format!("+3904122{:05}", rng.gen_range(0..100_000));
        let callee = format!("+3904213{:05}", rng.gen_range(0..100_000));
        let session_id = format!("b{batch_tag:06x}:{i}");
        let skew_ms = rng.gen_range(0..10);
        let teams_first = rng.gen_bool(0.5);

        let (teams_dir, pbx_dir) =
            if teams_to_pstn { ("Incoming", "Outgoing") } else { ("Outgoing", "Incoming") };
        let duration_text = duration.map(format_hms).unwrap_or_default();
        let leg = |group: &str, dir: &str, remote: &str, ms: u64| {
            format!(
                "{},SBC,{group},{caller},{callee},{dir},{remote},{duration_text},{reason},{session_id}\n",
                format_clock(ms)
            )
        };
        let teams_leg = leg("IPG_TEAMS", teams_dir, "52.114.75.24", end_ms);
        let pbx_leg = leg("IPG_PBX", pbx_dir, "132.100.50.10", end_ms - skew_ms);
        if teams_first {
            csv.push_str(&teams_leg);
            csv.push_str(&pbx_leg);
        } else {
            csv.push_str(&pbx_leg);
            csv.push_str(&teams_leg);
        }

        *by_outcome.entry(outcome.to_string()).or_default() += 1;
        let direction = if teams_to_pstn { "TEAMS_TO_PSTN" } else { "PSTN_TO_TEAMS" };
        *by_direction.entry(direction.to_string()).or_default() += 1;
        total_duration += duration.unwrap_or(0) as u64;
    }

    let mut manifest = Manifest::new("CDR_BATCH", spec.seed);
    manifest.cdr = Some(CdrTruth {
        legs: spec.calls * 2,
        calls: spec.calls,
        orphans: 0,
        by_outcome,
        by_direction,
        total_duration_secs: total_duration,
    });
    Ok((csv, manifest))
}

fn format_clock(ms: u64) -> String {
    format!(
        "{:02}:{:02}:{:02}.{:03}",
        ms / 3_600_000 % 24,
        ms / 60_000 % 60,
        ms / 1_000 % 60,
        ms % 1_000
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdr::{correlate_legs, parse_cdr, summarize_cdr};

    fn verify_against_truth(csv: &str, manifest: &Manifest) {
        let truth = manifest.cdr.as_ref().unwrap();
        let parsed = parse_cdr(csv.as_bytes()).unwrap();
        assert!(parsed.row_errors.is_empty());
        assert_eq!(parsed.legs.len() as u64, truth.legs);

        let corr = correlate_legs(parsed.legs);
        assert_eq!(corr.calls.len() as u64, truth.calls);
        assert_eq!(corr.orphans.len() as u64, truth.orphans);

        let summary = summarize_cdr(&corr.calls);
        assert_eq!(summary.by_outcome, truth.by_outcome);
        assert_eq!(summary.by_direction, truth.by_direction);
        assert_eq!(summary.total_duration_secs, truth.total_duration_secs);
    }

    #[test]
    fn the_reference_export_carries_its_own_truth() {
        let (csv, manifest) = gen_cdr_reference();
        assert_eq!(csv.lines().count(), 11);
        verify_against_truth(&csv, &manifest);
    }

    #[test]
    fn random_batches_parse_back_to_their_truth() {
        let (csv, manifest) =
            gen_cdr(&CdrBatchSpec { seed: 42, calls: 200, outcome_mix: [60, 20, 12, 8] }).unwrap();
        verify_against_truth(&csv, &manifest);
        let truth = manifest.cdr.unwrap();
        assert_eq!(truth.by_outcome.values().sum::<u64>(), 200);
        assert!(truth.by_outcome.len() > 1, "mix produced a single outcome");
    }

    #[test]
    fn a_single_outcome_weight_forces_that_outcome() {
        let (_, manifest) =
            gen_cdr(&CdrBatchSpec { seed: 3, calls: 50, outcome_mix: [0, 0, 1, 0] }).unwrap();
        let truth = manifest.cdr.unwrap();
        assert_eq!(truth.by_outcome.len(), 1);
        assert_eq!(truth.by_outcome["BUSY"], 50);
        assert_eq!(truth.total_duration_secs, 0);
    }

    #[test]
    fn same_spec_same_bytes() {
        let spec = CdrBatchSpec::default();
        let (a, ma) = gen_cdr(&spec).unwrap();
        let (b, mb) = gen_cdr(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ma, mb);
        let (c, _) = gen_cdr(&CdrBatchSpec { seed: 2, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn hostile_specs_are_rejected() {
        assert!(gen_cdr(&CdrBatchSpec { calls: 0, ..Default::default() }).is_err());
        assert!(gen_cdr(&CdrBatchSpec { calls: 10_001, ..Default::default() }).is_err());
        assert!(gen_cdr(&CdrBatchSpec { outcome_mix: [0; 4], ..Default::default() }).is_err());
    }
}
