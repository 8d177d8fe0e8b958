//! Synthetic admin-center usage exports. Three fixture shapes: a pinned
//! three-window report whose aggregate matches a known-good summary cell for
//! cell, a pinned top-talker ranking over a seeded background population, and
//! a fully randomized batch that accumulates its own expected summary while
//! emitting rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tenant::{format_duration_dhm, DeviceClass, Window, USAGE_CSV_HEADER};

use super::scenario::{invalid, InvalidSpec, Manifest, RankedTruth, UsageTruth, UsageWindowTruth};

#[derive(Debug, Clone)]
pub enum UsageVariant {
    /// The pinned three-window report. Every aggregate cell (user counts,
    /// call totals, durations, per-user averages, device populations, PSTN
    /// figures) is fixed; the seed only names the fixture.
    ReferenceTable,
    /// Ten users with pinned audio/video totals ranked above a seeded filler
    /// population that stays strictly below the tenth user's audio time.
    TopTalkers { filler_users: u64 },
    /// Randomized three-window report over the given user pool.
    Random { users: u64 },
}

#[derive(Debug, Clone)]
pub struct UsageBatchSpec {
    pub seed: u64,
    pub variant: UsageVariant,
}

impl Default for UsageBatchSpec {
    fn default() -> Self {
        UsageBatchSpec { seed: 1, variant: UsageVariant::ReferenceTable }
    }
}

impl UsageBatchSpec {
    fn validate(&self) -> Result<(), InvalidSpec> {
        match self.variant {
            UsageVariant::ReferenceTable => Ok(()),
            UsageVariant::TopTalkers { filler_users } => {
                if !(1..=20_000).contains(&filler_users) {
                    return Err(invalid("filler_users must be between 1 and 20000"));
                }
                Ok(())
            }
            UsageVariant::Random { users } => {
                if !(1..=20_000).contains(&users) {
                    return Err(invalid("users must be between 1 and 20000"));
                }
                Ok(())
            }
        }
    }
}

struct WindowPlan {
    window: Window,
    users: u64,
    calls: u64,
    audio_seconds: u64,
    video_seconds: u64,
    /// Distinct users per class, in `DeviceClass::ALL` order. Classes
    /// overlap, so these may sum past `users`; they must sum to at least
    /// `users` so that every user lands in some class.
    class_counts: [u64; 6],
    pstn_calls: u64,
    pstn_seconds: u64,
}

const REFERENCE_PLAN: [WindowPlan; 3] = [
    WindowPlan {
        window: Window::D7,
        users: 1_171,
        calls: 36_368,
        audio_seconds: 49_331_520,
        video_seconds: 19_475_760,
        class_counts: [1_141, 4, 247, 252, 0, 15],
        pstn_calls: 6_536,
        pstn_seconds: 1_041_120,
    },
    WindowPlan {
        window: Window::D30,
        users: 1_224,
        calls: 139_960,
        audio_seconds: 194_511_960,
        video_seconds: 76_125_360,
        class_counts: [1_183, 9, 270, 280, 0, 64],
        pstn_calls: 28_706,
        pstn_seconds: 4_657_740,
    },
    WindowPlan {
        window: Window::D90,
        users: 1_272,
        calls: 419_001,
        audio_seconds: 594_619_320,
        video_seconds: 223_560_060,
        class_counts: [1_222, 13, 294, 304, 1, 139],
        pstn_calls: 96_394,
        pstn_seconds: 15_569_340,
    },
];

/// (audio_seconds, video_seconds) for the pinned ranking, already in rank
/// order. All values are whole minutes and mutually distinct on audio, so
/// the ranking is insensitive to tie-break order.
const TOP_TALKERS: [(u64, u64); 10] = [
    (184_200, 19_380),
    (182_220, 95_880),
    (170_820, 20_220),
    (165_480, 3_900),
    (153_000, 21_720),
    (150_720, 21_360),
    (138_420, 53_520),
    (135_240, 44_700),
    (134_760, 21_120),
    (133_320, 28_080),
];

/// Integer hours of `secs / users`, rounded half-up. Mirrors how the report
/// column is computed so the manifest states the value the table must show.
fn hours_half_up(secs: u64, users: u64) -> u64 {
    if users == 0 {
        return 0;
    }
    let denom = 3_600 * users;
    (2 * secs + denom) / (2 * denom)
}

/// User `idx`'s slice of `total`, dealt out in whole `unit`s with the
/// remainder spread one unit each over the lowest indices. Sums back to
/// `total` exactly when `total` is a multiple of `unit`.
fn share(total: u64, unit: u64, users: u64, idx: u64) -> u64 {
    let units = total / unit;
    let base = units / users;
    let extra = u64::from(idx < units % users);
    (base + extra) * unit
}

#[allow(clippy::too_many_arguments)]
fn push_row(
    csv: &mut String,
    user: &str,
    window: Window,
    audio_seconds: u64,
    video_seconds: u64,
    calls: u64,
    class: DeviceClass,
    pstn_calls: u64,
    pstn_seconds: u64,
) {
    let _ = writeln!(
        csv,
        "{user},{window},{},{},{calls},{class},{pstn_calls},{}",
        format_duration_dhm(audio_seconds),
        format_duration_dhm(video_seconds),
        format_duration_dhm(pstn_seconds),
    );
}

/// Emit one reference window. Class membership walks a rotating cursor over
/// the user pool so each class holds exactly its pinned number of distinct
/// users and the blocks together cover every user. A user's durations and
/// call counts ride on their first record only; repeat class memberships
/// carry zeros so window totals stay exact.
fn emit_reference_window(plan: &WindowPlan, csv: &mut String) -> UsageWindowTruth {
    debug_assert!(plan.class_counts.iter().sum::<u64>() >= plan.users);
    debug_assert!(plan.audio_seconds % 60 == 0);
    debug_assert!(plan.video_seconds % 60 == 0);
    debug_assert!(plan.pstn_seconds % 60 == 0);

    let users = plan.users;
    let mut seen = vec![false; users as usize];
    let mut device_counts = BTreeMap::new();
    let mut cursor = 0u64;
    for (slot, &count) in plan.class_counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let class = DeviceClass::ALL[slot];
        device_counts.insert(class.to_string(), count);
        for j in 0..count {
            let u = (cursor + j) % users;
            let first = !seen[u as usize];
            seen[u as usize] = true;
            let (audio, video, calls, pstn_calls, pstn_secs) = if first {
                (
                    share(plan.audio_seconds, 60, users, u),
                    share(plan.video_seconds, 60, users, u),
                    share(plan.calls, 1, users, u),
                    share(plan.pstn_calls, 1, users, u),
                    share(plan.pstn_seconds, 60, users, u),
                )
            } else {
                (0, 0, 0, 0, 0)
            };
            push_row(csv, &format!("u{u:04}"), plan.window, audio, video, calls, class, pstn_calls, pstn_secs);
        }
        cursor = (cursor + count) % users;
    }
    debug_assert!(seen.iter().all(|&s| s));

    UsageWindowTruth {
        users,
        one_to_one_calls: plan.calls,
        audio_seconds: plan.audio_seconds,
        video_seconds: plan.video_seconds,
        avg_audio_hours: hours_half_up(plan.audio_seconds, users),
        avg_video_hours: hours_half_up(plan.video_seconds, users),
        device_counts,
        pstn_calls: plan.pstn_calls,
        pstn_seconds: plan.pstn_seconds,
    }
}

fn empty_window_truth() -> UsageWindowTruth {
    UsageWindowTruth {
        users: 0,
        one_to_one_calls: 0,
        audio_seconds: 0,
        video_seconds: 0,
        avg_audio_hours: 0,
        avg_video_hours: 0,
        device_counts: BTreeMap::new(),
        pstn_calls: 0,
        pstn_seconds: 0,
    }
}

/// Generate a usage-report CSV and the manifest describing what any correct
/// aggregation of it must conclude. The CSV follows the export column set
/// exactly: duration cells in "D days H hours M minutes" form, one row per
/// (user, window, device class).
pub fn gen_usage(spec: &UsageBatchSpec) -> Result<(String, Manifest), InvalidSpec> {
    spec.validate()?;

    let mut csv = String::new();
    csv.push_str(&USAGE_CSV_HEADER.join(","));
    csv.push('\n');

    let mut truth = UsageTruth::default();
    let scenario = match &spec.variant {
        UsageVariant::ReferenceTable => {
            for plan in &REFERENCE_PLAN {
                let wt = emit_reference_window(plan, &mut csv);
                truth.windows.insert(plan.window.to_string(), wt);
            }
            "USAGE_REFERENCE"
        }
        UsageVariant::TopTalkers { filler_users } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut wt = empty_window_truth();
            wt.users = 10 + filler_users;
            for (i, &(audio, video)) in TOP_TALKERS.iter().enumerate() {
                let user = format!("talker{:02}", i + 1);
                let class = DeviceClass::ALL[i % DeviceClass::ALL.len()];
                let calls = 40 + i as u64;
                push_row(&mut csv, &user, Window::D7, audio, video, calls, class, 0, 0);
                wt.one_to_one_calls += calls;
                wt.audio_seconds += audio;
                wt.video_seconds += video;
                *wt.device_counts.entry(class.to_string()).or_default() += 1;
                truth.top_audio.push(RankedTruth {
                    user_id: user,
                    audio_time: format_duration_dhm(audio),
                    video_time: format_duration_dhm(video),
                });
            }
            for i in 0..*filler_users {
                let user = format!("filler{i:05}");
                let class = DeviceClass::ALL[rng.gen_range(0..DeviceClass::ALL.len())];
                let audio = 60 * rng.gen_range(0..2_000);
                let video = 60 * rng.gen_range(0..800);
                let calls = rng.gen_range(0..50);
                let pstn_calls = rng.gen_range(0..5);
                let pstn_secs = 60 * rng.gen_range(0..60);
                push_row(&mut csv, &user, Window::D7, audio, video, calls, class, pstn_calls, pstn_secs);
                wt.one_to_one_calls += calls;
                wt.audio_seconds += audio;
                wt.video_seconds += video;
                wt.pstn_calls += pstn_calls;
                wt.pstn_seconds += pstn_secs;
                *wt.device_counts.entry(class.to_string()).or_default() += 1;
            }
            wt.avg_audio_hours = hours_half_up(wt.audio_seconds, wt.users);
            wt.avg_video_hours = hours_half_up(wt.video_seconds, wt.users);
            truth.windows.insert(Window::D7.to_string(), wt);
            "USAGE_TOP_TALKERS"
        }
        UsageVariant::Random { users } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for window in [Window::D7, Window::D30, Window::D90] {
                let mut wt = empty_window_truth();
                for u in 0..*users {
                    let active = match window {
                        Window::D7 => rng.gen_bool(0.7),
                        Window::D30 => rng.gen_bool(0.9),
                        Window::D90 => true,
                    };
                    if !active {
                        continue;
                    }
                    wt.users += 1;
                    let user = format!("acct{u:05}");
                    let audio = 60 * rng.gen_range(0..=600);
                    let video = 60 * rng.gen_range(0..=240);
                    let calls = rng.gen_range(0..=20);
                    let pstn_calls = rng.gen_range(0..=5);
                    let pstn_secs = 60 * rng.gen_range(0..=60);
                    wt.audio_seconds += audio;
                    wt.video_seconds += video;
                    wt.one_to_one_calls += calls;
                    wt.pstn_calls += pstn_calls;
                    wt.pstn_seconds += pstn_secs;
                    let class_count = rng.gen_range(1..=3);
                    let picks = rand::seq::index::sample(&mut rng, DeviceClass::ALL.len(), class_count);
                    for (nth, slot) in picks.iter().enumerate() {
                        let class = DeviceClass::ALL[slot];
                        *wt.device_counts.entry(class.to_string()).or_default() += 1;
                        let (a, v, c, pc, ps) =
                            if nth == 0 { (audio, video, calls, pstn_calls, pstn_secs) } else { (0, 0, 0, 0, 0) };
                        push_row(&mut csv, &user, window, a, v, c, class, pc, ps);
                    }
                }
                wt.avg_audio_hours = hours_half_up(wt.audio_seconds, wt.users);
                wt.avg_video_hours = hours_half_up(wt.video_seconds, wt.users);
                truth.windows.insert(window.to_string(), wt);
            }
            "USAGE_BATCH"
        }
    };

    let mut manifest = Manifest::new(scenario, spec.seed);
    manifest.usage = Some(truth);
    Ok((csv, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tenant::{aggregate_usage, parse_usage_csv, top_users, RankMetric, UsageSummary};

    fn summaries_for(csv: &str) -> BTreeMap<Window, UsageSummary> {
        let parse = parse_usage_csv(csv.as_bytes()).expect("csv reads");
        assert!(parse.row_errors.is_empty(), "row errors: {:?}", parse.row_errors);
        aggregate_usage(&parse.records)
    }

    fn assert_window_matches(summary: &UsageSummary, truth: &UsageWindowTruth) {
        assert_eq!(summary.total_users, truth.users);
        assert_eq!(summary.total_one_to_one_calls, truth.one_to_one_calls);
        assert_eq!(summary.total_audio_seconds, truth.audio_seconds);
        assert_eq!(summary.total_video_seconds, truth.video_seconds);
        assert_eq!(summary.avg_audio_hours_per_user, truth.avg_audio_hours);
        assert_eq!(summary.avg_video_hours_per_user, truth.avg_video_hours);
        assert_eq!(summary.pstn_calls_total, truth.pstn_calls);
        assert_eq!(summary.pstn_duration_seconds, truth.pstn_seconds);
        let counts: BTreeMap<String, u64> =
            summary.device_counts.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(counts, truth.device_counts);
    }

    #[test]
    fn reference_table_carries_its_own_truth() {
        let (csv, manifest) = gen_usage(&UsageBatchSpec::default()).unwrap();
        let summaries = summaries_for(&csv);
        let truth = manifest.usage.expect("usage truth");

        assert_eq!(summaries.len(), 3);
        for (label, wt) in &truth.windows {
            let window = Window::parse(label).expect("window label");
            assert_window_matches(&summaries[&window], wt);
        }

        let d7 = &summaries[&Window::D7];
        let d30 = &summaries[&Window::D30];
        let d90 = &summaries[&Window::D90];
        assert_eq!((d7.total_users, d30.total_users, d90.total_users), (1_171, 1_224, 1_272));
        assert_eq!(
            (d7.avg_audio_hours_per_user, d30.avg_audio_hours_per_user, d90.avg_audio_hours_per_user),
            (12, 44, 130)
        );
        assert_eq!(
            (d7.avg_video_hours_per_user, d30.avg_video_hours_per_user, d90.avg_video_hours_per_user),
            (5, 17, 49)
        );
        assert_eq!(d7.total_audio_seconds, 49_331_520);
        assert_eq!(d90.total_one_to_one_calls, 419_001);
        assert_eq!(d30.device_counts[&DeviceClass::WindowsPc], 1_183);
        assert_eq!(d90.device_counts[&DeviceClass::Linux], 1);
        assert_eq!(d7.device_counts.get(&DeviceClass::Linux), None);
        assert_eq!(d7.pstn_calls_total, 6_536);
        assert_eq!(d90.pstn_duration_seconds, 15_569_340);
    }

    #[test]
    fn top_talkers_rank_in_declared_order() {
        let spec = UsageBatchSpec { seed: 9, variant: UsageVariant::TopTalkers { filler_users: 400 } };
        let (csv, manifest) = gen_usage(&spec).unwrap();
        let parse = parse_usage_csv(csv.as_bytes()).unwrap();
        assert!(parse.row_errors.is_empty());
        let truth = manifest.usage.expect("usage truth");

        let ranked = top_users(&parse.records, 10, RankMetric::Audio);
        assert_eq!(ranked.len(), 10);
        for (got, want) in ranked.iter().zip(&truth.top_audio) {
            assert_eq!(got.user_id, want.user_id);
            assert_eq!(got.audio_time, want.audio_time);
            assert_eq!(got.video_time, want.video_time);
        }
        assert_eq!(ranked[0].audio_time, "2 days 3 hours 10 minutes");
        assert_eq!(ranked[9].audio_time, "1 days 13 hours 2 minutes");
        assert_eq!(ranked[9].user_id, "talker10");

        let summaries = summaries_for(&csv);
        assert_window_matches(&summaries[&Window::D7], &truth.windows["D7"]);
        assert_eq!(summaries[&Window::D7].total_users, 410);
    }

    #[test]
    fn random_batch_matches_its_manifest() {
        let spec = UsageBatchSpec { seed: 7, variant: UsageVariant::Random { users: 500 } };
        let (csv, manifest) = gen_usage(&spec).unwrap();
        let summaries = summaries_for(&csv);
        let truth = manifest.usage.expect("usage truth");

        assert_eq!(truth.windows.len(), 3);
        for (label, wt) in &truth.windows {
            let window = Window::parse(label).expect("window label");
            assert_window_matches(&summaries[&window], wt);
        }
        assert_eq!(truth.windows["D90"].users, 500);
        assert!(truth.windows["D7"].users < 500);
    }

    #[test]
    fn same_spec_same_bytes() {
        for variant in [
            UsageVariant::ReferenceTable,
            UsageVariant::TopTalkers { filler_users: 50 },
            UsageVariant::Random { users: 80 },
        ] {
            let spec = UsageBatchSpec { seed: 42, variant };
            let (csv_a, manifest_a) = gen_usage(&spec).unwrap();
            let (csv_b, manifest_b) = gen_usage(&spec).unwrap();
            assert_eq!(csv_a, csv_b);
            assert_eq!(manifest_a.to_json_string(), manifest_b.to_json_string());
        }
    }

    #[test]
    fn hostile_specs_are_rejected() {
        let cases = [
            UsageVariant::TopTalkers { filler_users: 0 },
            UsageVariant::TopTalkers { filler_users: 20_001 },
            UsageVariant::Random { users: 0 },
            UsageVariant::Random { users: 20_001 },
        ];
        for variant in cases {
            let spec = UsageBatchSpec { seed: 1, variant };
            assert!(gen_usage(&spec).is_err());
        }
    }
}
