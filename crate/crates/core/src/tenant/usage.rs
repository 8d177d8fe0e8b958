//! Usage-report aggregation: per-window totals, per-user averages, device
//! population counts, and top-talker rankings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;

use super::duration::{format_duration_dhm, parse_count, parse_duration_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Window {
    D7,
    D30,
    D90,
}

impl Window {
    pub fn label(self) -> &'static str {
        match self {
            Window::D7 => "Last 7 days",
            Window::D30 => "Last 30 days",
            Window::D90 => "Last 90 days",
        }
    }

    pub fn parse(s: &str) -> Option<Window> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d7" | "7" | "last 7 days" => Some(Window::D7),
            "d30" | "30" | "last 30 days" => Some(Window::D30),
            "d90" | "90" | "last 90 days" => Some(Window::D90),
            _ => None,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Window::D7 => "D7",
            Window::D30 => "D30",
            Window::D90 => "D90",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeviceClass {
    WindowsPc,
    Mac,
    Ios,
    Android,
    Linux,
    Web,
}

impl DeviceClass {
    pub const ALL: [DeviceClass; 6] = [
        DeviceClass::WindowsPc,
        DeviceClass::Mac,
        DeviceClass::Ios,
        DeviceClass::Android,
        DeviceClass::Linux,
        DeviceClass::Web,
    ];

    pub fn parse(s: &str) -> Option<DeviceClass> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "windowspc" | "windows" => Some(DeviceClass::WindowsPc),
            "mac" => Some(DeviceClass::Mac),
            "ios" | "iosphone" => Some(DeviceClass::Ios),
            "android" | "androidphone" => Some(DeviceClass::Android),
            "linux" => Some(DeviceClass::Linux),
            "web" | "webbrowser" => Some(DeviceClass::Web),
            _ => None,
        }
    }

    pub fn report_label(self) -> &'static str {
        match self {
            DeviceClass::WindowsPc => "Windows PC users",
            DeviceClass::Mac => "Mac users",
            DeviceClass::Ios => "iOS Phone users",
            DeviceClass::Android => "Android Phone users",
            DeviceClass::Linux => "Linux users",
            DeviceClass::Web => "Web browser users",
        }
    }
}

impl fmt::Display for DeviceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviceClass::WindowsPc => "WINDOWS_PC",
            DeviceClass::Mac => "MAC",
            DeviceClass::Ios => "IOS",
            DeviceClass::Android => "ANDROID",
            DeviceClass::Linux => "LINUX",
            DeviceClass::Web => "WEB",
        })
    }
}

/// One user's activity in one report window on one device class. Users seen
/// on several devices appear once per class; their durations and call counts
/// belong on a single record (zero on the others) so sums stay honest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageActivityRecord {
    pub user_id: String,
    pub window: Window,
    pub audio_seconds: u64,
    pub video_seconds: u64,
    pub one_to_one_calls: u64,
    pub device_class: DeviceClass,
    pub pstn_calls: u64,
    pub pstn_seconds: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageSummary {
    pub window: Window,
    pub total_users: u64,
    pub total_one_to_one_calls: u64,
    pub total_audio_seconds: u64,
    pub total_video_seconds: u64,
    pub avg_audio_hours_per_user: u64,
    pub avg_video_hours_per_user: u64,
    /// Distinct users per device class; classes overlap, so these do not
    /// have to sum to `total_users`.
    pub device_counts: BTreeMap<DeviceClass, u64>,
    pub pstn_calls_total: u64,
    pub pstn_duration_seconds: u64,
}

/// Integer hours of `secs / users`, rounded half-up.
fn rounded_hours_per_user(secs: u64, users: u64) -> u64 {
    if users == 0 {
        return 0;
    }
    let denom = 3_600 * users;
    (2 * secs + denom) / (2 * denom)
}

pub fn aggregate_usage(records: &[UsageActivityRecord]) -> BTreeMap<Window, UsageSummary> {
    let mut users: HashMap<Window, BTreeSet<&str>> = HashMap::new();
    let mut class_users: HashMap<(Window, DeviceClass), BTreeSet<&str>> = HashMap::new();
    let mut out: BTreeMap<Window, UsageSummary> = BTreeMap::new();

    for r in records {
        let s = out.entry(r.window).or_insert_with(|| UsageSummary {
            window: r.window,
            total_users: 0,
            total_one_to_one_calls: 0,
            total_audio_seconds: 0,
            total_video_seconds: 0,
            avg_audio_hours_per_user: 0,
            avg_video_hours_per_user: 0,
            device_counts: BTreeMap::new(),
            pstn_calls_total: 0,
            pstn_duration_seconds: 0,
        });
        s.total_one_to_one_calls += r.one_to_one_calls;
        s.total_audio_seconds += r.audio_seconds;
        s.total_video_seconds += r.video_seconds;
        s.pstn_calls_total += r.pstn_calls;
        s.pstn_duration_seconds += r.pstn_seconds;
        users.entry(r.window).or_default().insert(&r.user_id);
        class_users.entry((r.window, r.device_class)).or_default().insert(&r.user_id);
    }

    for (window, summary) in out.iter_mut() {
        summary.total_users = users.get(window).map_or(0, |set| set.len() as u64);
        for class in DeviceClass::ALL {
            if let Some(set) = class_users.get(&(*window, class)) {
                summary.device_counts.insert(class, set.len() as u64);
            }
        }
        summary.avg_audio_hours_per_user =
            rounded_hours_per_user(summary.total_audio_seconds, summary.total_users);
        summary.avg_video_hours_per_user =
            rounded_hours_per_user(summary.total_video_seconds, summary.total_users);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMetric {
    Audio,
    Video,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedUser {
    pub user_id: String,
    pub audio_time: String,
    pub video_time: String,
    pub metric_seconds: u64,
}

/// Top `n` users by the chosen metric, descending; ties order by user id so
/// the ranking is a pure function of the record multiset.
pub fn top_users(records: &[UsageActivityRecord], n: usize, metric: RankMetric) -> Vec<RankedUser> {
    let mut totals: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for r in records {
        let t = totals.entry(&r.user_id).or_default();
        t.0 += r.audio_seconds;
        t.1 += r.video_seconds;
    }
    let mut rows: Vec<RankedUser> = totals
        .into_iter()
        .map(|(user, (audio, video))| RankedUser {
            user_id: user.to_string(),
            audio_time: format_duration_dhm(audio),
            video_time: format_duration_dhm(video),
            metric_seconds: match metric {
                RankMetric::Audio => audio,
                RankMetric::Video => video,
            },
        })
        .collect();
    rows.sort_by(|a, b| {
        b.metric_seconds.cmp(&a.metric_seconds).then_with(|| a.user_id.cmp(&b.user_id))
    });
    rows.truncate(n);
    rows
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageRowError {
    pub row: u64,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct UsageParse {
    pub records: Vec<UsageActivityRecord>,
    pub row_errors: Vec<UsageRowError>,
}

pub const USAGE_CSV_HEADER: [&str; 8] = [
    "user_id",
    "window",
    "audio_time",
    "video_time",
    "one_to_one_calls",
    "device_class",
    "pstn_calls",
    "pstn_time",
];

/// Parse the merged usage CSV. Durations accept both report spellings;
/// counts accept thousands grouping.
pub fn parse_usage_csv<R: Read>(source: R) -> Result<UsageParse, csv::Error> {
    let mut reader = csv::Reader::from_reader(source);
    let mut out = UsageParse::default();
    for (idx, record) in reader.records().enumerate() {
        let row = idx as u64 + 2;
        let mut fail = |message: String| {
            out.row_errors.push(UsageRowError { row, message });
        };
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                fail(e.to_string());
                continue;
            }
        };
        let cell = |i: usize| record.get(i).unwrap_or("").trim();
        let Some(window) = Window::parse(cell(1)) else {
            fail(format!("unrecognized window {:?}", cell(1)));
            continue;
        };
        let Some(device_class) = DeviceClass::parse(cell(5)) else {
            fail(format!("unrecognized device class {:?}", cell(5)));
            continue;
        };
        let duration = |i: usize| {
            let c = cell(i);
            if c.is_empty() { Ok(0) } else { parse_duration_text(c) }
        };
        let count = |i: usize| {
            let c = cell(i);
            if c.is_empty() { Ok(0) } else { parse_count(c) }
        };
        let parsed = (|| {
            Ok::<UsageActivityRecord, super::duration::FormatError>(UsageActivityRecord {
                user_id: cell(0).to_string(),
                window,
                audio_seconds: duration(2)?,
                video_seconds: duration(3)?,
                one_to_one_calls: count(4)?,
                device_class,
                pstn_calls: count(6)?,
                pstn_seconds: duration(7)?,
            })
        })();
        match parsed {
            Ok(r) if !r.user_id.is_empty() => out.records.push(r),
            Ok(_) => fail("empty user id".to_string()),
            Err(e) => fail(e.to_string()),
        }
    }
    Ok(out)
}

/// Render summaries as the usage table, windows as columns in ascending
/// order, rows in the report's order.
pub fn render_usage_table(summaries: &BTreeMap<Window, UsageSummary>) -> String {
    let windows: Vec<Window> = summaries.keys().copied().collect();
    let mut rows: Vec<(String, Vec<String>)> = Vec::new();
    let col = |f: &dyn Fn(&UsageSummary) -> String| -> Vec<String> {
        windows.iter().map(|w| f(&summaries[w])).collect()
    };

    rows.push(("Total users of Teams services".into(), col(&|s| s.total_users.to_string())));
    rows.push(("1:1 Calls".into(), col(&|s| s.total_one_to_one_calls.to_string())));
    rows.push(("Total Audio time".into(), col(&|s| format_duration_dhm(s.total_audio_seconds))));
    rows.push(("Total Video time".into(), col(&|s| format_duration_dhm(s.total_video_seconds))));
    rows.push((
        "Average audio time per user (hours)".into(),
        col(&|s| s.avg_audio_hours_per_user.to_string()),
    ));
    rows.push((
        "Average video time per user (hours)".into(),
        col(&|s| s.avg_video_hours_per_user.to_string()),
    ));
    for class in DeviceClass::ALL {
        rows.push((
            class.report_label().into(),
            col(&|s| s.device_counts.get(&class).copied().unwrap_or(0).to_string()),
        ));
    }
    rows.push(("Total number Teams PSTN calls".into(), col(&|s| s.pstn_calls_total.to_string())));
    rows.push((
        "Total time Teams PSTN calls".into(),
        col(&|s| format_duration_dhm(s.pstn_duration_seconds)),
    ));

    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max("Usage".len());
    let mut widths: Vec<usize> = windows.iter().map(|w| w.label().len()).collect();
    for (_, cells) in &rows {
        for (i, c) in cells.iter().enumerate() {
            widths[i] = widths[i].max(c.len());
        }
    }

    let mut out = String::new();
    out.push_str(&format!("{:label_width$}", "Usage"));
    for (i, w) in windows.iter().enumerate() {
        out.push_str(&format!("  {:>w$}", w.label(), w = widths[i]));
    }
    out.push('\n');
    for (label, cells) in rows {
        out.push_str(&format!("{label:label_width$}"));
        for (i, c) in cells.iter().enumerate() {
            out.push_str(&format!("  {:>w$}", c, w = widths[i]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(user: &str, window: Window, audio: u64, video: u64) -> UsageActivityRecord {
        UsageActivityRecord {
            user_id: user.to_string(),
            window,
            audio_seconds: audio,
            video_seconds: video,
            one_to_one_calls: 1,
            device_class: DeviceClass::WindowsPc,
            pstn_calls: 0,
            pstn_seconds: 0,
        }
    }

    #[test]
    fn published_totals_reproduce_the_published_averages() {
        let cases = [
            (1171, 49_331_520, 12, 19_475_760, 5),
            (1224, 194_511_960, 44, 76_125_360, 17),
            (1272, 594_619_320, 130, 223_560_060, 49),
        ];
        for (users, audio, avg_audio, video, avg_video) in cases {
            assert_eq!(rounded_hours_per_user(audio, users), avg_audio, "audio for {users} users");
            assert_eq!(rounded_hours_per_user(video, users), avg_video, "video for {users} users");
        }
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(rounded_hours_per_user(3_600, 1), 1);
        assert_eq!(rounded_hours_per_user(5_400, 1), 2);
        assert_eq!(rounded_hours_per_user(5_399, 1), 1);
        assert_eq!(rounded_hours_per_user(1_800, 1), 1);
        assert_eq!(rounded_hours_per_user(1_799, 1), 0);
        assert_eq!(rounded_hours_per_user(0, 5), 0);
        assert_eq!(rounded_hours_per_user(100, 0), 0);
    }

    #[test]
    fn aggregation_counts_users_once_but_sums_their_time() {
        let records = vec![
            record("alice", Window::D7, 3_600, 0),
            record("alice", Window::D7, 3_600, 600),
            record("bob", Window::D7, 7_200, 0),
            record("carol", Window::D30, 60, 0),
        ];
        let summaries = aggregate_usage(&records);
        let d7 = &summaries[&Window::D7];
        assert_eq!(d7.total_users, 2);
        assert_eq!(d7.total_audio_seconds, 14_400);
        assert_eq!(d7.avg_audio_hours_per_user, 2);
        assert_eq!(d7.device_counts[&DeviceClass::WindowsPc], 2);
        assert_eq!(summaries[&Window::D30].total_users, 1);
    }

    #[test]
    fn device_counts_track_distinct_users_per_class() {
        let mut records = vec![record("alice", Window::D7, 0, 0)];
        records.push(UsageActivityRecord {
            device_class: DeviceClass::Ios,
            ..record("alice", Window::D7, 0, 0)
        });
        records.push(UsageActivityRecord {
            device_class: DeviceClass::Ios,
            ..record("bob", Window::D7, 0, 0)
        });
        let summaries = aggregate_usage(&records);
        let d7 = &summaries[&Window::D7];
        assert_eq!(d7.total_users, 2);
        assert_eq!(d7.device_counts[&DeviceClass::WindowsPc], 1);
        assert_eq!(d7.device_counts[&DeviceClass::Ios], 2);
        let class_sum: u64 = d7.device_counts.values().sum();
        assert!(class_sum >= d7.total_users);
    }

    #[test]
    fn a_single_user_hour_averages_to_one() {
        let summaries = aggregate_usage(&[record("solo", Window::D7, 3_600, 0)]);
        assert_eq!(summaries[&Window::D7].avg_audio_hours_per_user, 1);
    }

    #[test]
    fn rankings_order_by_metric_then_user_id() {
        let records = vec![
            record("zed", Window::D7, 100, 5),
            record("amy", Window::D7, 100, 50),
            record("max", Window::D7, 900, 1),
        ];
        let top = top_users(&records, 10, RankMetric::Audio);
        let ids: Vec<&str> = top.iter().map(|r| r.user_id.as_str()).collect();
        assert_eq!(ids, ["max", "amy", "zed"]);

        let top = top_users(&records, 2, RankMetric::Video);
        let ids: Vec<&str> = top.iter().map(|r| r.user_id.as_str()).collect();
        assert_eq!(ids, ["amy", "zed"]);
    }

    #[test]
    fn ranked_durations_use_the_report_spelling() {
        let secs = 2 * 86_400 + 3 * 3_600 + 10 * 60;
        let top = top_users(&[record("lead", Window::D7, secs, 0)], 1, RankMetric::Audio);
        assert_eq!(top[0].audio_time, "2 days 3 hours 10 minutes");
    }

    #[test]
    fn ranking_is_stable_under_record_shuffling() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut records: Vec<UsageActivityRecord> = (0..40)
            .map(|i| record(&format!("user{i:02}"), Window::D7, (i % 7) * 3_600, i * 60))
            .collect();
        let baseline = top_users(&records, 10, RankMetric::Audio);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x70b);
        for _ in 0..10 {
            records.shuffle(&mut rng);
            assert_eq!(top_users(&records, 10, RankMetric::Audio), baseline);
        }
    }

    #[test]
    fn the_usage_csv_round_trips_report_syntax() {
        let csv = "user_id,window,audio_time,video_time,one_to_one_calls,device_class,pstn_calls,pstn_time\n\
                   u1,D7,2 days 3 hours 10 minutes,00:05:00,1.234,Windows PC,3,00:12:00\n\
                   u2,last 30 days,0 days 1 hours 0 minutes,,17,iOS Phone,,\n\
                   u3,D7,garbage,,1,Mac,,\n\
                   u4,never,,,1,Mac,,\n";
        let parsed = parse_usage_csv(csv.as_bytes()).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.records[0].audio_seconds, 2 * 86_400 + 3 * 3_600 + 600);
        assert_eq!(parsed.records[0].one_to_one_calls, 1_234);
        assert_eq!(parsed.records[1].window, Window::D30);
        assert_eq!(parsed.records[1].device_class, DeviceClass::Ios);
        assert_eq!(parsed.row_errors.len(), 2);
    }

    #[test]
    fn the_rendered_table_keeps_report_row_order() {
        let summaries = aggregate_usage(&[record("a", Window::D7, 3_600, 0)]);
        let table = render_usage_table(&summaries);
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("Usage"));
        assert!(lines[0].contains("Last 7 days"));
        assert!(lines[1].starts_with("Total users of Teams services"));
        assert!(lines[2].starts_with("1:1 Calls"));
        let win_row = lines.iter().position(|l| l.starts_with("Windows PC users")).unwrap();
        let mac_row = lines.iter().position(|l| l.starts_with("Mac users")).unwrap();
        assert!(win_row < mac_row);
        assert!(lines.last().unwrap().starts_with("Total time Teams PSTN calls"));
    }
}
