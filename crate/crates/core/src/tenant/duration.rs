//! Duration and count parsing for admin-center exports.
//!
//! Usage reports write long durations as "<D> days <H> hours <M> minutes"
//! (the unit words are always plural, even for 1) and call logs write
//! "HH:MM:SS". Counts may arrive thousands-grouped with either "." or ","
//! depending on the export locale.

use thiserror::Error;

use crate::cdr::parse_hms;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("unrecognized duration text {0:?}")]
    BadDuration(String),
    #[error("unrecognized number {0:?}")]
    BadNumber(String),
}

/// Parse `"<D> days <H> hours <M> minutes"` or `"HH:MM:SS"` to seconds.
pub fn parse_duration_text(s: &str) -> Result<u64, FormatError> {
    let t = s.trim();
    let bad = || FormatError::BadDuration(s.to_string());

    if t.contains(':') {
        return parse_hms(t).map(u64::from).ok_or_else(bad);
    }

    let tokens: Vec<&str> = t.split_whitespace().collect();
    if tokens.len() != 6 {
        return Err(bad());
    }
    let unit = |word: &str, singular: &str, plural: &str| word == singular || word == plural;
    if !unit(tokens[1], "day", "days")
        || !unit(tokens[3], "hour", "hours")
        || !unit(tokens[5], "minute", "minutes")
    {
        return Err(bad());
    }
    let d: u64 = tokens[0].parse().map_err(|_| bad())?;
    let h: u64 = tokens[2].parse().map_err(|_| bad())?;
    let m: u64 = tokens[4].parse().map_err(|_| bad())?;
    if h > 23 || m > 59 {
        return Err(bad());
    }
    Ok(d * 86_400 + h * 3_600 + m * 60)
}

/// Format whole-minute durations the way usage reports do. Sub-minute
/// remainders are truncated; unit words stay plural to match the exports.
pub fn format_duration_dhm(secs: u64) -> String {
    let d = secs / 86_400;
    let h = (secs % 86_400) / 3_600;
    let m = (secs % 3_600) / 60;
    format!("{d} days {h} hours {m} minutes")
}

/// Parse a count that may be thousands-grouped: both `36368` and `36.368`
/// (or `36,368`) yield 36368. Anything not matching the groups-of-three
/// pattern is rejected rather than guessed at.
pub fn parse_count(s: &str) -> Result<u64, FormatError> {
    let t = s.trim();
    let bad = || FormatError::BadNumber(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if t.bytes().all(|b| b.is_ascii_digit()) {
        return t.parse().map_err(|_| bad());
    }
    let sep = match (t.contains('.'), t.contains(',')) {
        (true, false) => '.',
        (false, true) => ',',
        _ => return Err(bad()),
    };
    let groups: Vec<&str> = t.split(sep).collect();
    let head_ok = !groups[0].is_empty()
        && groups[0].len() <= 3
        && groups[0].bytes().all(|b| b.is_ascii_digit());
    let tail_ok = groups[1..]
        .iter()
        .all(|g| g.len() == 3 && g.bytes().all(|b| b.is_ascii_digit()));
    if groups.len() < 2 || !head_ok || !tail_ok {
        return Err(bad());
    }
    groups.concat().parse().map_err(|_| bad())
}
