//! Labeled CIDR range sets for service-traffic classification.

use std::io::{BufRead, BufReader, Read};
use std::net::Ipv4Addr;
use std::path::Path;

use thiserror::Error;

use crate::capture::CidrRange;

pub const TEAMS_RANGES: [&str; 2] = ["52.112.0.0/14", "52.120.0.0/14"];

#[derive(Debug, Error)]
pub enum RangeSetError {
    #[error("line {0}: expected \"label cidr\", got {1:?}")]
    BadLine(usize, String),
    #[error("line {0}: {1}")]
    BadCidr(usize, crate::capture::CidrError),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("range set is empty")]
    Empty,
    #[error("cannot read range file")]
    Io(#[from] std::io::Error),
}

/// Non-empty list of uniquely labeled ranges.
#[derive(Debug, Clone)]
pub struct RangeSet {
    entries: Vec<(String, CidrRange)>,
}

impl RangeSet {
    pub fn new(entries: Vec<(String, CidrRange)>) -> Result<RangeSet, RangeSetError> {
        if entries.is_empty() {
            return Err(RangeSetError::Empty);
        }
        for (i, (label, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(l, _)| l == label) {
                return Err(RangeSetError::DuplicateLabel(label.clone()));
            }
        }
        Ok(RangeSet { entries })
    }

    /// The published Teams service ranges.
    pub fn teams_default() -> RangeSet {
        let entries = TEAMS_RANGES
            .iter()
            .map(|cidr| (format!("teams-media/{cidr}"), cidr.parse().unwrap()))
            .collect();
        RangeSet::new(entries).unwrap()
    }

    /// Parse "label cidr" lines; blank lines and `#` comments are skipped.
    pub fn from_reader<R: Read>(r: R) -> Result<RangeSet, RangeSetError> {
        let mut entries = Vec::new();
        for (idx, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let (label, cidr, extra) = (parts.next(), parts.next(), parts.next());
            let (Some(label), Some(cidr), None) = (label, cidr, extra) else {
                return Err(RangeSetError::BadLine(lineno, trimmed.to_string()));
            };
            let range = cidr.parse().map_err(|e| RangeSetError::BadCidr(lineno, e))?;
            entries.push((label.to_string(), range));
        }
        RangeSet::new(entries)
    }

    pub fn from_file(path: &Path) -> Result<RangeSet, RangeSetError> {
        RangeSet::from_reader(std::fs::File::open(path)?)
    }

    /// Label of the first range containing `addr`.
    pub fn match_addr(&self, addr: Ipv4Addr) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, range)| range.contains(addr))
            .map(|(label, _)| label.as_str())
    }

    pub fn contains(&self, addr: Ipv4Addr) -> bool {
        self.match_addr(addr).is_some()
    }

    pub fn entries(&self) -> &[(String, CidrRange)] {
        &self.entries
    }
}
