use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CidrError {
    #[error("prefix length {0} out of range 0-32")]
    PrefixRange(u8),
    #[error("malformed CIDR text {0:?}")]
    Malformed(String),
}

/// An IPv4 prefix. The base address is normalized so every host bit is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CidrRange {
    base: Ipv4Addr,
    prefix_len: u8,
}

impl CidrRange {
    pub fn new(base: Ipv4Addr, prefix_len: u8) -> Result<CidrRange, CidrError> {
        if prefix_len > 32 {
            return Err(CidrError::PrefixRange(prefix_len));
        }
        let mask = prefix_mask(prefix_len);
        Ok(CidrRange {
            base: Ipv4Addr::from(u32::from(base) & mask),
            prefix_len,
        })
    }

    pub fn base(&self) -> Ipv4Addr {
        self.base
    }

    pub fn prefix_len(&self) -> u8 {
        self.prefix_len
    }

    /// True iff the top `prefix_len` bits of `addr` equal the range's.
    pub fn contains(&self, addr: Ipv4Addr) -> bool {
        let mask = prefix_mask(self.prefix_len);
        u32::from(addr) & mask == u32::from(self.base)
    }
}

fn prefix_mask(prefix_len: u8) -> u32 {
    if prefix_len == 0 {
        0
    } else {
        u32::MAX << (32 - prefix_len)
    }
}

impl FromStr for CidrRange {
    type Err = CidrError;

    fn from_str(s: &str) -> Result<Self, CidrError> {
        let (addr, len) = s
            .split_once('/')
            .ok_or_else(|| CidrError::Malformed(s.to_string()))?;
        let base: Ipv4Addr = addr
            .parse()
            .map_err(|_| CidrError::Malformed(s.to_string()))?;
        let prefix_len: u8 = len
            .parse()
            .map_err(|_| CidrError::Malformed(s.to_string()))?;
        CidrRange::new(base, prefix_len)
    }
}

impl std::fmt::Display for CidrRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.base, self.prefix_len)
    }
}
