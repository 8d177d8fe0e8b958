//! Service-traffic classification: labeled CIDR ranges, DNS correlation,
//! SIP presence scanning, and Walkie-Talkie detection.

mod dns;
mod label;
mod ranges;
mod sip_scan;
mod wt;

pub use dns::{extract_dns, DnsObservation};
pub use label::{classify_flows, FlowLabel, FlowLabelKind};
pub use ranges::{RangeSet, RangeSetError, TEAMS_RANGES};
pub use sip_scan::{detect_sip, is_sip_start, SipScan};
pub use wt::{
    detect_walkie_talkie, NameMatch, WtError, WtOptions, WtReport, WtSession, WtVerdict,
    DEFAULT_IDLE_GAP_US, DEFAULT_WT_NAME, WT_REPORT_SCHEMA,
};
