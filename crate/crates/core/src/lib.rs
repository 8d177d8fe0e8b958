//! Offline analysis toolkit for Teams-style VoIP evidence: packet captures,
//! SIP signalling logs, gateway CDR exports, and tenant usage reports.

pub mod capture;
pub mod cdr;
pub mod classify;
pub mod media;
pub mod siplog;
pub mod tenant;
pub mod forge;
