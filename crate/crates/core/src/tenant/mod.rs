//! Tenant-side exports: usage reports, per-call device details, and the
//! legal-hold location map.

pub mod calldetail;
pub mod duration;
pub mod hold;
pub mod usage;

pub use calldetail::{
    ingest_call_detail, render_call_detail, CallDetailExport, PartyDetail, SchemaError,
    CALL_DETAIL_SCHEMA,
};
pub use duration::{format_duration_dhm, parse_count, parse_duration_text, FormatError};
pub use hold::{hold_location, hold_map, HoldScenario, UnknownScenario};
pub use usage::{
    aggregate_usage, parse_usage_csv, render_usage_table, top_users, DeviceClass, RankMetric,
    RankedUser, UsageActivityRecord, UsageParse, UsageRowError, UsageSummary, Window,
    USAGE_CSV_HEADER,
};
