//! Gateway call-detail records: parsing, two-trunk correlation, summaries.

pub mod correlate;
pub mod records;
pub mod summary;

pub use correlate::{
    correlate_legs, correlate_legs_with, CallDirection, CallOutcome, CorrelatedCall, Correlation,
    GroupNames, OrphanGroup,
};
pub use records::{
    format_hms, parse_cdr, parse_cdr_dir, parse_cdr_with, parse_hms, CdrColumns, CdrError, CdrLeg,
    CdrParse, LegDirection, RowError,
};
pub use summary::{render_summary, summarize_cdr, write_calls_csv, CdrSummary, CALL_CSV_HEADER};
