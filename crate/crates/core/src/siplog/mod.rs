//! SIP-over-syslog evidence: streaming log reading, message parsing, dialog
//! reconstruction, windowed pre-selection, and per-dialog bundle export.

pub mod bundle;
pub mod dialogs;
pub mod message;
pub mod reader;

pub use bundle::{split_to_bundles, BundleSummary, DialogIndexRow};
pub use dialogs::{
    build_window_index, select_window, split_dialogs, Completeness, DialogSplit, SelectError,
    SipDialog, WindowIndex,
};
pub use message::{parse_sip, SipKind, SipMessage, SipParseError};
pub use reader::{open_syslog, LinePreprocessor, SipLogLine, SyslogCounters, SyslogReader};
