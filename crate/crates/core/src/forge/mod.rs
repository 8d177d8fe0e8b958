//! Deterministic fixture generation.
//!
//! Every generator takes an explicit seed and produces byte-identical output
//! for the same seed, plus a JSON manifest describing the ground truth that
//! went into the artifact. Analysis results can then be checked against the
//! manifest instead of against hand-maintained constants.

mod audio;
mod cdr_gen;
mod scenario;
mod siplog_gen;
mod usage_gen;
pub mod wire;
mod wt;

pub use audio::{gen_pstn_call_capture, PstnCallSpec, PACKET_SAMPLES};
pub use cdr_gen::{gen_cdr, gen_cdr_reference, CdrBatchSpec, CDR_HEADER};
pub use siplog_gen::{gen_sip_log, SipLogSpec};
pub use usage_gen::{gen_usage, UsageBatchSpec, UsageVariant};
pub use wt::{gen_wt_capture, WtSessionSpec};
pub use scenario::{
    pearson, tone_samples, CdrTruth, DialogTruth, DnsTruth, FlowTruth, GapTruth, GenError,
    InvalidSpec, LogStats, Manifest, RankedTruth, StereoTruth, StreamTruth, ToneSegment,
    UsageTruth, UsageWindowTruth, MANIFEST_SCHEMA,
};
