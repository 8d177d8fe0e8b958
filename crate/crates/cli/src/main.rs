//! Command-line front end: every analysis in the toolkit as one subcommand,
//! with uniform output formats and exit codes scripts can branch on.
//!
//! Exit codes: 0 success, 1 environment failure, 2 usage or argument error,
//! 3 unparseable input, 4 analysis inconsistency under `--strict`.

mod commands;
mod output;

use std::net::Ipv4Addr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::output::OutputFormat;

/// One parsed invocation: a single subcommand plus the output knobs shared
/// by every report.
#[derive(Debug, Parser)]
#[command(name = "teamscope", version, about = "Offline analysis of VoIP evidence")]
pub struct RunConfig {
    /// Report serialization.
    #[arg(long, short = 'f', global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Write the subcommand's primary output to this file instead of
    /// standard output; for extract-audio this is the WAV destination.
    #[arg(long, short = 'o', global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Service ranges as "label cidr" lines, replacing the built-in set.
    #[arg(long, global = true, value_name = "FILE")]
    pub ranges: Option<PathBuf>,
    /// Diagnostics to the error stream; repeat for more detail.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-conversation packet and byte statistics from a capture.
    Flows(FlowsArgs),
    /// Label conversations against service ranges and DNS evidence.
    Classify(ClassifyArgs),
    /// Walkie-Talkie detection verdict for one client address.
    WtDetect(WtDetectArgs),
    /// Split a SIP syslog into per-dialog bundles plus an index.
    SipSplit(SipSplitArgs),
    /// Pull the syslog records of dialogs active in a time window.
    SipSelect(SipSelectArgs),
    /// Correlate two-leg gateway CDR exports into calls.
    CdrCorrelate(CdrCorrelateArgs),
    /// Inventory RTP streams in a debug capture and extract audio.
    ExtractAudio(ExtractAudioArgs),
    /// Aggregate usage-report CSVs into per-window summaries.
    Usage(UsageArgs),
    /// Content locations searched when placing legal holds.
    Holdmap(HoldmapArgs),
    /// Generate deterministic fixtures with ground-truth manifests.
    #[command(subcommand)]
    Fixtures(FixtureCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtoArg {
    Tcp,
    Udp,
}

#[derive(Debug, Args)]
pub struct FlowsArgs {
    /// Capture to analyze.
    #[arg(long, value_name = "FILE")]
    pub pcap: PathBuf,
    /// Keep only conversations involving this address.
    #[arg(long, value_name = "IP")]
    pub addr: Option<Ipv4Addr>,
    /// Keep only conversations of this transport.
    #[arg(long, value_enum)]
    pub proto: Option<ProtoArg>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Capture to analyze.
    #[arg(long, value_name = "FILE")]
    pub pcap: PathBuf,
    /// Client address; fixes which flow side counts as remote.
    #[arg(long, value_name = "IP")]
    pub client: Option<Ipv4Addr>,
    /// Local gateway or proxy address to label separately.
    #[arg(long, value_name = "IP")]
    pub gateway: Option<Ipv4Addr>,
}

#[derive(Debug, Args)]
pub struct WtDetectArgs {
    /// Capture to analyze.
    #[arg(long, value_name = "FILE")]
    pub pcap: PathBuf,
    /// Client whose push-to-talk activity is in question.
    #[arg(long, value_name = "IP")]
    pub client: Ipv4Addr,
    /// Suspected conversation partner; direct traffic to it contradicts
    /// cloud-relayed push-to-talk.
    #[arg(long, value_name = "IP")]
    pub peer: Option<Ipv4Addr>,
    /// Seconds of silence that close a session.
    #[arg(long, value_name = "SECS", default_value_t = 30.0)]
    pub idle_gap: f64,
    /// DNS name that fingerprints the app.
    #[arg(long, value_name = "NAME", default_value = teamscope_core::classify::DEFAULT_WT_NAME)]
    pub wt_name: String,
    /// Also accept subdomains of the fingerprint name.
    #[arg(long)]
    pub suffix_match: bool,
    /// Exit 4 when the verdict is INCONSISTENT.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct SipSplitArgs {
    /// Syslog to split; gzip is detected automatically.
    #[arg(long, value_name = "FILE")]
    pub log: PathBuf,
    /// Directory receiving one <call_id>.sip per dialog plus the index.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SipSelectArgs {
    /// Syslog to read; gzip is detected automatically.
    #[arg(long, value_name = "FILE")]
    pub log: PathBuf,
    /// Window start, RFC 3339 or "YYYY-MM-DDTHH:MM:SS" (UTC assumed).
    #[arg(long, value_name = "TIME")]
    pub from: String,
    /// Window end, same forms as --from.
    #[arg(long, value_name = "TIME")]
    pub to: String,
    /// Keep only dialogs that involve this caller or callee substring.
    #[arg(long, value_name = "TEXT")]
    pub participant: Option<String>,
}

#[derive(Debug, Args)]
pub struct CdrCorrelateArgs {
    /// One CDR export.
    #[arg(long = "in", value_name = "FILE", conflicts_with = "dir", required_unless_present = "dir")]
    pub input: Option<PathBuf>,
    /// Directory of CSV exports, ingested in name order.
    #[arg(long, value_name = "DIR")]
    pub dir: Option<PathBuf>,
    /// IP group naming the Teams trunk (repeatable).
    #[arg(long = "teams-group", value_name = "NAME")]
    pub teams_groups: Vec<String>,
    /// IP group naming the PBX/PSTN trunk (repeatable).
    #[arg(long = "pbx-group", value_name = "NAME")]
    pub pbx_groups: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExtractAudioArgs {
    /// Debug-recording capture.
    #[arg(long, value_name = "FILE")]
    pub pcap: PathBuf,
    /// Stream selector "(trace_pt,src_id)|(trace_pt,src_id)…"; selector
    /// order fixes the channel order. Omit to inventory every stream.
    #[arg(long, value_name = "EXPR")]
    pub select: Option<String>,
    /// UDP port the recording frames arrive on.
    #[arg(long, value_name = "PORT", default_value_t = teamscope_core::media::ACDR_DEFAULT_PORT)]
    pub port: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Audio,
    Video,
}

#[derive(Debug, Args)]
pub struct UsageArgs {
    /// Usage-report CSV.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Report the top N users instead of the window summary.
    #[arg(long, value_name = "N")]
    pub top: Option<usize>,
    /// Ranking metric for --top.
    #[arg(long, value_enum, default_value_t = MetricArg::Audio)]
    pub metric: MetricArg,
}

#[derive(Debug, Args)]
pub struct HoldmapArgs {
    /// Show one scenario only (short name, e.g. "user chats").
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,
}

#[derive(Debug, Args)]
pub struct FixtureCommon {
    /// PRNG seed; identical seeds reproduce identical bytes.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory receiving the artifact and its manifest.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum FixtureCmd {
    /// Four-stream debug-recording capture of one gateway call.
    PstnCall(PstnCallFixArgs),
    /// Client-side capture of cloud-relayed push-to-talk traffic.
    WtSession(WtSessionFixArgs),
    /// Interleaved SIP-over-syslog transcript.
    SipLog(SipLogFixArgs),
    /// Two-leg gateway CDR export.
    Cdr(CdrFixArgs),
    /// Admin-center usage report.
    Usage(UsageFixArgs),
}

#[derive(Debug, Args)]
pub struct PstnCallFixArgs {
    #[command(flatten)]
    pub common: FixtureCommon,
    /// Ring-back heard before the callee answers, seconds.
    #[arg(long, default_value_t = 4)]
    pub ring_seconds: u32,
    /// Conversation length after answer, seconds.
    #[arg(long, default_value_t = 30)]
    pub talk_seconds: u32,
    /// Fraction of each stream's packets to duplicate on the wire.
    #[arg(long, default_value_t = 0.05)]
    pub duplicate_rate: f64,
    /// Consecutive packets dropped from the caller-side leg.
    #[arg(long, default_value_t = 3)]
    pub gap_packets: u16,
}

#[derive(Debug, Args)]
pub struct WtSessionFixArgs {
    #[command(flatten)]
    pub common: FixtureCommon,
    /// Plant one SIP packet, contradicting the app's fingerprint.
    #[arg(long)]
    pub include_sip: bool,
    /// Plant direct client-to-peer datagrams.
    #[arg(long)]
    pub include_peer_traffic: bool,
}

#[derive(Debug, Args)]
pub struct SipLogFixArgs {
    #[command(flatten)]
    pub common: FixtureCommon,
    /// Dialogs to emit.
    #[arg(long, default_value_t = 100)]
    pub dialogs: u64,
    /// Upper bound on dialogs open at once.
    #[arg(long, default_value_t = 10)]
    pub interleave: u64,
    /// Pad with gateway chatter until the log is about this many bytes.
    #[arg(long, value_name = "BYTES")]
    pub byte_target: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CdrFixArgs {
    #[command(flatten)]
    pub common: FixtureCommon,
    /// Emit the pinned ten-row reference export instead of a random batch.
    #[arg(long, conflicts_with_all = ["calls", "mix"])]
    pub reference: bool,
    /// Calls in the batch (two legs each).
    #[arg(long, default_value_t = 100)]
    pub calls: u64,
    /// Outcome weights "completed,no_answer,busy,failed".
    #[arg(long, value_name = "W,W,W,W", default_value = "70,15,10,5")]
    pub mix: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UsageVariantArg {
    /// Pinned three-window report with known aggregate cells.
    Reference,
    /// Pinned top-ten ranking over seeded filler users.
    TopTalkers,
    /// Randomized three-window report.
    Random,
}

#[derive(Debug, Args)]
pub struct UsageFixArgs {
    #[command(flatten)]
    pub common: FixtureCommon,
    #[arg(long, value_enum, default_value_t = UsageVariantArg::Reference)]
    pub variant: UsageVariantArg,
    /// User pool for --variant random.
    #[arg(long, default_value_t = 500)]
    pub users: u64,
    /// Background users for --variant top-talkers.
    #[arg(long, default_value_t = 400)]
    pub filler_users: u64,
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match commands::run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("teamscope: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
