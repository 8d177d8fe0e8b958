//! Subcommand implementations and the plumbing they share.

mod cdr;
mod classify;
mod fixtures;
mod flows;
mod media;
mod sip;
mod tenant;

use std::fmt;
use std::path::Path;

use teamscope_core::capture::{open_capture, PacketRecord};
use teamscope_core::classify::RangeSet;

use crate::{Command, RunConfig};

/// A failed invocation, carrying the exit code contract: 1 environment,
/// 2 usage, 3 unparseable input, 4 inconsistency under --strict.
#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Input(String),
    Inconsistent(String),
    Io(String),
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Io(_) => 1,
            CmdError::Usage(_) => 2,
            CmdError::Input(_) => 3,
            CmdError::Inconsistent(_) => 4,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Usage(m)
            | CmdError::Input(m)
            | CmdError::Inconsistent(m)
            | CmdError::Io(m) => f.write_str(m),
        }
    }
}

pub type CmdResult = Result<(), CmdError>;

pub fn run(config: &RunConfig) -> CmdResult {
    match &config.command {
        Command::Flows(args) => flows::run(config, args),
        Command::Classify(args) => classify::run_classify(config, args),
        Command::WtDetect(args) => classify::run_wt_detect(config, args),
        Command::SipSplit(args) => sip::run_split(config, args),
        Command::SipSelect(args) => sip::run_select(config, args),
        Command::CdrCorrelate(args) => cdr::run(config, args),
        Command::ExtractAudio(args) => media::run(config, args),
        Command::Usage(args) => tenant::run_usage(config, args),
        Command::Holdmap(args) => tenant::run_holdmap(config, args),
        Command::Fixtures(cmd) => fixtures::run(config, cmd),
    }
}

/// Inputs must exist at invocation; a missing path is an argument error,
/// not a parse failure.
pub fn require_input(path: &Path) -> Result<(), CmdError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CmdError::Usage(format!("input {} does not exist", path.display())))
    }
}

pub fn load_capture(path: &Path, verbose: u8) -> Result<Vec<PacketRecord>, CmdError> {
    require_input(path)?;
    let (packets, counters, tail_error) = open_capture(path)
        .map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))?;
    if let Some(e) = tail_error {
        eprintln!("warning: {} ends early: {e}", path.display());
    }
    if verbose > 0 {
        eprintln!(
            "{}: {} packets ({} non-ip, {} malformed, {} fragments skipped)",
            path.display(),
            packets.len(),
            counters.non_ip,
            counters.malformed,
            counters.fragments
        );
    }
    Ok(packets)
}

pub fn load_ranges(config: &RunConfig) -> Result<RangeSet, CmdError> {
    match &config.ranges {
        Some(path) => {
            require_input(path)?;
            RangeSet::from_file(path)
                .map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))
        }
        None => Ok(RangeSet::teams_default()),
    }
}
