//! `fixtures`: deterministic synthetic evidence plus ground-truth manifests.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;
use teamscope_core::forge::{
    gen_cdr, gen_cdr_reference, gen_pstn_call_capture, gen_sip_log, gen_usage, gen_wt_capture,
    CdrBatchSpec, GenError, Manifest, PstnCallSpec, SipLogSpec, UsageBatchSpec, UsageVariant,
    WtSessionSpec,
};

use crate::commands::{CmdError, CmdResult};
use crate::output::{emit, render_csv, render_json, OutputFormat};
use crate::{CdrFixArgs, FixtureCmd, RunConfig, UsageVariantArg};

pub fn run(config: &RunConfig, cmd: &FixtureCmd) -> CmdResult {
    let (out_dir, scenario, seed, files) = match cmd {
        FixtureCmd::PstnCall(args) => {
            let spec = PstnCallSpec {
                seed: args.common.seed,
                ring_seconds: args.ring_seconds,
                talk_seconds: args.talk_seconds,
                duplicate_rate: args.duplicate_rate,
                gap_packets: args.gap_packets,
            };
            let (pcap, manifest) =
                gen_pstn_call_capture(&spec).map_err(|e| CmdError::Usage(e.to_string()))?;
            let files = write_pair(&args.common.out_dir, "pstn_call", "pcap", &pcap, &manifest)?;
            (&args.common.out_dir, manifest.scenario, args.common.seed, files)
        }
        FixtureCmd::WtSession(args) => {
            let spec = WtSessionSpec {
                seed: args.common.seed,
                include_sip_packet: args.include_sip,
                include_peer_traffic: args.include_peer_traffic,
            };
            let (pcap, manifest) = gen_wt_capture(&spec);
            let files = write_pair(&args.common.out_dir, "wt_session", "pcap", &pcap, &manifest)?;
            (&args.common.out_dir, manifest.scenario, args.common.seed, files)
        }
        FixtureCmd::SipLog(args) => {
            let spec = SipLogSpec {
                seed: args.common.seed,
                dialogs: args.dialogs,
                interleave: args.interleave,
                byte_target: args.byte_target,
            };
            ensure_dir(&args.common.out_dir)?;
            let log_path = args.common.out_dir.join("sip.log");
            let file = File::create(&log_path)
                .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", log_path.display())))?;
            let mut writer = BufWriter::new(file);
            let manifest = gen_sip_log(&spec, &mut writer).map_err(|e| match e {
                GenError::Invalid(inner) => CmdError::Usage(inner.to_string()),
                GenError::Io(inner) => {
                    CmdError::Io(format!("cannot write {}: {inner}", log_path.display()))
                }
            })?;
            writer
                .flush()
                .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", log_path.display())))?;
            let log_bytes = fs::metadata(&log_path)
                .map_err(|e| CmdError::Io(format!("cannot stat {}: {e}", log_path.display())))?
                .len();
            let mut files = vec![(log_path, log_bytes)];
            files.push(write_manifest(&args.common.out_dir, "sip", &manifest)?);
            (&args.common.out_dir, manifest.scenario, args.common.seed, files)
        }
        FixtureCmd::Cdr(args) => {
            let (csv, manifest) = if args.reference {
                gen_cdr_reference()
            } else {
                let spec = CdrBatchSpec {
                    seed: args.common.seed,
                    calls: args.calls,
                    outcome_mix: parse_mix(args)?,
                };
                gen_cdr(&spec).map_err(|e| CmdError::Usage(e.to_string()))?
            };
            let files =
                write_pair(&args.common.out_dir, "cdr", "csv", csv.as_bytes(), &manifest)?;
            (&args.common.out_dir, manifest.scenario, args.common.seed, files)
        }
        FixtureCmd::Usage(args) => {
            let variant = match args.variant {
                UsageVariantArg::Reference => UsageVariant::ReferenceTable,
                UsageVariantArg::TopTalkers => {
                    UsageVariant::TopTalkers { filler_users: args.filler_users }
                }
                UsageVariantArg::Random => UsageVariant::Random { users: args.users },
            };
            let spec = UsageBatchSpec { seed: args.common.seed, variant };
            let (csv, manifest) = gen_usage(&spec).map_err(|e| CmdError::Usage(e.to_string()))?;
            let files =
                write_pair(&args.common.out_dir, "usage", "csv", csv.as_bytes(), &manifest)?;
            (&args.common.out_dir, manifest.scenario, args.common.seed, files)
        }
    };

    let bytes = match config.format {
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "scenario: {scenario}");
            let _ = writeln!(out, "seed: {seed}");
            for (path, size) in &files {
                let _ = writeln!(out, "wrote {} ({size} bytes)", path.display());
            }
            out.into_bytes()
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = files
                .iter()
                .map(|(path, size)| vec![path.display().to_string(), size.to_string()])
                .collect();
            render_csv(&["path", "bytes"], &rows)?
        }
        OutputFormat::Structured => render_json(&json!({
            "scenario": scenario,
            "seed": seed,
            "out_dir": out_dir.display().to_string(),
            "files": files.iter().map(|(path, size)| json!({
                "path": path.display().to_string(),
                "bytes": size,
            })).collect::<Vec<_>>(),
        })),
    };
    emit(config.out.as_deref(), &bytes)
}

fn parse_mix(args: &CdrFixArgs) -> Result<[u32; 4], CmdError> {
    let parts: Vec<&str> = args.mix.split(',').collect();
    let bad = || {
        CmdError::Usage(format!(
            "bad --mix {:?}; expected four comma-separated weights",
            args.mix
        ))
    };
    if parts.len() != 4 {
        return Err(bad());
    }
    let mut mix = [0u32; 4];
    for (slot, part) in mix.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| bad())?;
    }
    Ok(mix)
}

fn ensure_dir(dir: &Path) -> Result<(), CmdError> {
    fs::create_dir_all(dir)
        .map_err(|e| CmdError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<(PathBuf, u64), CmdError> {
    fs::write(&path, bytes)
        .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok((path, bytes.len() as u64))
}

fn write_manifest(dir: &Path, stem: &str, manifest: &Manifest) -> Result<(PathBuf, u64), CmdError> {
    write_file(dir.join(format!("{stem}.manifest.json")), manifest.to_json_string().as_bytes())
}

fn write_pair(
    dir: &Path,
    stem: &str,
    ext: &str,
    artifact: &[u8],
    manifest: &Manifest,
) -> Result<Vec<(PathBuf, u64)>, CmdError> {
    ensure_dir(dir)?;
    Ok(vec![
        write_file(dir.join(format!("{stem}.{ext}")), artifact)?,
        write_manifest(dir, stem, manifest)?,
    ])
}
