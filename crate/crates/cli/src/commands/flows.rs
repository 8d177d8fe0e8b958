//! `flows`: the conversation table of a capture.

use teamscope_core::capture::{
    build_conversations_filtered, conversations_to_csv, ConversationStats, IpProto,
};

use crate::commands::{load_capture, CmdError, CmdResult};
use crate::output::{emit, render_table, OutputFormat};
use crate::{FlowsArgs, ProtoArg, RunConfig};

pub fn run(config: &RunConfig, args: &FlowsArgs) -> CmdResult {
    let packets = load_capture(&args.pcap, config.verbose)?;
    let proto = args.proto.map(|p| match p {
        ProtoArg::Tcp => IpProto::Tcp,
        ProtoArg::Udp => IpProto::Udp,
    });
    let stats = build_conversations_filtered(&packets, |p| {
        let addr_ok = args.addr.is_none_or(|a| p.involves(a));
        let proto_ok = proto.is_none_or(|pr| p.ip.as_ref().is_some_and(|ip| ip.proto == pr));
        addr_ok && proto_ok
    });

    let bytes = match config.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            conversations_to_csv(&stats, &mut buf)
                .map_err(|e| CmdError::Io(format!("cannot serialize csv: {e}")))?;
            buf
        }
        OutputFormat::Text => render_text(&stats).into_bytes(),
        OutputFormat::Structured => {
            let mut s = serde_json::to_string_pretty(&stats).expect("stats serialize");
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(config.out.as_deref(), &bytes)
}

fn render_text(stats: &[ConversationStats]) -> String {
    let headers = [
        "Address A",
        "Port A",
        "Address B",
        "Port B",
        "Packets",
        "Bytes",
        "Packets A>B",
        "Bytes A>B",
        "Packets B>A",
        "Bytes B>A",
        "Rel Start",
        "Duration",
    ];
    let rows: Vec<Vec<String>> = stats
        .iter()
        .map(|s| {
            vec![
                s.addr_a.to_string(),
                s.port_a.to_string(),
                s.addr_b.to_string(),
                s.port_b.to_string(),
                s.packets_total.to_string(),
                s.bytes_total.to_string(),
                s.packets_ab.to_string(),
                s.bytes_ab.to_string(),
                s.packets_ba.to_string(),
                s.bytes_ba.to_string(),
                format!("{:.6}", s.rel_start),
                format!("{:.4}", s.duration),
            ]
        })
        .collect();
    render_table(&headers, &rows, &[0, 2])
}
