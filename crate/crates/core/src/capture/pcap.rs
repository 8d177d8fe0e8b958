use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::Path;

use thiserror::Error;

use super::dissect::{dissect_frame, LinkOutcome};
use super::PacketRecord;

const MAGIC_MICROS: u32 = 0xa1b2_c3d4;
const MAGIC_NANOS: u32 = 0xa1b2_3c4d;
const GLOBAL_HEADER_LEN: usize = 24;
const RECORD_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("not a classic pcap file (magic {0:#010x})")]
    BadMagic(u32),
    #[error("file shorter than the pcap global header")]
    TruncatedHeader,
    #[error("packet record #{index} exceeds the remaining bytes")]
    TruncatedPacket { index: u64 },
    #[error("i/o error reading capture")]
    Io(#[from] io::Error),
}

/// Frames the reader could not fully dissect, by reason. These are counts of
/// packets that were still yielded (with link/ip fields absent), not errors.
#[derive(Debug, Default, Clone, Copy)]
pub struct CaptureCounters {
    pub unsupported_link: u64,
    pub ipv6: u64,
    pub non_ip: u64,
    pub malformed: u64,
    pub fragments: u64,
}

/// Streaming classic-pcap reader. Packets are parsed one record at a time;
/// nothing is buffered beyond the current frame, so memory stays flat no
/// matter how large the file is.
pub struct CaptureReader<R> {
    src: R,
    big_endian: bool,
    nanos: bool,
    link_type: u32,
    next_index: u64,
    counters: CaptureCounters,
    done: bool,
}

impl<R: Read> CaptureReader<R> {
    pub fn new(mut src: R) -> Result<Self, CaptureError> {
        let mut magic = [0u8; 4];
        read_fully(&mut src, &mut magic).map_err(|_| CaptureError::TruncatedHeader)?;
        let magic_le = u32::from_le_bytes(magic);
        let magic_be = u32::from_be_bytes(magic);
        let (big_endian, nanos) = if magic_le == MAGIC_MICROS {
            (false, false)
        } else if magic_be == MAGIC_MICROS {
            (true, false)
        } else if magic_le == MAGIC_NANOS {
            (false, true)
        } else if magic_be == MAGIC_NANOS {
            (true, true)
        } else {
            return Err(CaptureError::BadMagic(magic_be));
        };
        let mut rest = [0u8; GLOBAL_HEADER_LEN - 4];
        read_fully(&mut src, &mut rest).map_err(|_| CaptureError::TruncatedHeader)?;
        let link_type = read_u32(&rest[16..20], big_endian);
        Ok(CaptureReader {
            src,
            big_endian,
            nanos,
            link_type,
            next_index: 0,
            counters: CaptureCounters::default(),
            done: false,
        })
    }

    pub fn link_type(&self) -> u32 {
        self.link_type
    }

    pub fn counters(&self) -> CaptureCounters {
        self.counters
    }

    fn read_record(&mut self) -> Result<Option<PacketRecord>, CaptureError> {
        let mut hdr = [0u8; RECORD_HEADER_LEN];
        match self.src.read(&mut hdr[..1])? {
            0 => return Ok(None), // clean EOF
            _ => {}
        }
        read_fully(&mut self.src, &mut hdr[1..])
            .map_err(|_| CaptureError::TruncatedPacket { index: self.next_index })?;

        let ts_sec = read_u32(&hdr[0..4], self.big_endian) as u64;
        let ts_frac = read_u32(&hdr[4..8], self.big_endian) as u64;
        let incl_len = read_u32(&hdr[8..12], self.big_endian) as u64;
        let orig_len = read_u32(&hdr[12..16], self.big_endian);

        let mut data = Vec::new();
        let got = (&mut self.src).take(incl_len).read_to_end(&mut data)?;
        if got as u64 != incl_len {
            return Err(CaptureError::TruncatedPacket { index: self.next_index });
        }

        let ts_us = ts_sec * 1_000_000 + if self.nanos { ts_frac / 1_000 } else { ts_frac };
        let index = self.next_index;
        self.next_index += 1;

        let outcome = dissect_frame(self.link_type, &data);
        match outcome.note {
            LinkOutcome::Ok => {}
            LinkOutcome::UnsupportedLink => self.counters.unsupported_link += 1,
            LinkOutcome::Ipv6 => self.counters.ipv6 += 1,
            LinkOutcome::NonIp => self.counters.non_ip += 1,
            LinkOutcome::Malformed => self.counters.malformed += 1,
            LinkOutcome::Fragment => self.counters.fragments += 1,
        }

        Ok(Some(PacketRecord {
            index,
            ts_us,
            src_mac: outcome.src_mac,
            dst_mac: outcome.dst_mac,
            ip: outcome.ip,
            wire_len: orig_len,
        }))
    }
}

impl<R: Read> Iterator for CaptureReader<R> {
    type Item = Result<PacketRecord, CaptureError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_record() {
            Ok(Some(p)) => Some(Ok(p)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Open a capture file and collect every record, tolerating a trailing
/// truncated packet (what parsed is kept; the truncation is reported).
pub fn open_capture(path: &Path) -> Result<(Vec<PacketRecord>, CaptureCounters, Option<CaptureError>), CaptureError> {
    let reader = CaptureReader::new(BufReader::new(File::open(path)?))?;
    collect_packets(reader)
}

pub(crate) fn collect_packets<R: Read>(
    mut reader: CaptureReader<R>,
) -> Result<(Vec<PacketRecord>, CaptureCounters, Option<CaptureError>), CaptureError> {
    let mut packets = Vec::new();
    let mut tail_error = None;
    for item in &mut reader {
        match item {
            Ok(p) => packets.push(p),
            Err(e @ CaptureError::TruncatedPacket { .. }) => {
                tail_error = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((packets, reader.counters(), tail_error))
}

fn read_u32(b: &[u8], big_endian: bool) -> u32 {
    let arr: [u8; 4] = b.try_into().expect("caller passes 4 bytes");
    if big_endian {
        u32::from_be_bytes(arr)
    } else {
        u32::from_le_bytes(arr)
    }
}

fn read_fully<R: Read>(src: &mut R, buf: &mut [u8]) -> io::Result<()> {
    src.read_exact(buf)
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;
    use std::net::Ipv4Addr;

    use super::*;
    use crate::capture::IpProto;
    use crate::forge::wire;

    fn udp_capture_bytes(big_endian: bool) -> Vec<u8> {
        let mut w = wire::PcapWriter::with_endianness(Vec::new(), big_endian).unwrap();
        let frame = wire::udp_frame(
            Ipv4Addr::new(192, 168, 1, 5),
            Ipv4Addr::new(52, 114, 74, 99),
            50014,
            3478,
            b"payload",
        );
        w.record(1_727_369, &frame).unwrap();
        w.into_inner()
    }

    #[test]
    fn round_trips_a_generated_udp_packet() {
        let bytes = udp_capture_bytes(false);
        let reader = CaptureReader::new(Cursor::new(bytes)).unwrap();
        let (packets, counters, tail) = collect_packets(reader).unwrap();
        assert!(tail.is_none());
        assert_eq!(counters.malformed, 0);
        assert_eq!(packets.len(), 1);

        let p = &packets[0];
        assert_eq!(p.index, 0);
        assert_eq!(p.ts_us, 1_727_369);
        assert_eq!(p.src_mac, Some([0x80, 0x58, 0xf8, 0x13, 0x2b, 0x5c]));
        let ip = p.ip.as_ref().unwrap();
        assert_eq!(ip.src_ip, Ipv4Addr::new(192, 168, 1, 5));
        assert_eq!(ip.dst_ip, Ipv4Addr::new(52, 114, 74, 99));
        assert_eq!(ip.proto, IpProto::Udp);
        assert_eq!(ip.src_port, Some(50014));
        assert_eq!(ip.dst_port, Some(3478));
        assert_eq!(ip.payload, b"payload");
        assert_eq!(p.wire_len as usize, 14 + 20 + 8 + 7);
    }

    #[test]
    fn reads_big_endian_captures() {
        let bytes = udp_capture_bytes(true);
        let reader = CaptureReader::new(Cursor::new(bytes)).unwrap();
        let (packets, _, _) = collect_packets(reader).unwrap();
        assert_eq!(packets.len(), 1);
        assert_eq!(packets[0].ts_us, 1_727_369);
        assert!(packets[0].has_five_tuple());
    }

    #[test]
    fn truncates_nanosecond_timestamps_to_microseconds() {
        let frame = wire::udp_frame(
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            1111,
            2222,
            b"x",
        );
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&MAGIC_NANOS.to_le_bytes());
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 8]);
        bytes.extend_from_slice(&65535u32.to_le_bytes());
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes()); // seconds
        bytes.extend_from_slice(&123_456_789u32.to_le_bytes()); // nanoseconds
        bytes.extend_from_slice(&(frame.len() as u32).to_le_bytes());
        bytes.extend_from_slice(&(frame.len() as u32).to_le_bytes());
        bytes.extend_from_slice(&frame);

        let reader = CaptureReader::new(Cursor::new(bytes)).unwrap();
        let (packets, _, _) = collect_packets(reader).unwrap();
        assert_eq!(packets[0].ts_us, 3_123_456);
    }

    #[test]
    fn rejects_non_capture_input() {
        let err = CaptureReader::new(Cursor::new(b"HELLO WORLD, NOT A CAPTURE".to_vec()))
            .err()
            .unwrap();
        match err {
            CaptureError::BadMagic(m) => assert_eq!(m, u32::from_be_bytes(*b"HELL")),
            other => panic!("expected BadMagic, got {other:?}"),
        }
    }

    #[test]
    fn reports_a_short_global_header() {
        let mut bytes = MAGIC_MICROS.to_le_bytes().to_vec();
        bytes.extend_from_slice(&[0u8; 10]);
        match CaptureReader::new(Cursor::new(bytes)) {
            Err(CaptureError::TruncatedHeader) => {}
            Err(other) => panic!("expected TruncatedHeader, got {other:?}"),
            Ok(_) => panic!("expected TruncatedHeader, got a reader"),
        }
    }

    #[test]
    fn keeps_packets_before_a_truncated_tail() {
        let mut w = wire::PcapWriter::new(Vec::new()).unwrap();
        let frame = wire::udp_frame(
            Ipv4Addr::new(10, 0, 0, 1),
            Ipv4Addr::new(10, 0, 0, 2),
            1111,
            2222,
            b"first",
        );
        w.record(0, &frame).unwrap();
        w.record(1_000_000, &frame).unwrap();
        let mut bytes = w.into_inner();
        bytes.truncate(bytes.len() - 5);

        let reader = CaptureReader::new(Cursor::new(bytes)).unwrap();
        let (packets, _, tail) = collect_packets(reader).unwrap();
        assert_eq!(packets.len(), 1);
        match tail {
            Some(CaptureError::TruncatedPacket { index: 1 }) => {}
            other => panic!("expected TruncatedPacket at index 1, got {other:?}"),
        }
    }

    #[test]
    fn counts_frames_it_cannot_dissect() {
        let mut w = wire::PcapWriter::new(Vec::new()).unwrap();
        // ARP request: not IP.
        let arp = wire::eth_frame([0xff; 6], [2; 6], 0x0806, &[0u8; 28]);
        w.record(0, &arp).unwrap();
        // IPv6 ethertype.
        let v6 = wire::eth_frame([1; 6], [2; 6], 0x86dd, &[0u8; 40]);
        w.record(1, &v6).unwrap();
        // IPv4 header chopped to 8 bytes.
        let short = wire::eth_frame([1; 6], [2; 6], 0x0800, &[0x45, 0, 0, 28, 0, 0, 0, 0]);
        w.record(2, &short).unwrap();
        let bytes = w.into_inner();

        let reader = CaptureReader::new(Cursor::new(bytes)).unwrap();
        let (packets, counters, _) = collect_packets(reader).unwrap();
        assert_eq!(packets.len(), 3);
        assert!(packets.iter().all(|p| p.ip.is_none()));
        assert_eq!(counters.non_ip, 1);
        assert_eq!(counters.ipv6, 1);
        assert_eq!(counters.malformed, 1);
    }

    #[test]
    fn unknown_link_types_are_counted_not_fatal() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&MAGIC_MICROS.to_le_bytes());
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 8]);
        bytes.extend_from_slice(&65535u32.to_le_bytes());
        bytes.extend_from_slice(&147u32.to_le_bytes()); // user-reserved link type
        bytes.extend_from_slice(&0u32.to_le_bytes());
        bytes.extend_from_slice(&0u32.to_le_bytes());
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(&[0xde, 0xad, 0xbe, 0xef]);

        let reader = CaptureReader::new(Cursor::new(bytes)).unwrap();
        let (packets, counters, _) = collect_packets(reader).unwrap();
        assert_eq!(packets.len(), 1);
        assert_eq!(counters.unsupported_link, 1);
    }

    #[test]
    fn an_empty_capture_yields_no_packets() {
        let w = wire::PcapWriter::new(Vec::new()).unwrap();
        let reader = CaptureReader::new(Cursor::new(w.into_inner())).unwrap();
        let (packets, _, tail) = collect_packets(reader).unwrap();
        assert!(packets.is_empty());
        assert!(tail.is_none());
    }
}
