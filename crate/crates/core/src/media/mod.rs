//! Debug-recording media extraction: ACDR dissection, RTP stream grouping
//! with deduplication, G.711 decoding, and stereo merge of two call legs.

mod acdr;
mod g711;
mod reassemble;
mod rtp;
mod stream;
mod wav;

pub use acdr::{decode_acdr, encode_acdr, parse_acdr, parse_acdr_with, AcdrFrame, AcdrMediaType, ACDR_DEFAULT_PORT};
pub use g711::{decode_alaw, decode_g711, decode_sample, decode_ulaw, encode_alaw, encode_sample, encode_ulaw, Law};
pub use reassemble::{merge_stereo, reassemble, AudioArtifact, MediaError, MonoBuffer, G711_SAMPLE_RATE};
pub use rtp::{encode_rtp, parse_rtp, RtpPacket, RtpParseError};
pub use stream::{enumerate_streams, extended_seqs, stream_inventory, RtpStream, SeqGap, StreamKey};
pub use wav::{write_wav_mono, write_wav_stereo};
