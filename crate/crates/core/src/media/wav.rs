//! RIFF/WAVE output for reassembled audio.

use std::io::{Seek, Write};

use hound::{SampleFormat, WavSpec, WavWriter};

use super::reassemble::{AudioArtifact, MonoBuffer};

pub fn write_wav_stereo<W: Write + Seek>(artifact: &AudioArtifact, w: W) -> hound::Result<()> {
    let spec = WavSpec {
        channels: 2,
        sample_rate: artifact.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::new(w, spec)?;
    for &s in &artifact.samples {
        writer.write_sample(s)?;
    }
    writer.finalize()
}

pub fn write_wav_mono<W: Write + Seek>(buffer: &MonoBuffer, w: W) -> hound::Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::new(w, spec)?;
    for &s in &buffer.samples {
        writer.write_sample(s)?;
    }
    writer.finalize()
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use super::*;
    use crate::media::stream::StreamKey;

    #[test]
    fn stereo_output_reads_back_sample_exact() {
        let key = StreamKey { ssrc: 1, trace_pt: 35, src_id: 36, payload_type: 0 };
        let artifact = AudioArtifact {
            sample_rate: 8000,
            samples: vec![1, -1, 32_000, -32_000, 0, 7],
            channel_sources: (key, key),
            alignment_offset: 0.0,
        };
        let mut buf = Cursor::new(Vec::new());
        write_wav_stereo(&artifact, &mut buf).unwrap();

        let mut reader = hound::WavReader::new(Cursor::new(buf.into_inner())).unwrap();
        let spec = reader.spec();
        assert_eq!(spec.channels, 2);
        assert_eq!(spec.sample_rate, 8000);
        assert_eq!(spec.bits_per_sample, 16);
        let back: Vec<i16> = reader.samples::<i16>().map(|s| s.unwrap()).collect();
        assert_eq!(back, artifact.samples);
    }
}
