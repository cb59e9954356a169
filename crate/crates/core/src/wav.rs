//! Mono 16-bit PCM WAV exchange for tone frames.

use std::path::Path;

use thiserror::Error;

use crate::dtmf::ToneFrame;

#[derive(Debug, Error)]
pub enum WavError {
    #[error(transparent)]
    Hound(#[from] hound::Error),
    #[error("unsupported WAV layout: {0}")]
    Unsupported(String),
}

const FULL_SCALE: f64 = 32767.0;

pub fn write_wav(path: impl AsRef<Path>, frame: &ToneFrame) -> Result<(), WavError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: frame.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in &frame.samples {
        writer.write_sample((s.clamp(-1.0, 1.0) * FULL_SCALE).round() as i16)?;
    }
    writer.finalize()?;
    Ok(())
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<ToneFrame, WavError> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(WavError::Unsupported(format!(
            "{} channel(s), {}-bit {:?}; expected mono 16-bit integer PCM",
            spec.channels, spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| (v as f64 / FULL_SCALE).clamp(-1.0, 1.0)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ToneFrame {
        samples,
        sample_rate: spec.sample_rate,
    })
}
