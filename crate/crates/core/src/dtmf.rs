//! DTMF tone synthesis and detection.
//!
//! Symbols are laid out on the standard 4x4 telephony grid:
//!
//! ```text
//!           1209  1336  1477  1633
//!     697     1     2     3     A
//!     770     4     5     6     B
//!     852     7     8     9     C
//!     941     *     0     #     D
//! ```
//!
//! Detection runs one Goertzel filter per grid frequency over a fixed-size
//! window. A window yields a symbol when the strongest row and column tones
//! each dominate the rest of their group and the two are within the twist
//! limit. [`DtmfDecoder`] adds the two-window debounce used on live streams.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Low-group (row) frequencies in Hz.
pub const ROW_FREQS: [f64; 4] = [697.0, 770.0, 852.0, 941.0];
/// High-group (column) frequencies in Hz.
pub const COL_FREQS: [f64; 4] = [1209.0, 1336.0, 1477.0, 1633.0];

const KEYPAD: [[char; 4]; 4] = [
    ['1', '2', '3', 'A'],
    ['4', '5', '6', 'B'],
    ['7', '8', '9', 'C'],
    ['*', '0', '#', 'D'],
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DtmfError {
    #[error("invalid DTMF configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("'{0}' is not a DTMF symbol")]
    UnknownSymbol(char),
}

/// One of the sixteen DTMF keys. Stored as its grid cell, so every value is
/// valid by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DtmfSymbol {
    row: u8,
    col: u8,
}

impl DtmfSymbol {
    /// All sixteen symbols in row-major keypad order.
    pub const ALL: [DtmfSymbol; 16] = {
        let mut out = [DtmfSymbol { row: 0, col: 0 }; 16];
        let mut i = 0;
        while i < 16 {
            out[i] = DtmfSymbol {
                row: (i / 4) as u8,
                col: (i % 4) as u8,
            };
            i += 1;
        }
        out
    };

    pub fn from_char(c: char) -> Result<Self, DtmfError> {
        let c = c.to_ascii_uppercase();
        for (row, keys) in KEYPAD.iter().enumerate() {
            if let Some(col) = keys.iter().position(|&k| k == c) {
                return Ok(DtmfSymbol {
                    row: row as u8,
                    col: col as u8,
                });
            }
        }
        Err(DtmfError::UnknownSymbol(c))
    }

    pub fn as_char(self) -> char {
        KEYPAD[self.row as usize][self.col as usize]
    }

    /// The (low, high) tone pair in Hz.
    pub fn frequencies(self) -> (f64, f64) {
        (ROW_FREQS[self.row as usize], COL_FREQS[self.col as usize])
    }

    fn from_cell(row: usize, col: usize) -> Self {
        DtmfSymbol {
            row: row as u8,
            col: col as u8,
        }
    }
}

impl fmt::Display for DtmfSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Framing and detection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DtmfConfig {
    /// Hz.
    pub sample_rate: u32,
    /// Tone length in seconds.
    pub symbol_duration: f64,
    /// Trailing silence in seconds.
    pub gap_duration: f64,
    /// Peak amplitude of each of the two tones.
    pub amplitude: f64,
    /// Detection window length in samples.
    pub detect_window: usize,
    /// A winning tone must exceed this multiple of the rest of its group.
    pub power_ratio_threshold: f64,
    /// Maximum low/high power imbalance in dB.
    pub twist_limit: f64,
}

impl Default for DtmfConfig {
    fn default() -> Self {
        DtmfConfig {
            sample_rate: 8000,
            symbol_duration: 0.080,
            gap_duration: 0.080,
            amplitude: 0.45,
            detect_window: 320,
            power_ratio_threshold: 4.0,
            twist_limit: 8.0,
        }
    }
}

impl DtmfConfig {
    pub fn validate(&self) -> Result<(), DtmfError> {
        let nyquist_min = 2.0 * COL_FREQS[3];
        if (self.sample_rate as f64) < nyquist_min {
            return Err(DtmfError::Config(format!(
                "sample rate {} Hz is below {} Hz",
                self.sample_rate, nyquist_min
            )));
        }
        if !(self.symbol_duration.is_finite() && self.symbol_duration > 0.0) {
            return Err(DtmfError::Config("symbol duration must be positive".into()));
        }
        if !(self.gap_duration.is_finite() && self.gap_duration >= 0.0) {
            return Err(DtmfError::Config("gap duration must be non-negative".into()));
        }
        if !(0.0..=0.5).contains(&self.amplitude) {
            return Err(DtmfError::Config(format!(
                "per-tone amplitude {} outside [0, 0.5]",
                self.amplitude
            )));
        }
        if self.detect_window == 0 || self.detect_window > self.tone_samples() {
            return Err(DtmfError::Config(format!(
                "detect window {} must be in 1..={}",
                self.detect_window,
                self.tone_samples()
            )));
        }
        if !(self.power_ratio_threshold.is_finite() && self.power_ratio_threshold > 0.0) {
            return Err(DtmfError::Config("power ratio threshold must be positive".into()));
        }
        if !(self.twist_limit.is_finite() && self.twist_limit >= 0.0) {
            return Err(DtmfError::Config("twist limit must be non-negative".into()));
        }
        Ok(())
    }

    pub fn tone_samples(&self) -> usize {
        (self.sample_rate as f64 * self.symbol_duration).round() as usize
    }

    pub fn gap_samples(&self) -> usize {
        (self.sample_rate as f64 * self.gap_duration).round() as usize
    }
}

/// PCM audio for one or more symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneFrame {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl ToneFrame {
    pub fn silence(len: usize, sample_rate: u32) -> Self {
        ToneFrame {
            samples: vec![0.0; len],
            sample_rate,
        }
    }

    /// Mean square amplitude; zero for an empty frame.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn append(&mut self, other: &ToneFrame) {
        self.samples.extend_from_slice(&other.samples);
    }
}

/// Tone burst for `symbol` followed by the configured gap of silence.
pub fn synthesize_symbol(symbol: DtmfSymbol, config: &DtmfConfig) -> Result<ToneFrame, DtmfError> {
    config.validate()?;
    let (low, high) = symbol.frequencies();
    let fs = config.sample_rate as f64;
    let tone = config.tone_samples();
    let mut samples = Vec::with_capacity(tone + config.gap_samples());
    samples.extend((0..tone).map(|n| {
        let t = n as f64 / fs;
        let s = config.amplitude * ((2.0 * PI * low * t).sin() + (2.0 * PI * high * t).sin());
        s.clamp(-1.0, 1.0)
    }));
    samples.resize(tone + config.gap_samples(), 0.0);
    Ok(ToneFrame {
        samples,
        sample_rate: config.sample_rate,
    })
}

/// Concatenated frames for a whole symbol sequence.
pub fn synthesize_sequence(symbols: &[DtmfSymbol], config: &DtmfConfig) -> Result<ToneFrame, DtmfError> {
    config.validate()?;
    let mut out = ToneFrame::silence(0, config.sample_rate);
    for &s in symbols {
        out.append(&synthesize_symbol(s, config)?);
    }
    Ok(out)
}

/// Squared magnitude of DFT bin `round(N * f / fs)` via the Goertzel recurrence.
pub fn goertzel_power(samples: &[f64], target_freq: f64, sample_rate: f64) -> Result<f64, DtmfError> {
    if samples.is_empty() {
        return Err(DtmfError::Argument("empty sample window".into()));
    }
    let nyquist = sample_rate / 2.0;
    if sample_rate.is_nan()
        || sample_rate <= 0.0
        || target_freq.is_nan()
        || target_freq <= 0.0
        || target_freq >= nyquist
    {
        return Err(DtmfError::Argument(format!(
            "frequency {target_freq} Hz outside (0, {nyquist}) Hz"
        )));
    }
    let n = samples.len() as f64;
    let k = (n * target_freq / sample_rate).round();
    let w = 2.0 * PI * k / n;
    let coeff = 2.0 * w.cos();
    let (mut s1, mut s2) = (0.0_f64, 0.0_f64);
    for &x in samples {
        let s0 = x + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    // |X[k]|^2 = s1^2 + s2^2 - coeff*s1*s2; guard rounding below zero.
    Ok((s1 * s1 + s2 * s2 - coeff * s1 * s2).max(0.0))
}

/// A window that passed detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub symbol: DtmfSymbol,
    /// Smaller of the two dominance margins, in multiples of the threshold.
    pub confidence: f64,
}

/// Winner index and dominance ratio (winner / rest of group).
fn dominant(powers: &[f64; 4]) -> (usize, f64) {
    let mut best = 0;
    for i in 1..4 {
        if powers[i] > powers[best] {
            best = i;
        }
    }
    let rest: f64 = powers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, p)| p)
        .sum();
    let ratio = if rest > 0.0 {
        powers[best] / rest
    } else if powers[best] > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    (best, ratio)
}

/// Classify one window of `config.detect_window` samples.
pub fn detect_symbol(window: &[f64], config: &DtmfConfig) -> Result<Option<Detection>, DtmfError> {
    if window.len() != config.detect_window {
        return Err(DtmfError::Argument(format!(
            "window has {} samples, expected {}",
            window.len(),
            config.detect_window
        )));
    }
    let fs = config.sample_rate as f64;
    let mut rows = [0.0; 4];
    let mut cols = [0.0; 4];
    for i in 0..4 {
        rows[i] = goertzel_power(window, ROW_FREQS[i], fs)?;
        cols[i] = goertzel_power(window, COL_FREQS[i], fs)?;
    }
    let (row, row_ratio) = dominant(&rows);
    let (col, col_ratio) = dominant(&cols);
    let threshold = config.power_ratio_threshold;
    if !(row_ratio > threshold && col_ratio > threshold) {
        return Ok(None);
    }
    let twist_db = 10.0 * (rows[row] / cols[col]).log10();
    if twist_db.abs() > config.twist_limit {
        return Ok(None);
    }
    Ok(Some(Detection {
        symbol: DtmfSymbol::from_cell(row, col),
        confidence: row_ratio.min(col_ratio) / threshold,
    }))
}

/// Streaming decoder: fixed non-overlapping windows, two-window debounce,
/// repeat suppression until a silent window.
#[derive(Debug, Clone)]
pub struct DtmfDecoder {
    config: DtmfConfig,
    buffer: Vec<f64>,
    previous: Option<DtmfSymbol>,
    latched: Option<DtmfSymbol>,
    consumed: u64,
}

impl DtmfDecoder {
    pub fn new(config: DtmfConfig) -> Result<Self, DtmfError> {
        config.validate()?;
        Ok(DtmfDecoder {
            config,
            buffer: Vec::with_capacity(config.detect_window),
            previous: None,
            latched: None,
            consumed: 0,
        })
    }

    pub fn config(&self) -> &DtmfConfig {
        &self.config
    }

    /// Total samples pushed so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Samples still needed to complete the current window.
    pub fn until_window_boundary(&self) -> usize {
        if self.buffer.is_empty() {
            0
        } else {
            self.config.detect_window - self.buffer.len()
        }
    }

    pub fn push(&mut self, samples: &[f64]) -> Vec<DtmfSymbol> {
        let mut out = Vec::new();
        self.consumed += samples.len() as u64;
        let mut rest = samples;
        while !rest.is_empty() {
            let need = self.config.detect_window - self.buffer.len();
            let take = need.min(rest.len());
            self.buffer.extend_from_slice(&rest[..take]);
            rest = &rest[take..];
            if self.buffer.len() == self.config.detect_window {
                let hit = detect_symbol(&self.buffer, &self.config)
                    .expect("buffer length matches the window")
                    .map(|d| d.symbol);
                self.buffer.clear();
                if let Some(symbol) = self.on_window(hit) {
                    out.push(symbol);
                }
            }
        }
        out
    }

    fn on_window(&mut self, hit: Option<DtmfSymbol>) -> Option<DtmfSymbol> {
        let emit = match hit {
            None => {
                self.latched = None;
                None
            }
            Some(s) if self.previous == Some(s) && self.latched != Some(s) => {
                self.latched = Some(s);
                Some(s)
            }
            Some(_) => None,
        };
        self.previous = hit;
        emit
    }
}

/// Decode a complete recording. A trailing partial window is ignored.
pub fn decode_stream(samples: &[f64], config: &DtmfConfig) -> Result<Vec<DtmfSymbol>, DtmfError> {
    let mut decoder = DtmfDecoder::new(*config)?;
    Ok(decoder.push(samples))
}
