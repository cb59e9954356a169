//! Seeded uplink/downlink radio model.
//!
//! Both links drop whole messages with a fixed probability and deliver the
//! rest after a fixed latency. The uplink adds white Gaussian noise to the
//! command audio; the downlink jitters camera sightings with a sigma
//! proportional to motor current, standing in for motor-winding interference
//! on the analog video.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtmf::ToneFrame;
use crate::vehicle::TelemetryFrame;

/// Random stream owned by one link direction.
pub type LinkRng = ChaCha8Rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid channel configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    /// One-way delivery delay, s.
    pub latency: f64,
    pub drop_probability: f64,
    /// Uplink audio SNR in dB; infinite disables noise (serialized as null).
    #[serde(with = "snr_serde")]
    pub snr_db: f64,
    /// Video noise sigma per ampere of motor current.
    pub video_noise_gain: f64,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            latency: 0.050,
            drop_probability: 0.01,
            snr_db: 25.0,
            video_noise_gain: 0.05,
            seed: 0,
        }
    }
}

impl ChannelConfig {
    /// No loss, no delay, no noise.
    pub fn ideal() -> Self {
        ChannelConfig {
            latency: 0.0,
            drop_probability: 0.0,
            snr_db: f64::INFINITY,
            video_noise_gain: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(ChannelError::Config(format!(
                "drop probability {} outside [0, 1]",
                self.drop_probability
            )));
        }
        if !(self.latency.is_finite() && self.latency >= 0.0) {
            return Err(ChannelError::Config(format!("latency {} must be >= 0", self.latency)));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(ChannelError::Config(format!("snr {} dB is not usable", self.snr_db)));
        }
        if !(self.video_noise_gain.is_finite() && self.video_noise_gain >= 0.0) {
            return Err(ChannelError::Config("video noise gain must be >= 0".into()));
        }
        Ok(())
    }

    /// Independent streams for the two directions, both derived from `seed`.
    pub fn link_rngs(&self) -> (LinkRng, LinkRng) {
        let mut up = ChaCha8Rng::seed_from_u64(self.seed);
        let mut down = ChaCha8Rng::seed_from_u64(self.seed);
        up.set_stream(0);
        down.set_stream(1);
        (up, down)
    }
}

mod snr_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transmission<T> {
    Dropped,
    Delivered { payload: T, delay: f64 },
}

impl<T> Transmission<T> {
    pub fn delivered(self) -> Option<T> {
        match self {
            Transmission::Delivered { payload, .. } => Some(payload),
            Transmission::Dropped => None,
        }
    }

    pub fn is_dropped(&self) -> bool {
        matches!(self, Transmission::Dropped)
    }
}

/// Uplink: drop, else add AWGN at `snr_db` relative to the frame's mean power.
///
/// The drop draw always comes first, so the stream advances identically for
/// a given call sequence.
pub fn transmit_audio<R: Rng + ?Sized>(
    frame: &ToneFrame,
    config: &ChannelConfig,
    rng: &mut R,
) -> Transmission<ToneFrame> {
    if rng.random::<f64>() < config.drop_probability {
        return Transmission::Dropped;
    }
    let mut out = frame.clone();
    let power = frame.power();
    if config.snr_db.is_finite() && power > 0.0 {
        let sigma = (power / 10f64.powf(config.snr_db / 10.0)).sqrt();
        for s in out.samples.iter_mut() {
            let n: f64 = StandardNormal.sample(rng);
            *s = (*s + sigma * n).clamp(-1.0, 1.0);
        }
    }
    Transmission::Delivered {
        payload: out,
        delay: config.latency,
    }
}

/// Video noise sigma for a given total motor current.
pub fn video_noise_sigma(motor_current: f64, config: &ChannelConfig) -> f64 {
    config.video_noise_gain * motor_current.max(0.0)
}

/// Downlink: drop, else perturb camera sightings by motor interference.
///
/// Bearing gets additive noise in radians; distance gets multiplicative noise
/// of the same sigma and is kept non-negative.
pub fn transmit_telemetry<R: Rng + ?Sized>(
    frame: &TelemetryFrame,
    motor_current: f64,
    config: &ChannelConfig,
    rng: &mut R,
) -> Transmission<TelemetryFrame> {
    if rng.random::<f64>() < config.drop_probability {
        return Transmission::Dropped;
    }
    let sigma = video_noise_sigma(motor_current, config);
    let mut out = frame.clone();
    out.camera_noise_sigma = sigma;
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma).expect("finite positive sigma");
        for s in out.camera.iter_mut() {
            s.bearing += noise.sample(rng);
            s.distance = (s.distance * (1.0 + noise.sample(rng))).max(0.0);
        }
    }
    Transmission::Delivered {
        payload: out,
        delay: config.latency,
    }
}

/// FIFO of in-flight messages keyed by the tick at which they arrive.
#[derive(Debug, Clone)]
pub struct DelayLine<T> {
    in_flight: VecDeque<(u64, T)>,
}

impl<T> Default for DelayLine<T> {
    fn default() -> Self {
        DelayLine {
            in_flight: VecDeque::new(),
        }
    }
}

impl<T> DelayLine<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queue `item` for arrival at `due_tick`. Arrival never overtakes an
    /// earlier send, so the line stays FIFO even if delays were to shrink.
    pub fn push(&mut self, due_tick: u64, item: T) {
        let due = self.in_flight.back().map_or(due_tick, |&(last, _)| due_tick.max(last));
        self.in_flight.push_back((due, item));
    }

    /// Everything due at or before `now_tick`, oldest first.
    pub fn pop_due(&mut self, now_tick: u64) -> Vec<T> {
        let mut out = Vec::new();
        while self.in_flight.front().is_some_and(|&(due, _)| due <= now_tick) {
            out.push(self.in_flight.pop_front().expect("front exists").1);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.in_flight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_flight.is_empty()
    }
}

/// Whole ticks needed to cover `latency` seconds.
pub fn latency_ticks(latency: f64, tick: f64) -> u64 {
    // Tolerate representation error so 0.05 / 0.01 is 5 ticks, not 6.
    (latency / tick - 1e-9).ceil().max(0.0) as u64
}
