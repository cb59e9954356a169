//! Operator-to-vehicle loop.
//!
//! A [`Session`] owns the whole pipeline. Submitting a command encodes it to
//! a DTMF frame and puts it on the uplink; each [`Session::tick`] plays due
//! uplink audio into the vehicle's decoder, applies decoded commands to the
//! relay bank or searchlight, steps the vehicle, and sends a telemetry frame
//! back over the downlink.
//!
//! The vehicle receiver consumes audio at the sample rate, one tick's worth
//! per tick. Arriving frames start on a detection-window boundary so a
//! symbol's windows never straddle the frame start.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    latency_ticks, transmit_audio, transmit_telemetry, ChannelConfig, ChannelError, DelayLine, LinkRng, Transmission,
};
use crate::command::{decode_command, encode_command, Command};
use crate::dtmf::{synthesize_symbol, DtmfConfig, DtmfDecoder, DtmfError, DtmfSymbol, ToneFrame};
use crate::relay::{command_to_relays_with, relays_to_motors, DriveState, RelayBank, TurnConvention};
use crate::scenario::Scenario;
use crate::vehicle::{apply_searchlight, step, SimError, TelemetryFrame, VehicleParams, VehicleState, World};

pub const DEFAULT_PORT: u16 = 8765;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("session is stopped")]
    Stopped,
    #[error("tick must be positive and cover at least one audio sample, got {0}")]
    BadTick(f64),
    #[error(transparent)]
    Dtmf(#[from] DtmfError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Vehicle(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Simulation step, s.
    pub tick: f64,
    pub channel: ChannelConfig,
    pub dtmf: DtmfConfig,
    pub vehicle: VehicleParams,
    pub scenario: World,
    /// Initial charge, Ah.
    pub battery_ah: f64,
    pub invert_turns: bool,
    pub port: u16,
}

impl SessionConfig {
    /// Defaults everywhere except the arena.
    pub fn new(world: World) -> Self {
        let vehicle = VehicleParams::default();
        SessionConfig {
            tick: 0.01,
            channel: ChannelConfig::default(),
            dtmf: DtmfConfig::default(),
            battery_ah: vehicle.battery_capacity,
            vehicle,
            scenario: world,
            invert_turns: false,
            port: DEFAULT_PORT,
        }
    }

    /// Takes the world, vehicle parameters, charge and seed from a scenario file.
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let mut c = SessionConfig::new(scenario.world.clone());
        c.vehicle = scenario.params;
        c.battery_ah = scenario.initial_charge();
        c.channel.seed = scenario.seed;
        c
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        self.dtmf.validate()?;
        self.channel.validate()?;
        self.vehicle.validate()?;
        self.scenario.validate(&self.vehicle)?;
        if !(self.tick.is_finite() && self.tick > 0.0) || self.samples_per_tick() == 0 {
            return Err(SessionError::BadTick(self.tick));
        }
        Ok(())
    }

    pub fn samples_per_tick(&self) -> usize {
        (self.dtmf.sample_rate as f64 * self.tick).round() as usize
    }

    pub fn turns(&self) -> TurnConvention {
        TurnConvention::from_invert_flag(self.invert_turns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Metrics {
    /// Commands submitted.
    pub sent: u64,
    /// Uplink frames that decoded to a command.
    pub decoded: u64,
    /// Uplink frames lost by the channel.
    pub dropped: u64,
    /// Delivered frames that decoded to nothing or to an unmapped symbol.
    pub decode_errors: u64,
    /// Symbols decoded outside any transmitted frame (noise).
    pub spurious: u64,
}

impl Metrics {
    pub fn balanced(&self) -> bool {
        self.decoded + self.dropped + self.decode_errors <= self.sent
    }
}

/// Local sequence number returned by [`Session::submit_command`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub seq: u64,
}

/// Read-only view for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSnapshot {
    pub ticks: u64,
    pub vehicle: VehicleState,
    pub relays: RelayBank,
    /// Uplink frames in flight or still being played to the decoder.
    pub pending_audio: usize,
    pub last_command: Option<Command>,
    pub metrics: Metrics,
    pub running: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameOutcome {
    Command,
    Unmapped,
}

/// Absolute sample span of one delivered frame.
#[derive(Debug, Clone)]
struct FrameSpan {
    start: u64,
    end: u64,
    outcome: Option<FrameOutcome>,
}

/// Vehicle-side audio path: the air, the framer and the decoder.
#[derive(Debug, Clone)]
struct Receiver {
    air: VecDeque<f64>,
    spans: VecDeque<FrameSpan>,
    decoder: DtmfDecoder,
}

impl Receiver {
    fn new(config: DtmfConfig) -> Result<Self, DtmfError> {
        Ok(Receiver {
            air: VecDeque::new(),
            spans: VecDeque::new(),
            decoder: DtmfDecoder::new(config)?,
        })
    }

    fn queued_end(&self) -> u64 {
        self.decoder.consumed() + self.air.len() as u64
    }

    fn enqueue(&mut self, frame: &ToneFrame) {
        let window = self.decoder.config().detect_window as u64;
        let pad = (window - self.queued_end() % window) % window;
        self.air.extend(std::iter::repeat_n(0.0, pad as usize));
        let start = self.queued_end();
        self.air.extend(frame.samples.iter().copied());
        self.spans.push_back(FrameSpan {
            start,
            end: self.queued_end(),
            outcome: None,
        });
    }

    fn pending_frames(&self) -> usize {
        self.spans.len()
    }

    /// Play `n` samples (silence when nothing is on the air) and return the
    /// decoded symbols in order.
    fn advance(&mut self, n: usize, metrics: &mut Metrics) -> Vec<DtmfSymbol> {
        let window = self.decoder.config().detect_window;
        let mut out = Vec::new();
        let mut remaining = n;
        let mut chunk = Vec::with_capacity(window);
        while remaining > 0 {
            let boundary = self.decoder.until_window_boundary();
            let take = remaining.min(if boundary == 0 { window } else { boundary });
            chunk.clear();
            for _ in 0..take {
                chunk.push(self.air.pop_front().unwrap_or(0.0));
            }
            remaining -= take;
            let emitted = self.decoder.push(&chunk);
            let at = self.decoder.consumed() - 1;
            for symbol in emitted {
                let outcome = if decode_command(symbol).is_some() {
                    FrameOutcome::Command
                } else {
                    FrameOutcome::Unmapped
                };
                match self.spans.iter_mut().find(|s| s.start <= at && at < s.end) {
                    Some(span) => {
                        span.outcome.get_or_insert(outcome);
                    }
                    None => metrics.spurious += 1,
                }
                out.push(symbol);
            }
        }
        let consumed = self.decoder.consumed();
        while self.spans.front().is_some_and(|s| s.end <= consumed) {
            match self.spans.pop_front().and_then(|s| s.outcome) {
                Some(FrameOutcome::Command) => metrics.decoded += 1,
                _ => metrics.decode_errors += 1,
            }
        }
        out
    }
}

pub struct Session {
    config: SessionConfig,
    vehicle: VehicleState,
    relays: RelayBank,
    target: DriveState,
    uplink: DelayLine<ToneFrame>,
    downlink: DelayLine<TelemetryFrame>,
    up_rng: LinkRng,
    down_rng: LinkRng,
    receiver: Receiver,
    latency_ticks: u64,
    ticks: u64,
    next_seq: u64,
    last_command: Option<Command>,
    metrics: Metrics,
    running: bool,
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self, SessionError> {
        config.validate()?;
        let (up_rng, down_rng) = config.channel.link_rngs();
        let vehicle = VehicleState::at_rest(&config.scenario, &config.vehicle, config.battery_ah);
        Ok(Session {
            receiver: Receiver::new(config.dtmf)?,
            latency_ticks: latency_ticks(config.channel.latency, config.tick),
            vehicle,
            relays: RelayBank::OPEN,
            target: DriveState::OFF,
            uplink: DelayLine::new(),
            downlink: DelayLine::new(),
            up_rng,
            down_rng,
            ticks: 0,
            next_seq: 1,
            last_command: None,
            metrics: Metrics::default(),
            running: true,
            config,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn vehicle(&self) -> &VehicleState {
        &self.vehicle
    }

    pub fn relays(&self) -> RelayBank {
        self.relays
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    /// Simulated seconds elapsed.
    pub fn time(&self) -> f64 {
        self.ticks as f64 * self.config.tick
    }

    pub fn metrics(&self) -> Metrics {
        self.metrics
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    pub fn stop(&mut self) {
        self.running = false;
    }

    /// Encode, synthesize and transmit `cmd`. Delivery is not guaranteed.
    pub fn submit_command(&mut self, cmd: Command) -> Result<Ack, SessionError> {
        if !self.running {
            return Err(SessionError::Stopped);
        }
        let frame = synthesize_symbol(encode_command(cmd), &self.config.dtmf)?;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.metrics.sent += 1;
        match transmit_audio(&frame, &self.config.channel, &mut self.up_rng) {
            Transmission::Dropped => self.metrics.dropped += 1,
            Transmission::Delivered { payload, .. } => self.uplink.push(self.ticks + self.latency_ticks, payload),
        }
        Ok(Ack { seq })
    }

    /// Advance the loop by one tick; returns the telemetry frame that reached
    /// the operator during this tick, if any.
    pub fn tick(&mut self) -> Result<Option<TelemetryFrame>, SessionError> {
        if !self.running {
            return Err(SessionError::Stopped);
        }
        for frame in self.uplink.pop_due(self.ticks) {
            self.receiver.enqueue(&frame);
        }
        let symbols = self.receiver.advance(self.config.samples_per_tick(), &mut self.metrics);
        for symbol in symbols {
            if let Some(cmd) = decode_command(symbol) {
                self.apply(cmd)?;
            }
        }

        let cfg = &self.config;
        self.vehicle = step(&self.vehicle, self.target, &cfg.scenario, &cfg.vehicle, cfg.tick)?;
        self.ticks += 1;
        self.vehicle.time = self.ticks as f64 * cfg.tick;

        let frame = TelemetryFrame::capture(&self.vehicle, self.relays.mask(), &cfg.scenario, &cfg.vehicle);
        let current = cfg.vehicle.motor_current(self.vehicle.drive);
        if let Transmission::Delivered { payload, .. } =
            transmit_telemetry(&frame, current, &cfg.channel, &mut self.down_rng)
        {
            self.downlink.push(self.ticks + self.latency_ticks, payload);
        }
        Ok(self.downlink.pop_due(self.ticks).pop())
    }

    /// Latest command wins: navigation replaces the drive target at once.
    fn apply(&mut self, cmd: Command) -> Result<(), SessionError> {
        self.last_command = Some(cmd);
        if cmd.is_navigation() {
            let bank = command_to_relays_with(cmd, self.config.turns()).expect("navigation command");
            self.target = relays_to_motors(bank).expect("drive table banks are safe");
            self.relays = bank;
        } else {
            self.vehicle = apply_searchlight(&self.vehicle, cmd)?;
        }
        Ok(())
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            ticks: self.ticks,
            vehicle: self.vehicle,
            relays: self.relays,
            pending_audio: self.uplink.len() + self.receiver.pending_frames(),
            last_command: self.last_command,
            metrics: self.metrics,
            running: self.running,
        }
    }
}
