//! Headless entry points behind the `ugv` binary.
//!
//! Exit codes are part of the contract: 0 success, 2 bad input, 3 the
//! environment refused (for example the port is taken).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::command::{decode_command, encode_command, Command};
use crate::dtmf::{decode_stream, synthesize_sequence, DtmfConfig};
use crate::scenario::{load_script, Scenario, ScriptEntry};
use crate::server::{Server, ServerError};
use crate::station::{Session, SessionConfig, SessionError};
use crate::vehicle::Pose;
use crate::wav::{read_wav, write_wav};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Environment(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Environment(_) => 3,
        }
    }

    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Channel and drive flags shared by `run` and `serve`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinkOverrides {
    pub seed: Option<u64>,
    pub snr_db: Option<f64>,
    pub drop_prob: Option<f64>,
    pub latency_ms: Option<f64>,
    pub invert_turns: bool,
}

impl LinkOverrides {
    pub fn apply(&self, config: &mut SessionConfig) {
        if let Some(seed) = self.seed {
            config.channel.seed = seed;
        }
        if let Some(snr) = self.snr_db {
            config.channel.snr_db = snr;
        }
        if let Some(p) = self.drop_prob {
            config.channel.drop_probability = p;
        }
        if let Some(ms) = self.latency_ms {
            config.channel.latency = ms / 1000.0;
        }
        config.invert_turns |= self.invert_turns;
    }
}

pub fn load_session_config(scenario_path: &Path, overrides: &LinkOverrides) -> Result<SessionConfig, CliError> {
    let scenario = Scenario::load(scenario_path).map_err(CliError::input)?;
    let mut config = SessionConfig::from_scenario(&scenario);
    overrides.apply(&mut config);
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub scenario: PathBuf,
    pub script: Option<PathBuf>,
    /// Simulated seconds.
    pub duration: f64,
    pub out: PathBuf,
    pub link: LinkOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub final_pose: Pose,
    /// Path length of the body centre, m.
    pub distance_traveled: f64,
    pub commands_sent: u64,
    pub commands_decoded: u64,
    pub commands_dropped: u64,
    pub decode_errors: u64,
    pub battery_consumed_ah: f64,
    /// Rising edges of the obstacle LED.
    pub obstacle_led_activations: u64,
    /// Ticks on which an obstacle or the arena edge blocked motion.
    pub blocked_ticks: u64,
    pub ticks: u64,
    pub simulated_duration_s: f64,
    pub wall_clock_s: f64,
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl RunReport {
    /// Same report with every simulated quantity rounded to 6 decimals.
    pub fn rounded(&self) -> RunReport {
        RunReport {
            final_pose: Pose {
                x: round6(self.final_pose.x),
                y: round6(self.final_pose.y),
                theta: round6(self.final_pose.theta),
            },
            distance_traveled: round6(self.distance_traveled),
            battery_consumed_ah: round6(self.battery_consumed_ah),
            simulated_duration_s: round6(self.simulated_duration_s),
            ..self.clone()
        }
    }
}

pub const TRAJECTORY_HEADER: &str = "t,x,y,theta,battery_ah,relay_mask,obstacle_led";

/// Drive a session through `script` for `ticks` ticks, writing one trajectory
/// row per tick (plus the initial state).
pub fn simulate<W: Write>(
    config: SessionConfig,
    script: &[ScriptEntry],
    ticks: u64,
    mut out: W,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let tick = config.tick;
    let mut session = Session::new(config)?;
    let io_err = |e: io::Error| CliError::Environment(format!("cannot write trajectory: {e}"));

    let write_row = |out: &mut W, s: &Session| -> io::Result<()> {
        let v = s.vehicle();
        writeln!(
            out,
            "{:.6},{},{},{},{},{},{}",
            s.time(),
            v.pose.x,
            v.pose.y,
            v.pose.theta,
            v.battery_charge,
            s.relays().mask(),
            v.obstacle_led as u8
        )
    };

    writeln!(out, "{TRAJECTORY_HEADER}").map_err(io_err)?;
    write_row(&mut out, &session).map_err(io_err)?;

    let start = *session.vehicle();
    let mut distance = 0.0;
    let mut led_on = start.obstacle_led;
    let mut activations = 0;
    let mut blocked = 0;
    let mut pending = script.iter().peekable();

    for n in 0..ticks {
        while let Some(entry) = pending.next_if(|e| (e.time_s / tick).round() as u64 <= n) {
            session.submit_command(entry.command)?;
        }
        let before = session.vehicle().pose;
        session.tick()?;
        let v = session.vehicle();
        distance += v.pose.distance_to(&before);
        if v.obstacle_led && !led_on {
            activations += 1;
        }
        led_on = v.obstacle_led;
        blocked += v.collided as u64;
        write_row(&mut out, &session).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;

    let m = session.metrics();
    let v = session.vehicle();
    Ok(RunReport {
        final_pose: v.pose,
        distance_traveled: distance,
        commands_sent: m.sent,
        commands_decoded: m.decoded,
        commands_dropped: m.dropped,
        decode_errors: m.decode_errors,
        battery_consumed_ah: start.battery_charge - v.battery_charge,
        obstacle_led_activations: activations,
        blocked_ticks: blocked,
        ticks,
        simulated_duration_s: ticks as f64 * tick,
        wall_clock_s: started.elapsed().as_secs_f64(),
    })
}

pub fn run_scenario(opts: &RunOptions) -> Result<RunReport, CliError> {
    let config = load_session_config(&opts.scenario, &opts.link)?;
    let script = match &opts.script {
        Some(p) => load_script(p).map_err(CliError::input)?,
        None => Vec::new(),
    };
    if !(opts.duration.is_finite() && opts.duration > 0.0) {
        return Err(CliError::Input(format!(
            "duration must be positive, got {}",
            opts.duration
        )));
    }
    let ticks = (opts.duration / config.tick).round().max(1.0) as u64;
    let file = File::create(&opts.out)
        .map_err(|e| CliError::Environment(format!("cannot create {}: {e}", opts.out.display())))?;
    simulate(config, &script, ticks, BufWriter::new(file))
}

/// Serve a live session until `shutdown` is set.
pub fn serve(config: SessionConfig, host: &str, shutdown: Arc<AtomicBool>) -> Result<(), CliError> {
    let server = match Server::bind(config.clone(), (host, config.port)) {
        Ok(s) => s,
        Err(ServerError::Session(e)) => return Err(e.into()),
        Err(e) => return Err(CliError::Environment(e.to_string())),
    };
    if let Ok(addr) = server.local_addr() {
        log::info!("station listening on {addr}");
    }
    server.run(shutdown).map_err(|e| CliError::Environment(e.to_string()))
}

/// Command names (one per line, blank lines ignored) to a WAV of DTMF frames.
pub fn dtmf_encode(input: &Path, output: &Path, config: &DtmfConfig) -> Result<usize, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let commands = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.parse::<Command>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::input)?;
    let symbols: Vec<_> = commands.iter().map(|&c| encode_command(c)).collect();
    let audio = synthesize_sequence(&symbols, config).map_err(CliError::input)?;
    write_wav(output, &audio).map_err(|e| CliError::Environment(e.to_string()))?;
    Ok(commands.len())
}

/// WAV to decoded command names; unmapped symbols come out as `unknown(<c>)`.
/// The WAV's own sample rate replaces `config.sample_rate`.
pub fn dtmf_decode(input: &Path, config: &DtmfConfig) -> Result<Vec<String>, CliError> {
    let audio = read_wav(input).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let config = DtmfConfig {
        sample_rate: audio.sample_rate,
        ..*config
    };
    let symbols = decode_stream(&audio.samples, &config).map_err(CliError::input)?;
    Ok(symbols
        .into_iter()
        .map(|s| match decode_command(s) {
            Some(c) => c.wire_name().to_string(),
            None => format!("unknown({s})"),
        })
        .collect())
}
