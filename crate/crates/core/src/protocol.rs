//! Newline-delimited JSON messages between the station and its clients.
//!
//! Every message is one UTF-8 JSON object per line with a `type` tag.
//! Unknown fields are ignored on decode.

use serde::{Deserialize, Serialize};

use crate::command::Command;
use crate::relay::DriveState;
use crate::station::SessionConfig;
use crate::vehicle::{Pose, Sighting, TelemetryFrame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Command { name: Command },
    ConfigGet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StationMessage {
    Telemetry(WireTelemetry),
    Ack { seq: u64 },
    Config(Box<SessionConfig>),
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireTelemetry {
    pub t: f64,
    pub pose: Pose,
    pub relay_mask: u8,
    pub drive: DriveState,
    pub battery_ah: f64,
    pub obstacle_led: bool,
    pub searchlight: bool,
    pub camera: Vec<Sighting>,
    pub noise_sigma: f64,
}

impl From<&TelemetryFrame> for WireTelemetry {
    fn from(f: &TelemetryFrame) -> Self {
        WireTelemetry {
            t: f.time,
            pose: f.pose,
            relay_mask: f.relay_mask,
            drive: f.drive,
            battery_ah: f.battery_charge,
            obstacle_led: f.obstacle_led,
            searchlight: f.searchlight_on,
            camera: f.camera.clone(),
            noise_sigma: f.camera_noise_sigma,
        }
    }
}

impl From<WireTelemetry> for TelemetryFrame {
    fn from(w: WireTelemetry) -> Self {
        TelemetryFrame {
            time: w.t,
            pose: w.pose,
            relay_mask: w.relay_mask,
            drive: w.drive,
            battery_charge: w.battery_ah,
            obstacle_led: w.obstacle_led,
            searchlight_on: w.searchlight,
            camera: w.camera,
            camera_noise_sigma: w.noise_sigma,
        }
    }
}

impl StationMessage {
    pub fn telemetry(frame: &TelemetryFrame) -> Self {
        StationMessage::Telemetry(frame.into())
    }

    /// One line, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("station messages always serialize")
    }
}

impl ClientMessage {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("client messages always serialize")
    }
}

pub fn parse_client_line(line: &str) -> Result<ClientMessage, serde_json::Error> {
    serde_json::from_str(line)
}

pub fn parse_station_line(line: &str) -> Result<StationMessage, serde_json::Error> {
    serde_json::from_str(line)
}
