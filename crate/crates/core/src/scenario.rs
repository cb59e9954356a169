//! Scenario files and timed command scripts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::Command;
use crate::vehicle::{VehicleParams, World};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] crate::vehicle::SimError),
}

/// `{bounds, obstacles, ambient_light, start_pose, battery_ah, params, seed}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub world: World,
    /// Initial charge; a full battery when absent.
    #[serde(default)]
    pub battery_ah: Option<f64>,
    #[serde(default)]
    pub params: VehicleParams,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn from_world(world: World) -> Self {
        Scenario {
            world,
            battery_ah: None,
            params: VehicleParams::default(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.params.validate()?;
        self.world.validate(&self.params)?;
        if let Some(b) = self.battery_ah {
            if !(b.is_finite() && (0.0..=self.params.battery_capacity).contains(&b)) {
                return Err(crate::vehicle::SimError::Params(format!(
                    "battery_ah {b} outside [0, {}]",
                    self.params.battery_capacity
                ))
                .into());
            }
        }
        Ok(())
    }

    pub fn initial_charge(&self) -> f64 {
        self.battery_ah.unwrap_or(self.params.battery_capacity)
    }
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptEntry {
    pub time_s: f64,
    pub command: Command,
}

/// Parse a `time_s,command` CSV. The header row is optional; entries are
/// returned in time order (stable for equal times).
pub fn parse_script(text: &str) -> Result<Vec<ScriptEntry>, ScenarioError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let err = |message: String| ScenarioError::Script { line, message };
        let record = record.map_err(|e| err(e.to_string()))?;
        if record.len() != 2 {
            return Err(err(format!("expected 2 fields, found {}", record.len())));
        }
        if i == 0 && record[0].eq_ignore_ascii_case("time_s") {
            continue;
        }
        let time_s: f64 = record[0]
            .parse()
            .map_err(|_| err(format!("bad time '{}'", &record[0])))?;
        if !(time_s.is_finite() && time_s >= 0.0) {
            return Err(err(format!("time {time_s} must be non-negative")));
        }
        let command: Command = record[1]
            .parse()
            .map_err(|e: crate::command::UnknownCommand| err(e.to_string()))?;
        out.push(ScriptEntry { time_s, command });
    }
    out.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
    Ok(out)
}

pub fn load_script(path: impl AsRef<Path>) -> Result<Vec<ScriptEntry>, ScenarioError> {
    parse_script(&read(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scenario_parses() {
        let s = Scenario::from_json(
            r#"{"bounds":{"w":10,"h":8},"obstacles":[{"x":7,"y":4,"r":0.5}],
                "ambient_light":0.2,"start_pose":{"x":2,"y":4,"theta":0},
                "battery_ah":6.5,"params":{"track_width":0.4},"seed":9}"#,
        )
        .unwrap();
        assert_eq!(s.world.obstacles.len(), 1);
        assert_eq!(s.params.track_width, 0.4);
        assert_eq!(s.params.gear_ratio, 10.0);
        assert_eq!(s.initial_charge(), 6.5);
        assert_eq!(s.seed, 9);
    }

    #[test]
    fn minimal_scenario_uses_defaults() {
        let s = Scenario::from_json(r#"{"bounds":{"w":5,"h":5},"start_pose":{"x":1,"y":1,"theta":0}}"#).unwrap();
        assert_eq!(s.world.ambient_light, 1.0);
        assert_eq!(s.initial_charge(), 7.0);
    }

    #[test]
    fn invalid_scenarios() {
        assert!(Scenario::from_json("{").is_err());
        assert!(Scenario::from_json(r#"{"bounds":{"w":5,"h":5}}"#).is_err());
        assert!(
            Scenario::from_json(r#"{"bounds":{"w":5,"h":5},"start_pose":{"x":1,"y":1,"theta":0},"battery_ah":9}"#)
                .is_err()
        );
        assert!(Scenario::from_json(
            r#"{"bounds":{"w":5,"h":5},"start_pose":{"x":1,"y":1,"theta":0},"params":{"wheel_radius":-1}}"#
        )
        .is_err());
    }

    #[test]
    fn scripts() {
        let s = parse_script("time_s,command\n5.0, Stop\n0.0,FORWARD\n").unwrap();
        assert_eq!(
            s,
            vec![
                ScriptEntry {
                    time_s: 0.0,
                    command: Command::Forward
                },
                ScriptEntry {
                    time_s: 5.0,
                    command: Command::Stop
                },
            ]
        );
        assert!(parse_script("").unwrap().is_empty());
        assert_eq!(parse_script("0.0,forward").unwrap().len(), 1);
        assert!(matches!(
            parse_script("0.0,fly"),
            Err(ScenarioError::Script { line: 1, .. })
        ));
        assert!(matches!(
            parse_script("0,stop\n-1,stop"),
            Err(ScenarioError::Script { line: 2, .. })
        ));
        assert!(parse_script("0,stop,extra").is_err());
    }
}
