//! Simulator and control stack for a small teleoperated tracked ground vehicle.
//!
//! The operator's commands travel as DTMF tones over a noisy radio link, are
//! decoded on the vehicle, and switch an eight-relay dual H-bridge driving
//! two track motors. The vehicle reports back pose, battery, an IR obstacle
//! LED and a camera sighting list whose noise grows with motor current.
//!
//! | module | role |
//! |---|---|
//! | [`dtmf`] | tone synthesis, Goertzel detection, debounced stream decoding |
//! | [`command`] | operator instruction set and keypad assignment |
//! | [`relay`] | relay bank, H-bridge truth table, shoot-through guard |
//! | [`vehicle`] | skid-steer plant, battery, IR detector, searchlight, camera |
//! | [`channel`] | seeded uplink/downlink with loss, latency and noise |
//! | [`station`] | the closed loop, tick by tick |
//! | [`protocol`], [`server`] | newline-delimited JSON over TCP |
//! | [`scenario`], [`wav`], [`cli`] | file formats and headless entry points |

pub mod channel;
pub mod cli;
pub mod command;
pub mod dtmf;
pub mod protocol;
pub mod relay;
pub mod scenario;
pub mod server;
pub mod station;
pub mod vehicle;
pub mod wav;

pub use channel::{transmit_audio, transmit_telemetry, ChannelConfig, Transmission};
pub use command::{decode_command, encode_command, is_navigation, Command};
pub use dtmf::{decode_stream, detect_symbol, goertzel_power, synthesize_symbol, DtmfConfig, DtmfSymbol, ToneFrame};
pub use relay::{command_to_relays, relays_to_motors, validate_relays, DriveState, MotorState, RelayBank};
pub use scenario::Scenario;
pub use station::{Session, SessionConfig};
pub use vehicle::{
    apply_searchlight, ir_obstacle_check, render_camera, step, Obstacle, Pose, TelemetryFrame, VehicleParams,
    VehicleState, World,
};
